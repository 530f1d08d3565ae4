"""Curves over threshold, elevation, altitude or user density, and the
optimal-elevation search."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic, montecarlo
from .geometry import ElevationGeometry

VARIABLES = ("threshold_db", "elevation_deg", "altitude_km", "ut_density")
METRICS = ("coverage", "rate", "se")
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class SweepPointError(RuntimeError):
    """A grid point failed; carries the offending grid value."""

    def __init__(self, variable, value, cause):
        super().__init__(f"{variable}={value!r}: {cause}")
        self.variable = variable
        self.value = value
        self.cause = cause


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SweepSpec:
    base_params: object
    variable: str
    grid: tuple
    mc_trials: int = 0
    master_seed: int = 0
    metric: str = "coverage"
    elevation_deg: float = 30.0
    threshold_db: float = 0.0
    baseline: bool = False
    workers: int = 1
    mc_params: object = None  # overrides the simulator's params (fault injection)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.mc_trials < 0:
            raise ValueError("mc_trials must be >= 0")
        if self.variable == "threshold_db" and self.metric != "coverage":
            raise ValueError("a threshold sweep only makes sense for coverage")


@dataclass
class CurvePoint:
    x: float
    analytic: float
    mc_mean: float | None = None
    mc_half_width: float | None = None
    empty_serving_fraction: float | None = None
    extras: dict = field(default_factory=dict)


@dataclass
class CurveSet:
    variable: str
    metric: str
    rows: list
    metadata: dict

    def column(self, name):
        if name in ("x", "analytic", "mc_mean", "mc_half_width", "empty_serving_fraction"):
            return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                             for r in self.rows])
        return np.array([r.extras.get(name, np.nan) for r in self.rows])


def _point_inputs(spec, x):
    params = spec.base_params
    mc_params = spec.mc_params or spec.base_params
    zeta = spec.elevation_deg
    gamma_db = spec.threshold_db
    if spec.variable == "threshold_db":
        gamma_db = x
    elif spec.variable == "elevation_deg":
        zeta = x
    elif spec.variable == "altitude_km":
        params = params.with_altitude(x)
        mc_params = mc_params.with_altitude(x)
    else:
        params = params.replace(ut_density_per_km2=x)
        mc_params = mc_params.replace(ut_density_per_km2=x)
    return params, mc_params, zeta, gamma_db


def _evaluate(spec, index, x):
    params, mc_params, zeta, gamma_db = _point_inputs(spec, x)
    geom = ElevationGeometry.from_elevation_deg(params, zeta)
    seed = (spec.master_seed, index)
    point = CurvePoint(x=x, analytic=math.nan)
    if spec.metric == "coverage":
        gamma = db_to_linear(gamma_db)
        point.analytic = analytic.coverage_probability(params, geom, gamma)
        if spec.mc_trials:
            mc_geom = ElevationGeometry.from_elevation_deg(mc_params, zeta)
            est = montecarlo.estimate_coverage(mc_params, mc_geom, gamma, spec.mc_trials,
                                               seed, spec.workers)
            point.mc_mean, point.mc_half_width = est.mean, est.half_width_95
            point.empty_serving_fraction = est.empty_serving_fraction
            if spec.baseline:
                base = montecarlo.estimate_nearest_sat_coverage(mc_params, gamma, spec.mc_trials,
                                                                seed, spec.workers)
                point.extras["baseline"] = base.mean
                point.extras["baseline_half_width"] = base.half_width_95
    else:
        report = analytic.rate_report(params, geom)
        point.analytic = report.rate_bps if spec.metric == "rate" else report.spectral_efficiency
        point.extras["analytic_rate"] = report.rate_bps
        point.extras["analytic_se"] = report.spectral_efficiency
        if spec.mc_trials:
            mc_geom = ElevationGeometry.from_elevation_deg(mc_params, zeta)
            rate, se = montecarlo.estimate_rate_and_se(mc_params, mc_geom, spec.mc_trials,
                                                       seed, spec.workers)
            est = rate if spec.metric == "rate" else se
            point.mc_mean, point.mc_half_width = est.mean, est.half_width_95
            point.empty_serving_fraction = est.empty_serving_fraction
            point.extras.update(mc_rate=rate.mean, mc_rate_half_width=rate.half_width_95,
                                mc_se=se.mean, mc_se_half_width=se.half_width_95)
    return point


def _evaluate_checked(spec, index, x):
    try:
        return _evaluate(spec, index, x)
    except Exception as exc:  # noqa: BLE001 - re-raised with the grid value attached
        raise SweepPointError(spec.variable, x, exc) from exc


def run_sweep(spec, parallel_points=1):
    """Evaluate every grid point; rows come back in grid order.

    Monte Carlo seeds are ``(master_seed, grid_index)``, so the curve does not
    depend on ``parallel_points``.
    """
    if parallel_points > 1:
        with ThreadPoolExecutor(max_workers=parallel_points) as pool:
            rows = list(pool.map(lambda ix: _evaluate_checked(spec, *ix), enumerate(spec.grid)))
    else:
        rows = [_evaluate_checked(spec, i, x) for i, x in enumerate(spec.grid)]
    meta = {
        "params": asdict(spec.base_params),
        "variable": spec.variable,
        "metric": spec.metric,
        "elevation_deg": spec.elevation_deg,
        "threshold_db": spec.threshold_db,
        "mc_trials": spec.mc_trials,
        "master_seed": spec.master_seed,
        "baseline": spec.baseline,
    }
    return CurveSet(variable=spec.variable, metric=spec.metric, rows=rows, metadata=meta)


@dataclass(frozen=True)
class ElevationOptimum:
    zeta_deg: float
    rate_bps: float
    bracket: tuple
    iterations: int
    coarse_step_deg: float
    flat: bool


def golden_section_max(f, a, b, tol):
    """Maximise a unimodal ``f`` on [a, b]; returns (x, f(x), iterations)."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), it


def optimize_elevation(params, zeta_lo=1.0, zeta_hi=89.0, tol_deg=0.1,
                       coarse_step_deg=1.0, quad=analytic.DEFAULT_QUAD):
    """Elevation angle maximising the analytic per-user rate.

    A coarse scan picks the best grid cell; golden-section search then refines
    inside the two neighbouring cells, which keeps the unimodality assumption
    local.
    """
    if not 0 < zeta_lo < zeta_hi < 90:
        raise ValueError("need 0 < zeta_lo < zeta_hi < 90")
    if not tol_deg > 0:
        raise ValueError("tol_deg must be > 0")

    def rate(zeta):
        return analytic.ergodic_rate(params, ElevationGeometry.from_elevation_deg(params, zeta), quad)

    n = max(2, int(math.floor((zeta_hi - zeta_lo) / coarse_step_deg + 1e-9)) + 1)
    grid = np.linspace(zeta_lo, zeta_lo + (n - 1) * coarse_step_deg, n)
    if grid[-1] < zeta_hi - 1e-9:
        grid = np.append(grid, zeta_hi)
    values = np.array([rate(z) for z in grid])
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    zeta, peak, it = golden_section_max(rate, lo, hi, tol_deg)
    if values[best] > peak:
        zeta, peak = float(grid[best]), float(values[best])
    flat = (values.max() - values.min()) < 1e-3 * abs(values.max())
    if flat:
        warnings.warn("rate varies by less than 0.1% over the elevation bracket", RuntimeWarning)
    return ElevationOptimum(zeta_deg=float(zeta), rate_bps=float(peak), bracket=(float(lo), float(hi)),
                            iterations=it, coarse_step_deg=coarse_step_deg, flat=bool(flat))
