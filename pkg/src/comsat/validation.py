"""Cross-checks between the closed forms and the simulator.

Each check returns a :class:`CheckResult` carrying the measured statistic and
the pass threshold, so reports can show how close a check came.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import analytic, montecarlo
from .geometry import ElevationGeometry, serving_distance_cdf

KS_MAX = 0.01
CHI2_ALPHA = 0.05
LAPLACE_REL_TOL = 0.005
COVERAGE_ABS_TOL = 0.03
FIG3_THRESHOLDS_DB = tuple(range(-50, 21))
LAPLACE_S_VALUES = (1e1, 1e2, 1e3, 1e4, 1e5)


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    statistic: float
    threshold: float
    details: dict = field(default_factory=dict)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g}"

    def as_dict(self):
        return {"key": self.key, "name": self.name, "passed": bool(self.passed), "statistic": float(self.statistic),
                "threshold": float(self.threshold), "details": self.details}


def serving_distance_ks(params, eta, n_samples=100_000, seed=0):
    geom = ElevationGeometry.from_eta(params, eta)
    d = montecarlo.sample_serving_distances(params, geom, n_samples, seed)
    res = stats.kstest(d, lambda x: serving_distance_cdf(params, eta, x))
    return CheckResult("serving_distance_ks", f"serving-distance KS (eta={eta:.6g})", res.statistic < KS_MAX,
                       float(res.statistic), KS_MAX, {"n_samples": len(d), "p_value": float(res.pvalue)})


def poisson_count_chi2(params, n_draws=5000, seed=0, n_bins=20):
    """Chi-square of full-sphere satellite counts against Poisson(4 pi R_S^2 lambda)."""
    rng = montecarlo.make_rng(seed)
    counts = np.array([montecarlo.sample_constellation(params, rng).count for _ in range(n_draws)])
    mean = 4.0 * math.pi * params.sat_radius_km ** 2 * params.sat_density_per_km2
    dist = stats.poisson(mean)
    # roughly equiprobable integer bins; the outer bins absorb both tails
    inner = np.unique(dist.ppf(np.linspace(0, 1, n_bins + 1)[1:-1]).astype(int))
    edges = np.concatenate(([-1], inner, [np.iinfo(np.int64).max]))
    observed = np.array([np.count_nonzero((counts > lo) & (counts <= hi))
                         for lo, hi in zip(edges[:-1], edges[1:])])
    probs = np.diff(np.concatenate(([0.0], dist.cdf(edges[1:-1]), [1.0])))
    expected = probs * n_draws
    res = stats.chisquare(observed, expected)
    return CheckResult("poisson_count_chi2", "satellite-count chi-square p-value", res.pvalue > CHI2_ALPHA,
                       float(res.pvalue), CHI2_ALPHA,
                       {"n_draws": n_draws, "chi2": float(res.statistic), "bins": len(observed),
                        "sample_mean": float(counts.mean()), "poisson_mean": mean})


def laplace_match(params, eta, s_values=LAPLACE_S_VALUES, n_trials=400_000, seed=0, workers=1):
    """Empirical E[exp(-s I)] over simulated interference vs the closed form."""
    geom = ElevationGeometry.from_eta(params, eta)
    batch = montecarlo.simulate_trials(params, geom, n_trials, seed, "coms", workers)
    rows = []
    for s in s_values:
        empirical = float(np.mean(np.exp(-s * batch.interference_power)))
        model = analytic.interference_laplace(params, geom, s)
        rows.append({"s": s, "empirical": empirical, "analytic": model,
                     "rel_err": abs(empirical - model) / model})
    worst = max(r["rel_err"] for r in rows)
    return CheckResult("laplace_match", f"interference Laplace max rel err (eta={eta:.6g})", worst < LAPLACE_REL_TOL,
                       worst, LAPLACE_REL_TOL, {"n_trials": n_trials, "points": rows})


def desired_power_exponential_ks(params, serving_d=(500.0, 560.0, 640.0, 700.0),
                                 n_draws=100_000, seed=0):
    """Coherent desired power over fading, scaled by its mean, against Exp(1)."""
    serving_d = np.asarray(serving_d, dtype=float)
    mean = float(np.sum(serving_d ** -params.pathloss_exponent))
    power = montecarlo.coherent_desired_power(params, serving_d, n_draws, seed)
    res = stats.kstest(power / mean, "expon")
    return CheckResult("desired_power_exponential_ks", "desired-power exponential KS", res.statistic < KS_MAX, float(res.statistic),
                       KS_MAX, {"n_draws": n_draws, "serving_d_km": serving_d.tolist(),
                                "p_value": float(res.pvalue)})


def coverage_curves(params, eta, thresholds_db, n_trials, master_seed=0, mc_params=None,
                    baseline=False, workers=1):
    """Analytic and simulated coverage over a threshold grid.

    Each grid point gets its own ``(master_seed, index)`` stream.
    """
    mc_params = mc_params or params
    geom = ElevationGeometry.from_eta(params, eta)
    mc_geom = ElevationGeometry.from_eta(mc_params, eta)
    out = {"threshold_db": np.asarray(thresholds_db, dtype=float), "analytic": [], "mc": [],
           "mc_half_width": [], "empty": [], "baseline": []}
    for i, db in enumerate(thresholds_db):
        gamma = 10.0 ** (db / 10.0)
        out["analytic"].append(analytic.coverage_probability(params, geom, gamma))
        est = montecarlo.estimate_coverage(mc_params, mc_geom, gamma, n_trials, (master_seed, i), workers)
        out["mc"].append(est.mean)
        out["mc_half_width"].append(est.half_width_95)
        out["empty"].append(est.empty_serving_fraction)
        if baseline:
            base = montecarlo.estimate_nearest_sat_coverage(mc_params, gamma, n_trials,
                                                            (master_seed, i), workers)
            out["baseline"].append(base.mean)
    return {k: np.asarray(v, dtype=float) for k, v in out.items()}


def coverage_match(params, eta, thresholds_db=FIG3_THRESHOLDS_DB, n_trials=10_000, master_seed=0,
                   mc_params=None, workers=1):
    curves = coverage_curves(params, eta, thresholds_db, n_trials, master_seed, mc_params,
                             workers=workers)
    err = np.abs(curves["analytic"] - curves["mc"])
    i = int(np.argmax(err))
    return CheckResult("coverage_match", f"analytic vs Monte Carlo coverage max abs diff (eta={eta:.6g})",
                       bool(err[i] <= COVERAGE_ABS_TOL), float(err[i]), COVERAGE_ABS_TOL,
                       {"n_trials": n_trials, "worst_threshold_db": float(curves["threshold_db"][i]),
                        "analytic_at_worst": float(curves["analytic"][i]),
                        "mc_at_worst": float(curves["mc"][i]),
                        "empty_serving_fraction": float(np.mean(curves["empty"]))})


def crossing_db(thresholds_db, curve, level=0.5):
    """Threshold (dB) where a decreasing curve crosses ``level``, by linear interpolation."""
    x = np.asarray(thresholds_db, dtype=float)
    y = np.asarray(curve, dtype=float)
    above = np.nonzero(y >= level)[0]
    if len(above) == 0 or above[-1] == len(y) - 1:
        return math.nan
    i = above[-1]
    x0, x1, y0, y1 = x[i], x[i + 1], y[i], y[i + 1]
    return float(x0 + (y0 - level) * (x1 - x0) / (y0 - y1))


def run_suite(params, eta, n_trials=10_000, master_seed=0, ks_samples=100_000,
              laplace_trials=400_000, mc_params=None, workers=1,
              thresholds_db=FIG3_THRESHOLDS_DB):
    """Every cross-oracle check at one cone angle."""
    return [
        serving_distance_ks(params, eta, ks_samples, (master_seed, 1)),
        poisson_count_chi2(params, seed=(master_seed, 2)),
        laplace_match(params, eta, n_trials=laplace_trials, seed=(master_seed, 3), workers=workers),
        desired_power_exponential_ks(params, n_draws=ks_samples, seed=(master_seed, 4)),
        coverage_match(params, eta, thresholds_db, n_trials=n_trials, master_seed=master_seed,
                       mc_params=mc_params, workers=workers),
    ]
