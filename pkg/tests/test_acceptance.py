"""End-to-end acceptance checks at the reference LEO scenario.

Each test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) before asserting, so a red criterion still
reports its measured values.
"""

import hashlib
import json
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from comsat import analytic as an
from comsat import cli
from comsat import geometry as g
from comsat import validation
from comsat.geometry import ElevationGeometry, SystemParams
from comsat.sweep import optimize_elevation

from conftest import ETAS

THRESHOLDS_DB = tuple(range(-50, 21))
TRIALS = 10_000
COVERAGE_TOL = 0.03
GAP_RANGE_DB = (2.0 - 1.0, 15.0 + 1.0)
ZETA_500 = (25.0, 5.0)
ZETA_1000 = (35.0, 7.0)
RATE_RATIO = (2.0, 0.25)

pytestmark = pytest.mark.acceptance


def reference(altitude_km=500.0, **kw):
    return SystemParams.from_altitude(altitude_km, **kw)


@pytest.fixture(scope="module")
def curves():
    """Analytic and simulated coverage over the threshold sweep, per cone angle."""
    p = reference()
    return {eta: validation.coverage_curves(p, eta, THRESHOLDS_DB, TRIALS, master_seed=2024,
                                            baseline=math.isclose(eta, math.pi / 4))
            for eta in ETAS}


@pytest.fixture(scope="module")
def optima():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return {key: optimize_elevation(reference(alt, ut_density_per_km2=lam_u))
                for key, (alt, lam_u) in {"500": (500.0, 1e-6), "1000": (1000.0, 1e-6),
                                          "500_dense": (500.0, 2e-6)}.items()}


def test_c1_analytic_vs_monte_carlo(curves, acceptance_report):
    parts, ok = [], True
    for eta, c in curves.items():
        err = np.abs(c["analytic"] - c["mc"])
        i = int(np.argmax(err))
        ok &= bool(err[i] <= COVERAGE_TOL)
        parts.append(f"eta={eta:.4f}: max|diff|={err[i]:.4f} at {THRESHOLDS_DB[i]} dB "
                     f"(P[no server]={c['empty'].mean():.3f})")
    detail = "; ".join(parts) + f"; tol {COVERAGE_TOL}"
    assert acceptance_report(1, "coverage closed form vs simulation", ok, detail), detail


def test_c2_joint_vs_nearest(curves, acceptance_report):
    c = curves[math.pi / 4]
    shortfall = c["baseline"] - c["mc"]
    worst = int(np.argmax(shortfall))
    pointwise = bool(np.all(c["mc"] >= c["baseline"]))
    x_coms = validation.crossing_db(THRESHOLDS_DB, c["mc"])
    x_near = validation.crossing_db(THRESHOLDS_DB, c["baseline"])
    gap = x_coms - x_near
    in_range = GAP_RANGE_DB[0] <= gap <= GAP_RANGE_DB[1]
    ok = pointwise and in_range
    detail = (f"pointwise dominance {'holds' if pointwise else 'violated'} "
              f"(max baseline excess {shortfall[worst]:.4f} at {THRESHOLDS_DB[worst]} dB, "
              f"{int(np.sum(shortfall > 0))} of {len(shortfall)} points); "
              f"0.5-level gap {gap:.2f} dB (allowed {GAP_RANGE_DB}); "
              f"closed-form vs baseline gap {validation.crossing_db(THRESHOLDS_DB, c['analytic']) - x_near:.2f} dB")
    assert acceptance_report(2, "joint transmission vs nearest satellite", ok, detail), detail


def test_c3_optimal_elevation(optima, acceptance_report):
    z500, z1000 = optima["500"].zeta_deg, optima["1000"].zeta_deg
    ok = abs(z500 - ZETA_500[0]) <= ZETA_500[1] and abs(z1000 - ZETA_1000[0]) <= ZETA_1000[1]
    detail = (f"zeta*(500 km)={z500:.2f} deg (want {ZETA_500[0]}±{ZETA_500[1]}), "
              f"zeta*(1000 km)={z1000:.2f} deg (want {ZETA_1000[0]}±{ZETA_1000[1]}); "
              f"search range [1, 89] deg")
    assert acceptance_report(3, "optimal elevation angle", ok, detail), detail


def test_c4_rate_ratio(optima, acceptance_report):
    ratio = optima["500"].rate_bps / optima["1000"].rate_bps
    ok = abs(ratio - RATE_RATIO[0]) <= RATE_RATIO[1] * RATE_RATIO[0]
    detail = (f"rate*(500)/rate*(1000)={ratio:.3f} (want {RATE_RATIO[0]}±{RATE_RATIO[1]:.0%}); "
              f"rate*={optima['500'].rate_bps:.4g} / {optima['1000'].rate_bps:.4g} bit/s")
    assert acceptance_report(4, "maximal-rate ratio across altitudes", ok, detail), detail


def test_c5_user_density_trend(optima, acceptance_report):
    base, dense = optima["500"], optima["500_dense"]
    zeta_up = dense.zeta_deg > base.zeta_deg
    rate_down = dense.rate_bps < base.rate_bps
    ok = zeta_up and rate_down
    detail = (f"zeta*: {base.zeta_deg:.2f} -> {dense.zeta_deg:.2f} deg "
              f"({'increases' if zeta_up else 'does not increase'}); "
              f"rate*: {base.rate_bps:.4g} -> {dense.rate_bps:.4g} bit/s "
              f"({'decreases' if rate_down else 'does not decrease'})")
    assert acceptance_report(5, "user-density trend", ok, detail), detail


def test_c6_altitude_ordering(acceptance_report):
    low, high = reference(500.0), reference(1000.0)
    ok, parts = True, []
    for eta in ETAS:
        r_low = an.rate_report(low, ElevationGeometry.from_eta(low, eta))
        r_high = an.rate_report(high, ElevationGeometry.from_eta(high, eta))
        good = (r_high.spectral_efficiency > r_low.spectral_efficiency
                and r_high.rate_bps < r_low.rate_bps)
        ok &= good
        parts.append(f"eta={eta:.4f}: SE {r_low.spectral_efficiency:.4f}->{r_high.spectral_efficiency:.4f}, "
                     f"rate {r_low.rate_bps:.4g}->{r_high.rate_bps:.4g}")
    detail = "500->1000 km " + "; ".join(parts)
    assert acceptance_report(6, "SE up and rate down with altitude", ok, detail), detail


def test_c7_distribution_oracles(acceptance_report):
    p = reference()
    checks = []
    for i, eta in enumerate(ETAS):
        checks.append(validation.serving_distance_ks(p, eta, 100_000, (7, i)))
    checks.append(validation.poisson_count_chi2(p, seed=(7, 10)))
    for i, eta in enumerate(ETAS):
        checks.append(validation.laplace_match(p, eta, n_trials=400_000, seed=(7, 20 + i)))
    checks.append(validation.desired_power_exponential_ks(p, seed=(7, 30)))
    ok = all(c.passed for c in checks)
    detail = "; ".join(f"{c.key}={c.statistic:.4g}{'' if c.passed else ' (FAIL)'}" for c in checks)
    assert acceptance_report(7, "distribution oracles", ok, detail), detail


def test_c8_determinism(tmp_path, acceptance_report):
    small = {"threshold_db_grid": [-20, 0, 10], "elevation_grid_deg": [20, 40, 60], "mc_trials": 500,
             "altitude_km": [500, 1000], "baseline": True, "ks_samples": 5000, "laplace_trials": 2000}
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps(small))
    digests, codes = {}, []
    for command in ("coverage", "rate", "optimize", "validate"):
        out = tmp_path / f"{command}.out"
        runs = []
        for _ in range(2):
            for stale in tmp_path.glob(f"{command}*.out"):
                stale.unlink()
            codes.append(cli.main([command, "--config", str(config), "--out", str(out), "--seed", "11"]))
            produced = sorted(tmp_path.glob(f"{command}*.out"))
            runs.append([hashlib.sha256(f.read_bytes()).hexdigest() for f in produced])
        digests[command] = runs
    ok = all(a == b and a for a, b in digests.values()) and set(codes) <= {cli.EXIT_OK, cli.EXIT_VALIDATION}
    detail = ", ".join(f"{k}: {'identical' if a == b and a else 'differs'} ({len(a)} file(s))"
                       for k, (a, b) in digests.items())
    assert acceptance_report(8, "byte-identical reruns", ok, detail), detail


def test_c9_numerical_consistency(acceptance_report):
    p = reference()
    tight = an.QuadratureSpec(rel_tol=1e-12, abs_tol=1e-300, max_subdivisions=500)
    worst_mean = worst_sub = worst_cdf = 0.0
    for alpha in (2.0, 2.5, 3.0, 4.0):
        q = p.replace(pathloss_exponent=alpha)
        for eta in ETAS:
            geo = ElevationGeometry.from_eta(q, eta)
            ref, _ = integrate.quad(lambda r: r ** (1 - alpha), geo.r_serv_min_km, geo.r_serv_max_km,
                                    epsabs=0, epsrel=1e-13)
            ref *= 2 * math.pi * q.sat_density_per_km2 * q.sat_radius_km / q.earth_radius_km
            worst_mean = max(worst_mean, abs(an.mean_channel_sum(q, geo) / ref - 1))
            for s in np.logspace(-1, 9, 6) * 1e3 ** (alpha - 2):
                u = an.laplace_exponent(q, geo, s, form="u", quad=tight)
                r = an.laplace_exponent(q, geo, s, form="r", quad=tight)
                worst_sub = max(worst_sub, abs(u / r - 1))
    for eta in ETAS:
        r_max = g.max_serving_distance(p, eta)
        for d in np.linspace(500.0, r_max, 9)[1:]:
            val, _ = integrate.quad(lambda x: g.serving_distance_pdf(p, eta, x), 500.0, d,
                                    epsabs=1e-13, epsrel=1e-13)
            worst_cdf = max(worst_cdf, abs(val - g.serving_distance_cdf(p, eta, d)))
    ok = worst_mean <= 1e-10 and worst_sub <= 1e-9 and worst_cdf <= 1e-8
    detail = (f"mean channel sum vs quadrature rel {worst_mean:.2e} (<=1e-10); "
              f"u vs r Laplace exponent rel {worst_sub:.2e} (<=1e-9); "
              f"CDF vs integrated PDF abs {worst_cdf:.2e} (<=1e-8)")
    assert acceptance_report(9, "numerical self-consistency", ok, detail), detail
