"""Monte Carlo simulator of spherical-Poisson constellations.

This is the independent check on the closed forms: satellites are drawn as a
homogeneous Poisson process on the orbit sphere, every satellite gets its own
Rayleigh coefficient, serving satellites add coherently (they send one shared
symbol) and the SINR is formed trial by trial without any mean-field step.

Batch estimators split the trials into fixed blocks of ``BLOCK_TRIALS``.  Each
block draws from its own ``SeedSequence(master_seed, spawn_key=(block,))``
stream, so results do not depend on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EstimatorError
from .geometry import avg_uts_per_sap

BLOCK_TRIALS = 256
MIN_TRIALS = 100
Z95 = 1.959963984540054


def make_rng(seed):
    """Generator from an int, a tuple of ints, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if isinstance(seed, tuple):
        return np.random.default_rng(np.random.SeedSequence(list(seed)))
    return np.random.default_rng(seed)


def _block_seed(master_seed, block):
    entropy = list(master_seed) if isinstance(master_seed, tuple) else master_seed
    return np.random.SeedSequence(entropy, spawn_key=(block,))


@dataclass(frozen=True)
class Constellation:
    positions: np.ndarray  # (n, 3), km

    @property
    def count(self):
        return len(self.positions)


@dataclass(frozen=True)
class TrialOutcome:
    desired_power: float
    interference_power: float
    serving_count: int
    sinr: float


@dataclass(frozen=True)
class TrialBatch:
    desired_power: np.ndarray
    interference_power: np.ndarray
    serving_count: np.ndarray
    visible_count: np.ndarray
    sinr: np.ndarray

    @property
    def n_trials(self):
        return len(self.sinr)


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    half_width_95: float
    n_trials: int
    empty_serving_fraction: float

    @property
    def ci_low(self):
        return max(0.0, self.mean - self.half_width_95)

    @property
    def ci_high(self):
        return self.mean + self.half_width_95


def sample_constellation(params, seed):
    """Draw one realisation of the satellite process on the whole orbit sphere."""
    rng = make_rng(seed)
    r_s = params.sat_radius_km
    n = rng.poisson(4.0 * math.pi * r_s * r_s * params.sat_density_per_km2)
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    rho = np.sqrt(1.0 - z * z)
    pos = r_s * np.column_stack((rho * np.cos(phi), rho * np.sin(phi), z))
    return Constellation(positions=pos)


def classify(constellation, params, geom):
    """Split satellite distances into (serving, interfering) for the polar user.

    Satellites below the user's horizon are dropped.
    """
    ut = np.array([0.0, 0.0, params.earth_radius_km])
    d = np.linalg.norm(constellation.positions - ut, axis=1)
    serving = d <= geom.r_serv_max_km
    interfering = ~serving & (d <= geom.r_int_max_km)
    return d[serving], d[interfering]


def complex_normal(rng, size):
    """CN(0, 1) samples."""
    re, im = rng.standard_normal((2, size))
    return (re + 1j * im) * math.sqrt(0.5)


def trial_outcome(params, serving_d, interfering_d, serving_h, interfering_h):
    """SINR decomposition of one trial from given distances and fading."""
    alpha = params.pathloss_exponent
    serving_d = np.asarray(serving_d, dtype=float)
    interfering_d = np.asarray(interfering_d, dtype=float)
    amp = np.sum(serving_d ** (-0.5 * alpha) * np.asarray(serving_h))
    desired = float(abs(amp) ** 2)
    interference = float(np.sum(interfering_d ** (-alpha) * np.abs(interfering_h) ** 2))
    g = params.link_gain
    return TrialOutcome(desired_power=desired, interference_power=interference,
                        serving_count=len(serving_d),
                        sinr=g * desired / (g * interference + 1.0))


def run_trial(params, geom, seed):
    """One full-sphere trial: constellation, classification, fading, SINR."""
    rng = make_rng(seed)
    serving_d, interfering_d = classify(sample_constellation(params, rng), params, geom)
    h_s = complex_normal(rng, len(serving_d))
    h_i = complex_normal(rng, len(interfering_d))
    return trial_outcome(params, serving_d, interfering_d, h_s, h_i)


def _visible_distances(params, n, rng):
    """Satellite distances of ``n`` independent trials, restricted to the visible cap.

    On a sphere the z coordinate of a uniform point is uniform, so the visible
    part of the process is Poisson with mean lambda * 2 pi R_S h and uniform z
    on [R_E / R_S, 1].  Distances use d^2 = h^2 + 2 R_S R_E (1 - z).
    """
    r_s, r_e, h = params.sat_radius_km, params.earth_radius_km, params.altitude_km
    counts = rng.poisson(params.sat_density_per_km2 * 2.0 * math.pi * r_s * h, n)
    total = int(counts.sum())
    one_minus_z = (h / r_s) * (1.0 - rng.random(total))
    d = np.sqrt(h * h + 2.0 * r_s * r_e * one_minus_z)
    owner = np.repeat(np.arange(n), counts)
    return d, owner, counts


def _simulate_block(params, r_serv_max, n, seed_seq, association):
    rng = np.random.default_rng(seed_seq)
    d, owner, counts = _visible_distances(params, n, rng)
    fading = complex_normal(rng, len(d))
    alpha = params.pathloss_exponent
    if association == "nearest":
        nearest = np.full(n, np.inf)
        np.minimum.at(nearest, owner, d)
        serving = d == nearest[owner]
    else:
        serving = d <= r_serv_max
    amp = d[serving] ** (-0.5 * alpha) * fading[serving]
    o_s = owner[serving]
    re = np.bincount(o_s, weights=amp.real, minlength=n)
    im = np.bincount(o_s, weights=amp.imag, minlength=n)
    desired = re * re + im * im
    o_i = owner[~serving]
    interference = np.bincount(
        o_i, weights=d[~serving] ** (-alpha) * (fading[~serving].real ** 2 + fading[~serving].imag ** 2),
        minlength=n)
    g = params.link_gain
    return (desired, interference, np.bincount(o_s, minlength=n), counts,
            g * desired / (g * interference + 1.0))


def simulate_trials(params, geom, n_trials, master_seed, association="coms", workers=1):
    """Vectorised trials; ``association`` is ``'coms'`` or ``'nearest'``."""
    if n_trials < 1:
        raise EstimatorError("need at least one trial")
    if association not in ("coms", "nearest"):
        raise ValueError(f"unknown association {association!r}")
    r_serv_max = geom.r_serv_max_km if geom is not None else None
    if association == "coms" and r_serv_max is None:
        raise ValueError("joint transmission needs an elevation geometry")
    sizes = [min(BLOCK_TRIALS, n_trials - start) for start in range(0, n_trials, BLOCK_TRIALS)]
    jobs = [(params, r_serv_max, size, _block_seed(master_seed, b), association)
            for b, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _simulate_block(*job), jobs))
    else:
        parts = [_simulate_block(*job) for job in jobs]
    cols = [np.concatenate(c) for c in zip(*parts)]
    return TrialBatch(desired_power=cols[0], interference_power=cols[1],
                      serving_count=cols[2], visible_count=cols[3], sinr=cols[4])


def _check_trials(n_trials):
    if int(n_trials) != n_trials or n_trials < MIN_TRIALS:
        raise EstimatorError(f"n_trials must be an integer >= {MIN_TRIALS}, got {n_trials!r}")


def proportion(hits, empty_fraction):
    n = len(hits)
    p = float(np.count_nonzero(hits)) / n
    hw = Z95 * math.sqrt(p * (1.0 - p) / n)
    return EstimatorResult(mean=p, half_width_95=hw, n_trials=n,
                           empty_serving_fraction=empty_fraction)


def _empty_fraction(batch):
    return float(np.count_nonzero(batch.serving_count == 0)) / batch.n_trials


def coverage_from_batch(batch, gamma_th):
    return proportion(batch.sinr > gamma_th, _empty_fraction(batch))


def estimate_coverage(params, geom, gamma_th, n_trials, master_seed, workers=1):
    """Fraction of joint-transmission trials whose SINR exceeds ``gamma_th``."""
    _check_trials(n_trials)
    batch = simulate_trials(params, geom, n_trials, master_seed, "coms", workers)
    return coverage_from_batch(batch, gamma_th)


def estimate_coverage_curve(params, geom, gammas, n_trials, master_seed, workers=1):
    """Coverage at several thresholds from one shared set of trials."""
    _check_trials(n_trials)
    batch = simulate_trials(params, geom, n_trials, master_seed, "coms", workers)
    return [coverage_from_batch(batch, g) for g in gammas]


def estimate_nearest_sat_coverage(params, gamma_th, n_trials, master_seed, workers=1):
    """Coverage when only the nearest visible satellite serves.

    Trials without a visible satellite count as outage and as empty serving sets.
    """
    _check_trials(n_trials)
    batch = simulate_trials(params, None, n_trials, master_seed, "nearest", workers)
    return coverage_from_batch(batch, gamma_th)


def _mean_ci(samples):
    n = len(samples)
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1)) if n > 1 else 0.0
    return mean, Z95 * std / math.sqrt(n)


def estimate_rate_and_se(params, geom, n_trials, master_seed, workers=1):
    """(rate, SE) estimates; SE is the mean of log2(1 + SINR) per trial."""
    _check_trials(n_trials)
    batch = simulate_trials(params, geom, n_trials, master_seed, "coms", workers)
    empty = _empty_fraction(batch)
    se, se_hw = _mean_ci(np.log2(1.0 + batch.sinr))
    scale = params.bandwidth_hz / avg_uts_per_sap(params, geom.eta_rad)
    return (EstimatorResult(scale * se, scale * se_hw, n_trials, empty),
            EstimatorResult(se, se_hw, n_trials, empty))


def sample_serving_distances(params, geom, n_samples, seed, max_rounds=1000):
    """At least ``n_samples`` serving-satellite distances pooled over trials."""
    rng = make_rng(seed)
    pooled, have = [], 0
    expected = params.sat_density_per_km2 * geom.serving_cap_area_km2
    per_round = max(BLOCK_TRIALS, int(1.1 * n_samples / max(expected, 1e-12)) + 1)
    for _ in range(max_rounds):
        d, _, _ = _visible_distances(params, min(per_round, 10 ** 6), rng)
        d = d[d <= geom.r_serv_max_km]
        pooled.append(d)
        have += len(d)
        if have >= n_samples:
            break
    return np.concatenate(pooled)[:n_samples]


def coherent_desired_power(params, serving_d, n_draws, seed):
    """Desired power |sum d^(-alpha/2) h|^2 over fresh fading for fixed distances."""
    rng = make_rng(seed)
    serving_d = np.asarray(serving_d, dtype=float)
    h = complex_normal(rng, n_draws * len(serving_d)).reshape(n_draws, len(serving_d))
    amp = h @ serving_d ** (-0.5 * params.pathloss_exponent)
    return amp.real ** 2 + amp.imag ** 2
