"""Coverage probability and ergodic rate of the joint-transmission downlink.

The random serving-channel sum ``sum d^-alpha`` is replaced by its mean, which
turns the coherent desired power into an exponential variable with a fixed rate
``lambda_R``.  Coverage then factors into the Laplace transform of the
interference at ``s = lambda_R * gamma`` times a noise term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import GeometryDomainError, NoLoadError, NoServingRegionError
from .geometry import avg_uts_per_sap

ALPHA_TWO_TOL = 1e-9
# below this lower u-limit the Laplace exponent is integrated over distance
U_DOMAIN_SWITCH = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    rate_tail_eps: float = 1e-7
    rate_t_max: float = 60.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_subdivisions", "rate_tail_eps", "rate_t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.rate_tail_eps < 1:
            raise ValueError("rate_tail_eps must be < 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class CoverageResult:
    gamma_th: float
    probability: float
    laplace_value: float
    noise_factor: float


@dataclass(frozen=True)
class RateResult:
    """Spectral efficiency and rate with the bookkeeping of the outer integral."""

    spectral_efficiency: float
    rate_bps: float
    avg_uts: float
    t_cut: float
    truncation_bound: float
    quadrature_error: float


def _quad(f, a, b, quad):
    value, err = integrate.quad(f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                                limit=quad.max_subdivisions)
    return value, err


def mean_channel_sum(params, geom):
    """E[sum over serving satellites of d^-alpha], in closed form.

    Raises NoServingRegionError when the serving shell has zero width.
    """
    r_min = geom.r_serv_min_km
    r_max = geom.r_serv_max_km
    if not r_max > r_min:
        raise NoServingRegionError("serving shell is empty (eta == 0)")
    alpha = params.pathloss_exponent
    prefactor = 2.0 * math.pi * params.sat_density_per_km2 * params.sat_radius_km / params.earth_radius_km
    # log(r_max / r_min) without forming a ratio close to one
    log_ratio = math.log1p((r_max - r_min) / r_min)
    if abs(alpha - 2.0) < ALPHA_TWO_TOL:
        return prefactor * log_ratio
    k = 2.0 - alpha
    # (r_max^k - r_min^k) / k
    return prefactor * r_min ** k * math.expm1(k * log_ratio) / k


def laplace_exponent(params, geom, s, form="auto", quad=DEFAULT_QUAD):
    """Exponent E of the interference Laplace transform, L(s) = exp(-E).

    ``form='u'`` integrates the substituted variable u = s^(-2/alpha) r^2,
    ``form='r'`` integrates over distance directly; ``'auto'`` picks ``r``
    when the lower u-limit underflows the switch threshold.
    """
    if not s > 0:
        raise GeometryDomainError(f"s must be > 0, got {s!r}")
    lo, hi = geom.r_int_min_km, geom.r_int_max_km
    if not hi > lo:
        return 0.0
    alpha = params.pathloss_exponent
    ratio = params.sat_radius_km / params.earth_radius_km
    lam = params.sat_density_per_km2
    scale = s ** (-2.0 / alpha)
    u_lo, u_hi = scale * lo * lo, scale * hi * hi
    if form == "auto":
        form = "r" if u_lo < U_DOMAIN_SWITCH else "u"
    if form == "u":
        # 1 - 1/(1 + u^(-alpha/2)) == 1/(1 + u^(alpha/2))
        half = 0.5 * alpha
        value, _ = _quad(lambda u: 1.0 / (1.0 + u ** half), u_lo, u_hi, quad)
        return math.pi * lam * ratio * value / scale
    if form == "r":
        def integrand(r):
            g = s * r ** (-alpha)
            return r * g / (1.0 + g)
        value, _ = _quad(integrand, lo, hi, quad)
        return 2.0 * math.pi * lam * ratio * value
    raise ValueError(f"unknown form {form!r}")


def interference_laplace(params, geom, s, quad=DEFAULT_QUAD):
    """E[exp(-s I)] for Rayleigh-faded interferers in the visible annulus."""
    return math.exp(-laplace_exponent(params, geom, s, quad=quad))


def coverage(params, geom, gamma_th, quad=DEFAULT_QUAD):
    if not gamma_th > 0:
        raise GeometryDomainError(f"gamma_th must be > 0, got {gamma_th!r}")
    lambda_r = 1.0 / mean_channel_sum(params, geom)
    s = lambda_r * gamma_th
    lt = interference_laplace(params, geom, s, quad)
    noise = math.exp(-s / params.link_gain)
    return CoverageResult(gamma_th=gamma_th, probability=lt * noise,
                          laplace_value=lt, noise_factor=noise)


def coverage_probability(params, geom, gamma_th, quad=DEFAULT_QUAD):
    """P(SINR > gamma_th) under the mean-channel-sum approximation."""
    return coverage(params, geom, gamma_th, quad).probability


def _se_integrand(params, geom, quad):
    def f(t):
        if t <= 0:
            return 1.0
        return coverage_probability(params, geom, math.expm1(t * math.log(2.0)), quad)
    return f


def _tail_cut(f, quad):
    """Point where the decreasing integrand first drops below eps, to 1e-6 relative."""
    eps, t_max = quad.rate_tail_eps, quad.rate_t_max
    if f(t_max) >= eps:
        return t_max
    lo, hi = 0.5, 1.0
    if f(hi) >= eps:
        while hi < t_max and f(hi) >= eps:
            lo, hi = hi, 2.0 * hi
        hi = min(hi, t_max)
    else:
        # the integrand can collapse on tiny t scales when the serving cone is narrow
        while f(lo) < eps and lo > 1e-300:
            lo, hi = 0.5 * lo, lo
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) >= eps:
            lo = mid
        else:
            hi = mid
    return hi


def rate_report(params, geom, quad=DEFAULT_QUAD):
    avg_uts = avg_uts_per_sap(params, geom.eta_rad)
    f = _se_integrand(params, geom, quad)
    f(1.0)  # surfaces NoServingRegionError before any integration
    t_cut = _tail_cut(f, quad)
    se, err = _quad(f, 0.0, t_cut, quad)
    if not (avg_uts > 0 and math.isfinite(params.bandwidth_hz / avg_uts)):
        raise NoLoadError(f"average users per satellite underflowed ({avg_uts!r})")
    return RateResult(
        spectral_efficiency=se,
        rate_bps=params.bandwidth_hz / avg_uts * se,
        avg_uts=avg_uts,
        t_cut=t_cut,
        truncation_bound=quad.rate_tail_eps * quad.rate_t_max,
        quadrature_error=err,
    )


def spectral_efficiency(params, geom, quad=DEFAULT_QUAD):
    """E[log2(1 + SINR)] in bit/s/Hz, before the bandwidth is shared."""
    return rate_report(params, geom, quad).spectral_efficiency


def ergodic_rate(params, geom, quad=DEFAULT_QUAD):
    """Per-user rate in bit/s: bandwidth over average load times the SE."""
    return rate_report(params, geom, quad).rate_bps
