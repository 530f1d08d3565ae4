"""Spherical geometry of a typical user served by every satellite in its cone.

The user sits at the north pole of the earth sphere (radius ``R_E``); satellites
live on a concentric sphere of radius ``R_S``.  The serving cone has half-angle
``eta`` about the user's zenith, so the elevation angle is ``zeta = pi/2 - eta``.

Several textbook expressions subtract nearly equal quantities when the orbit
altitude is small compared to the earth radius.  They are evaluated here in
algebraically equivalent cancellation-free forms; the literal forms are kept in
the test suite as cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateGeometryError, GeometryDomainError, ParameterError

EARTH_RADIUS_KM = 6371.393
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Constellation and link-budget scalars, in km and per-km^2 units.

    ``link_gain`` is the composite transmit power x antenna gain x reference
    path loss over the noise variance, with distances in km.
    """

    earth_radius_km: float = EARTH_RADIUS_KM
    sat_radius_km: float = EARTH_RADIUS_KM + 500.0
    sat_density_per_km2: float = 5e-6
    ut_density_per_km2: float = 1e-6
    pathloss_exponent: float = 2.0
    link_gain: float = 1e8
    bandwidth_hz: float = 20e6

    def __post_init__(self):
        for name in ("earth_radius_km", "sat_radius_km", "sat_density_per_km2",
                     "ut_density_per_km2", "link_gain", "bandwidth_hz"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(name, f"must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.pathloss_exponent) and self.pathloss_exponent >= 2):
            raise ParameterError("pathloss_exponent",
                                 f"must be >= 2, got {self.pathloss_exponent!r}")
        if not self.sat_radius_km > self.earth_radius_km:
            raise ParameterError("sat_radius_km",
                                 "satellite sphere must lie outside the earth")

    @classmethod
    def from_altitude(cls, altitude_km=500.0, earth_radius_km=EARTH_RADIUS_KM, **kwargs):
        if not (math.isfinite(altitude_km) and altitude_km > 0):
            raise ParameterError("altitude_km", f"must be finite and > 0, got {altitude_km!r}")
        return cls(earth_radius_km=earth_radius_km,
                   sat_radius_km=earth_radius_km + altitude_km, **kwargs)

    @property
    def altitude_km(self):
        return self.sat_radius_km - self.earth_radius_km

    @property
    def radius_sq_diff(self):
        """R_S^2 - R_E^2, formed without cancellation."""
        return self.altitude_km * (self.sat_radius_km + self.earth_radius_km)

    def replace(self, **changes):
        return replace(self, **changes)

    def with_altitude(self, altitude_km):
        if not (math.isfinite(altitude_km) and altitude_km > 0):
            raise ParameterError("altitude_km", f"must be finite and > 0, got {altitude_km!r}")
        return replace(self, sat_radius_km=self.earth_radius_km + altitude_km)


def _check_eta(eta):
    eta = float(eta)
    if not (0.0 <= eta <= HALF_PI):
        raise GeometryDomainError(f"eta must lie in [0, pi/2], got {eta!r}")
    return eta


def _cos_sin(eta):
    # exact endpoints: cos(pi/2) in floating point is 6e-17, not 0
    if eta == HALF_PI:
        return 0.0, 1.0
    if eta == 0.0:
        return 1.0, 0.0
    return math.cos(eta), math.sin(eta)


def _radical(params, cos_eta):
    """sqrt(R_S^2 - R_E^2 sin^2 eta) written as sqrt((R_S^2 - R_E^2) + (R_E cos eta)^2)."""
    c = params.earth_radius_km * cos_eta
    return math.sqrt(params.radius_sq_diff + c * c)


def max_serving_distance(params, eta):
    """Largest user-satellite distance inside the cone of half-angle ``eta``."""
    eta = _check_eta(eta)
    cos_eta, _ = _cos_sin(eta)
    c = params.earth_radius_km * cos_eta
    # sqrt(A + c^2) - c == A / (sqrt(A + c^2) + c)
    return params.radius_sq_diff / (_radical(params, cos_eta) + c)


def _shell_gap(params, eta):
    """(R_S - R_E) - r_max cos(eta), i.e. half the CDF denominator over R_E.

    Equals h * A * sin^2(eta) / ((X + R_E cos eta) (X + R_S cos eta)) with
    h = R_S - R_E, A = R_S^2 - R_E^2 and X the radical.
    """
    cos_eta, sin_eta = _cos_sin(eta)
    x = _radical(params, cos_eta)
    a = params.radius_sq_diff
    return (params.altitude_km * a * sin_eta * sin_eta
            / ((x + params.earth_radius_km * cos_eta) * (x + params.sat_radius_km * cos_eta)))


def serving_cdf_denominator(params, eta):
    """2 R_E (R_S - R_E sin^2 eta - sqrt(R_S^2 - R_E^2 sin^2 eta) cos eta).

    Shared by the CDF, the PDF and the user-load formula.  It equals
    ``r_max**2 - (R_S - R_E)**2`` and vanishes at eta == 0.
    """
    eta = _check_eta(eta)
    return 2.0 * params.earth_radius_km * _shell_gap(params, eta)


def serving_distance_cdf(params, eta, d):
    """CDF of the distance from the user to a uniformly chosen serving satellite.

    At ``eta == 0`` the serving shell is the zenith point and the CDF is a unit
    step at ``R_S - R_E``.
    """
    eta = _check_eta(eta)
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0) or np.any(np.isnan(d_arr)):
        raise GeometryDomainError("distance must be >= 0")
    h = params.altitude_km
    r_max = max_serving_distance(params, eta)
    den = serving_cdf_denominator(params, eta)
    if den == 0.0:
        out = np.where(d_arr >= h, 1.0, 0.0)
    else:
        mid = (d_arr - h) * (d_arr + h) / den
        out = np.where(d_arr < h, 0.0, np.where(d_arr >= r_max, 1.0, np.clip(mid, 0.0, 1.0)))
    return out if out.ndim else float(out)


def serving_distance_pdf(params, eta, d):
    """Density of the serving-satellite distance; zero off the support."""
    eta = _check_eta(eta)
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0) or np.any(np.isnan(d_arr)):
        raise GeometryDomainError("distance must be >= 0")
    den = serving_cdf_denominator(params, eta)
    if den == 0.0:
        raise DegenerateGeometryError("eta == 0: the serving distance is a point mass")
    h = params.altitude_km
    r_max = max_serving_distance(params, eta)
    inside = (d_arr >= h) & (d_arr <= r_max)
    out = np.where(inside, 2.0 * d_arr / den, 0.0)
    return out if out.ndim else float(out)


def lowest_serving_altitude(params, eta):
    """Altitude of the lowest point of the serving cone on the satellite sphere."""
    eta = _check_eta(eta)
    if eta == HALF_PI:
        return 0.0
    cos_eta, _ = _cos_sin(eta)
    r_e = params.earth_radius_km
    a = params.radius_sq_diff
    # cos^2(eta) * (sqrt(R_E^2 + A / cos^2 eta) - R_E) rationalised
    return a / (math.sqrt(r_e * r_e + a / (cos_eta * cos_eta)) + r_e)


def service_cap_height(params, eta):
    """Height of the earth cap whose users see a given satellite inside their cone."""
    eta = _check_eta(eta)
    return params.earth_radius_km * _shell_gap(params, eta) / params.sat_radius_km


def avg_uts_per_sap(params, eta):
    """Mean number of users inside one satellite's service cap."""
    h_cap = service_cap_height(params, eta)
    return 2.0 * math.pi * params.earth_radius_km * params.ut_density_per_km2 * h_cap


def cap_area(params, r):
    """Area of the satellite-sphere cap within distance ``r`` of the user.

    Valid for ``R_S - R_E <= r <= R_S + R_E``; the upper end is the full sphere.
    """
    r_arr = np.asarray(r, dtype=float)
    h = params.altitude_km
    top = params.sat_radius_km + params.earth_radius_km
    if np.any(r_arr < h) or np.any(r_arr > top) or np.any(np.isnan(r_arr)):
        raise GeometryDomainError(f"cap radius must lie in [{h}, {top}] km")
    out = math.pi * params.sat_radius_km * (r_arr - h) * (r_arr + h) / params.earth_radius_km
    return out if out.ndim else float(out)


def cap_area_density(params, r):
    """d|A_r|/dr = 2 pi r R_S / R_E."""
    return 2.0 * math.pi * np.asarray(r, dtype=float) * params.sat_radius_km / params.earth_radius_km


@dataclass(frozen=True)
class ElevationGeometry:
    eta_rad: float
    r_serv_min_km: float
    r_serv_max_km: float
    r_int_min_km: float
    r_int_max_km: float
    lowest_alt_km: float
    serving_cap_area_km2: float = field(repr=False)
    visible_cap_area_km2: float = field(repr=False)

    @classmethod
    def from_eta(cls, params, eta):
        eta = _check_eta(eta)
        r_max = max_serving_distance(params, eta)
        horizon = math.sqrt(params.radius_sq_diff)
        if eta == HALF_PI:
            # the cone reaches the horizon; keep the annulus exactly empty
            r_max = horizon
        return cls(
            eta_rad=eta,
            r_serv_min_km=params.altitude_km,
            r_serv_max_km=r_max,
            r_int_min_km=r_max,
            r_int_max_km=horizon,
            lowest_alt_km=lowest_serving_altitude(params, eta),
            serving_cap_area_km2=math.pi * params.sat_radius_km
            * serving_cdf_denominator(params, eta) / params.earth_radius_km,
            visible_cap_area_km2=2.0 * math.pi * params.sat_radius_km * params.altitude_km,
        )

    @classmethod
    def from_elevation_deg(cls, params, zeta_deg):
        return cls.from_eta(params, eta_from_elevation_deg(zeta_deg))

    @property
    def zeta_deg(self):
        return 90.0 - math.degrees(self.eta_rad)


def eta_from_elevation_deg(zeta_deg):
    zeta_deg = float(zeta_deg)
    if not (0.0 <= zeta_deg <= 90.0):
        raise GeometryDomainError(f"elevation must lie in [0, 90] degrees, got {zeta_deg!r}")
    if zeta_deg == 0.0:
        return HALF_PI
    return math.radians(90.0 - zeta_deg)


def elevation_geometry(params, eta):
    return ElevationGeometry.from_eta(params, eta)
