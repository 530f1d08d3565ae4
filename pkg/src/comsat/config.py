"""Scenario configuration: a flat JSON document with documented defaults."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .errors import ParameterError
from .geometry import SystemParams

# Physical defaults reproduce the reference LEO scenario: 500 km shell,
# 5e-6 satellites and 1e-6 users per km^2, free-space exponent 2.
# link_gain and bandwidth_hz are NOT given by the source scenario.  link_gain
# is picked so that at 0 dB, eta = pi/4 the noise factor exp(-s / link_gain)
# is about 0.999 (interference limited); bandwidth only scales the rate.
DEFAULTS = {
    "earth_radius_km": 6371.393,
    "altitude_km": 500.0,
    "sat_density_per_km2": 5e-6,
    "ut_density_per_km2": 1e-6,
    "pathloss_exponent": 2.0,
    "link_gain": 1e8,
    "bandwidth_hz": 20e6,
    "elevation_deg": 30.0,
    "threshold_db_grid": None,  # None -> -50..20 dB in 1 dB steps
    "elevation_grid_deg": None,  # None -> 5..85 degrees in 5 degree steps
    "mc_trials": 10_000,
    "master_seed": 0,
    "workers": 1,
    "output_path": None,
    "output_format": "csv",
    "baseline": False,
    "zeta_lo_deg": 1.0,
    "zeta_hi_deg": 89.0,
    "tol_deg": 0.1,
    "coarse_step_deg": 1.0,
    "ks_samples": 100_000,
    "laplace_trials": 400_000,
    "fault_mc_density_scale": 1.0,  # >1 inflates the simulator's satellite density only
}

NOT_FROM_SOURCE = ("link_gain", "bandwidth_hz")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _number(key, v, positive=False):
    if not _is_number(v):
        raise ConfigError(key, f"expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(key, f"must be > 0, got {v!r}")
    return float(v)


def _integer(key, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        else:
            raise ConfigError(key, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {v!r}")
    return v


def _grid(key, v):
    if v is None:
        return None
    if not isinstance(v, list) or not v:
        raise ConfigError(key, "expected a nonempty list of numbers")
    out = [_number(key, x) for x in v]
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(key, "grid must be strictly increasing")
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    earth_radius_km: float
    altitude_km: tuple
    sat_density_per_km2: float
    ut_density_per_km2: float
    pathloss_exponent: float
    link_gain: float
    bandwidth_hz: float
    elevation_deg: float
    threshold_db_grid: tuple
    elevation_grid_deg: tuple
    mc_trials: int
    master_seed: int
    workers: int
    output_path: str | None
    output_format: str
    baseline: bool
    zeta_lo_deg: float
    zeta_hi_deg: float
    tol_deg: float
    coarse_step_deg: float
    ks_samples: int
    laplace_trials: int
    fault_mc_density_scale: float

    @classmethod
    def from_mapping(cls, doc=None):
        doc = dict(doc or {})
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        raw = {**DEFAULTS, **doc}

        alt = raw["altitude_km"]
        alts = alt if isinstance(alt, list) else [alt]
        if not alts:
            raise ConfigError("altitude_km", "empty altitude list")
        alts = tuple(_number("altitude_km", a, positive=True) for a in alts)

        thr = _grid("threshold_db_grid", raw["threshold_db_grid"])
        if thr is None:
            thr = [float(x) for x in range(-50, 21)]
        elev = _grid("elevation_grid_deg", raw["elevation_grid_deg"])
        if elev is None:
            elev = [float(x) for x in range(5, 86, 5)]
        for z in elev:
            if not 0 < z < 90:
                raise ConfigError("elevation_grid_deg", f"elevations must lie in (0, 90), got {z!r}")

        zeta = _number("elevation_deg", raw["elevation_deg"])
        if not 0 < zeta < 90:
            raise ConfigError("elevation_deg", f"must lie in (0, 90), got {zeta!r}")

        trials = _integer("mc_trials", raw["mc_trials"], 0)
        if 0 < trials < 100:
            raise ConfigError("mc_trials", f"must be 0 or >= 100, got {trials!r}")

        fmt = raw["output_format"]
        if fmt not in ("csv", "json"):
            raise ConfigError("output_format", f"must be 'csv' or 'json', got {fmt!r}")
        out = raw["output_path"]
        if out is not None and not isinstance(out, str):
            raise ConfigError("output_path", "expected a string")
        if not isinstance(raw["baseline"], bool):
            raise ConfigError("baseline", "expected true or false")

        cfg = cls(
            earth_radius_km=_number("earth_radius_km", raw["earth_radius_km"], positive=True),
            altitude_km=alts,
            sat_density_per_km2=_number("sat_density_per_km2", raw["sat_density_per_km2"], positive=True),
            ut_density_per_km2=_number("ut_density_per_km2", raw["ut_density_per_km2"], positive=True),
            pathloss_exponent=_number("pathloss_exponent", raw["pathloss_exponent"]),
            link_gain=_number("link_gain", raw["link_gain"], positive=True),
            bandwidth_hz=_number("bandwidth_hz", raw["bandwidth_hz"], positive=True),
            elevation_deg=zeta,
            threshold_db_grid=tuple(thr),
            elevation_grid_deg=tuple(elev),
            mc_trials=trials,
            master_seed=_integer("master_seed", raw["master_seed"], 0),
            workers=_integer("workers", raw["workers"], 1),
            output_path=out,
            output_format=fmt,
            baseline=raw["baseline"],
            zeta_lo_deg=_number("zeta_lo_deg", raw["zeta_lo_deg"]),
            zeta_hi_deg=_number("zeta_hi_deg", raw["zeta_hi_deg"]),
            tol_deg=_number("tol_deg", raw["tol_deg"], positive=True),
            coarse_step_deg=_number("coarse_step_deg", raw["coarse_step_deg"], positive=True),
            ks_samples=_integer("ks_samples", raw["ks_samples"], 1000),
            laplace_trials=_integer("laplace_trials", raw["laplace_trials"], 100),
            fault_mc_density_scale=_number("fault_mc_density_scale", raw["fault_mc_density_scale"],
                                           positive=True),
        )
        if not 0 < cfg.zeta_lo_deg < cfg.zeta_hi_deg < 90:
            raise ConfigError("zeta_lo_deg", "need 0 < zeta_lo_deg < zeta_hi_deg < 90")
        for a in cfg.altitude_km:
            cfg.system_params(a)  # surface parameter invariants as config errors
        return cfg

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("<document>", "top level must be a JSON object")
        return cls.from_mapping(doc)

    def system_params(self, altitude_km=None):
        altitude_km = self.altitude_km[0] if altitude_km is None else altitude_km
        try:
            return SystemParams.from_altitude(
                altitude_km,
                earth_radius_km=self.earth_radius_km,
                sat_density_per_km2=self.sat_density_per_km2,
                ut_density_per_km2=self.ut_density_per_km2,
                pathloss_exponent=self.pathloss_exponent,
                link_gain=self.link_gain,
                bandwidth_hz=self.bandwidth_hz,
            )
        except ParameterError as exc:
            raise ConfigError(exc.field, str(exc)) from exc

    def mc_system_params(self, altitude_km=None):
        params = self.system_params(altitude_km)
        if self.fault_mc_density_scale != 1.0:
            params = params.replace(
                sat_density_per_km2=params.sat_density_per_km2 * self.fault_mc_density_scale)
        return params

    def resolved(self):
        """JSON-ready dict of every key, including defaults that were omitted."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        out["not_from_source"] = list(NOT_FROM_SOURCE)
        return out

    def with_overrides(self, **changes):
        doc = {k: v for k, v in self.resolved().items() if k != "not_from_source"}
        doc.update({k: v for k, v in changes.items() if v is not None})
        return ScenarioConfig.from_mapping(doc)

