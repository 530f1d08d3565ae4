"""Command-line front end.

    comsat coverage --config scenario.json --out coverage.csv --baseline
    comsat rate     --config scenario.json --out rate.csv
    comsat optimize --config scenario.json --out optimum.json
    comsat validate --config scenario.json --out validation.json

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import validation
from .config import ConfigError, ScenarioConfig
from .errors import ComsatError
from .geometry import eta_from_elevation_deg
from .sweep import SweepPointError, SweepSpec, optimize_elevation, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

COVERAGE_COLUMNS = ("threshold_db", "analytic_cov", "mc_cov", "mc_ci95", "baseline_cov",
                    "empty_serving_frac")
RATE_COLUMNS = ("elevation_deg", "analytic_rate", "analytic_se", "mc_rate", "mc_se", "mc_ci95")


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _config_json(cfg, command):
    return json.dumps({"command": command, **cfg.resolved()}, sort_keys=True, separators=(",", ":"))


def render(rows, columns, cfg, command, fmt):
    if fmt == "json":
        doc = {"command": command, "config": json.loads(_config_json(cfg, command)),
               "rows": [{c: (None if r[c] is None or (isinstance(r[c], float) and math.isnan(r[c]))
                             else r[c]) for c in columns} for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# comsat {command}\n")
    buf.write(f"# config: {_config_json(cfg, command)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_path(cfg, command):
    if cfg.output_path:
        return Path(cfg.output_path)
    ext = "json" if command in ("optimize", "validate") else cfg.output_format
    return Path(f"comsat_{command}.{ext}")


def _altitude_path(path, altitude):
    return path.with_name(f"{path.stem}_alt{altitude:g}{path.suffix}")


def cmd_coverage(cfg):
    params = cfg.system_params()
    spec = SweepSpec(base_params=params, variable="threshold_db", grid=cfg.threshold_db_grid,
                     mc_trials=cfg.mc_trials, master_seed=cfg.master_seed, metric="coverage",
                     elevation_deg=cfg.elevation_deg, baseline=cfg.baseline and cfg.mc_trials > 0,
                     workers=cfg.workers, mc_params=cfg.mc_system_params())
    curve = run_sweep(spec)
    rows = [{"threshold_db": p.x, "analytic_cov": p.analytic, "mc_cov": p.mc_mean,
             "mc_ci95": p.mc_half_width, "baseline_cov": p.extras.get("baseline"),
             "empty_serving_frac": p.empty_serving_fraction} for p in curve.rows]
    path = _out_path(cfg, "coverage")
    write_atomic(path, render(rows, COVERAGE_COLUMNS, cfg, "coverage", cfg.output_format))
    return [path]


def cmd_rate(cfg):
    base = _out_path(cfg, "rate")
    paths = []
    for alt in cfg.altitude_km:
        spec = SweepSpec(base_params=cfg.system_params(alt), variable="elevation_deg",
                         grid=cfg.elevation_grid_deg, mc_trials=cfg.mc_trials,
                         master_seed=cfg.master_seed, metric="rate", workers=cfg.workers,
                         mc_params=cfg.mc_system_params(alt))
        curve = run_sweep(spec)
        rows = [{"elevation_deg": p.x, "analytic_rate": p.extras["analytic_rate"],
                 "analytic_se": p.extras["analytic_se"], "mc_rate": p.extras.get("mc_rate"),
                 "mc_se": p.extras.get("mc_se"), "mc_ci95": p.extras.get("mc_rate_half_width")}
                for p in curve.rows]
        path = base if len(cfg.altitude_km) == 1 else _altitude_path(base, alt)
        write_atomic(path, render(rows, RATE_COLUMNS, cfg, "rate", cfg.output_format))
        paths.append(path)
    return paths


def cmd_optimize(cfg):
    results = []
    for alt in cfg.altitude_km:
        opt = optimize_elevation(cfg.system_params(alt), cfg.zeta_lo_deg, cfg.zeta_hi_deg,
                                 cfg.tol_deg, cfg.coarse_step_deg)
        results.append({"altitude_km": alt, "zeta_star_deg": opt.zeta_deg,
                        "rate_star_bps": opt.rate_bps, "bracket_deg": list(opt.bracket),
                        "search_range_deg": [cfg.zeta_lo_deg, cfg.zeta_hi_deg],
                        "iterations": opt.iterations, "flat_objective": opt.flat})
    doc = {"command": "optimize", "config": json.loads(_config_json(cfg, "optimize")),
           "results": results}
    path = _out_path(cfg, "optimize")
    write_atomic(path, json.dumps(doc, indent=2) + "\n")
    return [path]


def cmd_validate(cfg):
    if cfg.mc_trials < 100:
        raise ConfigError("mc_trials", "validation needs at least 100 trials")
    params = cfg.system_params()
    eta = eta_from_elevation_deg(cfg.elevation_deg)
    checks = validation.run_suite(params, eta, n_trials=cfg.mc_trials, master_seed=cfg.master_seed,
                                  ks_samples=cfg.ks_samples, laplace_trials=cfg.laplace_trials,
                                  mc_params=cfg.mc_system_params(), workers=cfg.workers,
                                  thresholds_db=cfg.threshold_db_grid)
    for c in checks:
        print(c.line())
    doc = {"command": "validate", "config": json.loads(_config_json(cfg, "validate")),
           "all_passed": all(c.passed for c in checks), "checks": [c.as_dict() for c in checks]}
    path = _out_path(cfg, "validate")
    write_atomic(path, json.dumps(doc, indent=2) + "\n")
    return [path], doc["all_passed"]


COMMANDS = {"coverage": cmd_coverage, "rate": cmd_rate, "optimize": cmd_optimize,
            "validate": cmd_validate}


def build_parser():
    parser = argparse.ArgumentParser(prog="comsat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "coverage": "coverage probability against SINR threshold",
        "rate": "per-user rate and spectral efficiency against elevation angle",
        "optimize": "elevation angle that maximises the analytic per-user rate",
        "validate": "cross-check closed forms against the simulator",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="scenario JSON file (defaults apply to omitted keys)")
        p.add_argument("--out", help="output path (overrides output_path)")
        p.add_argument("--seed", type=int, help="master seed (overrides master_seed)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (overrides mc_trials)")
        p.add_argument("--baseline", action="store_true", default=None,
                       help="add the nearest-satellite baseline column")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig.from_mapping({})
        cfg = cfg.with_overrides(output_path=args.out, master_seed=args.seed,
                                 mc_trials=args.trials, baseline=args.baseline)
        result = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComsatError, SweepPointError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "validate":
        paths, ok = result
        for p in paths:
            print(f"wrote {p}")
        return EXIT_OK if ok else EXIT_VALIDATION
    for p in result:
        print(f"wrote {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
