"""Command-line entry point: ``sdflow run | gen-perm | convergence``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, parse_config_text
from .convergence import PROBLEMS, study
from .driver import NumericalFailure, run
from .flow import DegenerateModelError
from .geostats import FieldSpec, generate
from .grid import Grid2D
from .integrator import StepFailure
from .io import write_snapshot
from .pressure import PressureSolveError
from .scheme import SchemeKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("sdflow")


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val
    return out


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = _overrides(args.set)
    cfg = load_config(args.config, overrides) if args.config else parse_config_text("", overrides)
    log.info("running %s %dx%d with %s to t=%g days", cfg.scenario, cfg.nx, cfg.ny, cfg.scheme, cfg.total_time)
    rec = run(cfg)
    err = rec.mass_balance_error()
    print(f"final_time={rec.final_time:.6g} steps={rec.steps} pressure_solves={rec.pressure_solves}")
    print(f"s_min={min(rec.s_min, default=cfg.initial_saturation):.10g} s_max={max(rec.s_max, default=cfg.initial_saturation):.10g}")
    print(f"mass_balance_rel_error={(err.max() if err.size else 0.0):.3e}")
    for path in rec.snapshot_files:
        print(f"snapshot {path}")
    return EXIT_OK


def _cmd_gen_perm(args: argparse.Namespace) -> int:
    try:
        spec = FieldSpec(args.nx, args.ny, args.seed, args.mean_perm, args.cv, args.spectral_exponent)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = Grid2D(args.nx, args.ny, args.dx, args.dy)
    path = write_snapshot(generate(spec, grid), 0.0, args.output)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_convergence(args: argparse.Namespace) -> int:
    sizes = tuple(int(n) for n in args.sizes.split(","))
    kinds = [SchemeKind.parse(k) for k in args.schemes.split(",")]
    for problem in args.problems.split(","):
        if problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {problem!r}")
        for kind in kinds:
            print(study(problem, kind, sizes, args.theta, args.t_end).format())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdflow", description="Two-phase waterflood simulator with central schemes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a simulation from a key = value config file")
    p.add_argument("config", nargs="?", help="config file; omitted means all defaults")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("gen-perm", help="write a log-normal permeability field as snapshot CSV")
    p.add_argument("output", type=Path)
    p.add_argument("--nx", type=int, default=256)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--dx", type=float, default=1.0)
    p.add_argument("--dy", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean-perm", type=float, default=100.0)
    p.add_argument("--cv", type=float, default=1.0)
    p.add_argument("--spectral-exponent", type=float, default=1.5)
    p.set_defaults(func=_cmd_gen_perm)

    p = sub.add_parser("convergence", help="print L1 error and rate tables for periodic advection")
    p.add_argument("--problems", default="1d,2d")
    p.add_argument("--schemes", default="SD2_2D,SD1_2D,KT_DXD")
    p.add_argument("--sizes", default="64,128,256")
    p.add_argument("--theta", type=float, default=1.8)
    p.add_argument("--t-end", type=float, default=1.0)
    p.set_defaults(func=_cmd_convergence)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, StepFailure, PressureSolveError, DegenerateModelError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
