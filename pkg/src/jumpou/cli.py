"""Command-line front end.

    jumpou --config run.json exit --x 0.5 --level 0 --direction down --r 1
    jumpou --config run.json occupation --b 0 --s 1 --omega 0.5 --theta-T 0.3 --x-grid -1:1:21
    jumpou --config run.json psi-table --r 1 --z-grid -5:5:41
    jumpou --config run.json validate --n-paths 100000 --seed 7

Data goes to stdout, diagnostics to stderr. Exit status is 0 on success, 1 on
a numerical failure (or a failed validation) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .config import RunConfig
from .errors import DegenerateSystemError, DomainError, QuadratureError
from .exit import downward_exit, upward_exit
from .mc.sim import SimConfig
from .mc.validate import report_json, run_validation
from .occupation import OccupationQuery, solve_occupation, v_curve, v_eval
from .psi import psi_table

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

# Canonical query used by `validate` when the config has no occupation section.
DEFAULT_QUERY = OccupationQuery(b=0.0, s=1.0, omega=0.5, theta_T=0.3)


class UsageError(Exception):
    pass


def parse_grid(spec: str) -> np.ndarray:
    """``"lo:hi:n"`` -> ``n`` evenly spaced points."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid spec must be lo:hi:n, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid spec {spec!r}: {exc}") from None
    if n < 1:
        raise UsageError(f"grid needs n >= 1, got {n}")
    return np.linspace(lo, hi, n)


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--config", default=default, help="JSON run configuration (required)")
    p.add_argument("--seed", type=int, default=default, help="override the simulation seed")
    p.add_argument("--quiet", action="store_true", default=default, help="suppress diagnostics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jumpou", description=__doc__.splitlines()[0])
    _global_flags(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        _global_flags(p, argparse.SUPPRESS)
        return p

    p = add("exit", "one-sided exit transform")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--direction", choices=("down", "up"), required=True)
    p.add_argument("--r", "--rate", dest="r", type=float, required=True)
    p.add_argument("--penalty", type=float, default=0.0, help="overshoot penalty (xi or rho)")

    p = add("occupation", "joint occupation-time / terminal-value transform")
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--theta-T", dest="theta_T", type=float, required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--x", type=float)
    where.add_argument("--x-grid", help="lo:hi:n")

    p = add("psi-table", "|psi_r| and its ODE residual on a grid")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--z-grid", required=True, help="lo:hi:n")

    p = add("validate", "Monte Carlo oracle suite")
    p.add_argument("--n-paths", type=int)
    p.add_argument("--workers", type=int)
    return parser


def _log(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def cmd_exit(args, cfg: RunConfig) -> int:
    fn = downward_exit if args.direction == "down" else upward_exit
    res = fn(cfg.model, args.x, args.level, args.r, args.penalty, cfg.quadrature)
    print(json.dumps(res.as_dict()))
    return EXIT_OK


def cmd_occupation(args, cfg: RunConfig) -> int:
    query = OccupationQuery(args.b, args.s, args.omega, args.theta_T)
    sol = solve_occupation(cfg.model, query, cfg.quadrature)
    _log(args, f"condition estimate {sol.condition_estimate:.3g}, residual {sol.residual:.3g}")
    if args.x is not None:
        record = {
            "x": args.x,
            "V": v_eval(sol, args.x),
            "coeffs": list(sol.coeffs),
            "condition_estimate": sol.condition_estimate,
        }
        print(json.dumps(record))
        return EXIT_OK
    rows = v_curve(sol, parse_grid(args.x_grid))
    out = ["x,V"] + [f"{x:.15g},{v:.15g}" for x, v in rows]
    print("\n".join(out))
    return EXIT_OK


def cmd_psi_table(args, cfg: RunConfig) -> int:
    rows = psi_table(cfg.model, args.r, parse_grid(args.z_grid))
    print("\n".join(["z,psi,ode_residual"] + [f"{z:.15g},{p:.15g},{e:.3e}" for z, p, e in rows]))
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    sim = cfg.simulation or SimConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.n_paths is not None:
        changes["n_paths"] = args.n_paths
    if args.workers is not None:
        changes["workers"] = args.workers
    sim = sim.replace(**changes)
    query = cfg.occupation or DEFAULT_QUERY
    start = time.perf_counter()
    report = run_validation(cfg.model, query, sim, cfg.quadrature)
    _log(args, f"validate: {len(report['checks'])} checks in {time.perf_counter() - start:.1f} s")
    print(report_json(report))
    return EXIT_OK if report["all_pass"] else EXIT_NUMERICAL


COMMANDS = {"exit": cmd_exit, "occupation": cmd_occupation, "psi-table": cmd_psi_table, "validate": cmd_validate}


_GRID_FLAGS = ("--x-grid", "--z-grid")


def _glue_grid_values(argv: list[str]) -> list[str]:
    # "--x-grid -1:1:5" would read -1:1:5 as an option; bind it explicitly.
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _GRID_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_grid_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.config is None:
        parser.print_usage(sys.stderr)
        print("jumpou: error: --config is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = RunConfig.load(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"jumpou: error: bad config {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg)
    except (UsageError, DomainError) as exc:
        print(f"jumpou: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, DegenerateSystemError) as exc:
        print(f"jumpou: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"jumpou: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
