"""Command-line interface.

Three subcommands::

    signvar run --config run.json      estimate, sample, write artifacts
    signvar toy-sweep --out sweep.csv  circle-arc cost comparison
    signvar diagnose --draws draws.bin recompute diagnostics from a file

Classified failures exit with stable codes: 2 config, 3 data,
4 infeasible restrictions, 5 numerical failure. Anything else is a bug
and surfaces as a traceback.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._version import __version__
from .config import load_run_config
from .diagnostics import compute_diagnostics, impact_functional
from .errors import (
    ConfigError,
    DataError,
    InfeasibleError,
    NumericalError,
    SignvarError,
)
from .pipeline import execute_run
from .storage import read_draws, write_json, write_sweep_csv
from .toy import baseline_arc_length, sweep_arc_grid, worker_count_from_env

EXIT_CODES = (
    (ConfigError, 2),
    (DataError, 3),
    (InfeasibleError, 4),
    (NumericalError, 5),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signvar",
        description="Posterior sampling for sign-restricted structural VARs.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one estimation from a JSON config")
    run.add_argument("--config", required=True, help="path to the run config JSON")

    sweep = sub.add_parser(
        "toy-sweep", help="compare sampler costs across circle-arc lengths"
    )
    sweep.add_argument("--out", default="toy_sweep.csv", help="output CSV path")
    sweep.add_argument(
        "--grid",
        default=None,
        help="explicit comma-separated arc lengths (overrides the range flags)",
    )
    sweep.add_argument("--grid-min", type=float, default=1e-4)
    sweep.add_argument(
        "--grid-max",
        type=float,
        default=None,
        help="largest arc length (default: the baseline restriction arc)",
    )
    sweep.add_argument("--grid-points", type=int, default=30)
    sweep.add_argument(
        "--steps", type=int, default=20_000, help="slice updates per arc"
    )
    sweep.add_argument(
        "--accepted",
        type=int,
        default=200,
        help="accepted draws per arc for the Monte Carlo trial count",
    )
    sweep.add_argument("--seed", type=int, default=0)

    diag = sub.add_parser(
        "diagnose", help="recompute efficiency diagnostics from a draws file"
    )
    diag.add_argument("--draws", required=True, help="path to a draws file")
    diag.add_argument("--batch-size", type=int, default=100)
    diag.add_argument(
        "--out", default=None, help="also write the report JSON to this path"
    )
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    result = execute_run(config)
    print(f"stored draws: {len(result.draws)} ({result.draws.algorithm})")
    if result.stats is not None:
        print(
            f"proposals: {result.stats.proposals} "
            f"(acceptance rate {result.stats.acceptance_rate:.3g})"
        )
    if result.report is not None:
        print(
            f"effective sample size: {result.report.mess:.1f} "
            f"(draws per iid {result.report.draws_per_iid:.2f})"
        )
    for path in (result.draws_path, result.summary_path, result.diagnostics_path):
        print(f"wrote {path}")
    return 0


def _cmd_toy_sweep(args: argparse.Namespace) -> int:
    if args.grid is not None:
        try:
            lengths = np.array([float(v) for v in args.grid.split(",") if v.strip()])
        except ValueError as exc:
            raise ConfigError(f"--grid: {exc}") from exc
        if lengths.size == 0:
            raise ConfigError("--grid: no arc lengths given")
    else:
        top = args.grid_max if args.grid_max is not None else baseline_arc_length()
        if args.grid_points < 1:
            raise ConfigError("--grid-points must be >= 1")
        if not 0.0 < args.grid_min <= top:
            raise ConfigError("--grid-min must be in (0, grid-max]")
        lengths = np.geomspace(args.grid_min, top, args.grid_points)
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    if args.accepted < 1:
        raise ConfigError("--accepted must be >= 1")
    try:
        rows = sweep_arc_grid(
            lengths,
            steps=args.steps,
            accepted=args.accepted,
            seed=args.seed,
            workers=worker_count_from_env(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_sweep_csv(args.out, rows)
    print(f"wrote {args.out} ({len(rows)} arc lengths)")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    if args.batch_size < 1:
        raise ConfigError("--batch-size must be >= 1")
    draws, header = read_draws(args.draws)
    shocks = header.get("identified_shocks") or list(range(header["n"]))
    try:
        functional = impact_functional(draws, tuple(shocks))
        report = compute_diagnostics(functional, batch_size=args.batch_size)
    except ValueError as exc:
        raise DataError(f"{args.draws}: {exc}") from exc
    payload = {
        "source": args.draws,
        "algorithm": draws.algorithm,
        "functional": {
            "kind": "impact_responses",
            "shocks": list(shocks),
            "dim": functional.shape[1],
        },
        "report": report.to_dict(),
        "signvar_version": __version__,
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.out is not None:
        write_json(args.out, payload)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "toy-sweep":
            return _cmd_toy_sweep(args)
        return _cmd_diagnose(args)
    except SignvarError as exc:
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
