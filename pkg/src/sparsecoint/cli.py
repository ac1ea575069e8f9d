"""Command-line front end: simulate, detect, montecarlo.

Exit codes are a stable contract:

    0   success (for ``detect``: verdict cointegrated)
    3   ``detect`` verdict spurious, so shell pipelines can branch on the
        outcome without parsing output
    2   usage, configuration, or input-format errors
    1   runtime or I/O errors (and ``montecarlo`` runs with invalid cells)

The default output location can be set with the ``SPARSECOINT_OUTPUT_DIR``
environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

from ._version import __version__
from .dgp import save_dataset_csv, save_dataset_metadata, simulate, load_dataset_csv
from .errors import ConfigFieldError, CsvFormatError, SparseCointError
from .harness import render_tables, run_grid, write_manifest
from .kvconfig import load_dgp_config, load_experiment_grid, pipeline_from_options
from .pipeline import detect, format_record
from .stationarity import Verdict

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_SPURIOUS = 3


def _default_output_dir() -> str:
    return os.environ.get("SPARSECOINT_OUTPUT_DIR", ".")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsecoint",
        description="Two-step sparse cointegration detector and Monte Carlo harness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a dataset from a config file")
    sim.add_argument("config", help="key-value simulation config")
    sim.add_argument("--output", default=None, help="output CSV path (default: dataset.csv)")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")

    det = sub.add_parser("detect", help="run the two-step detector on a dataset CSV")
    det.add_argument("data", help="CSV with header y,x1,...,xp")
    det.add_argument("--gamma", type=float, default=None, help="adaptive weight exponent")
    det.add_argument("--grid-scale", type=float, default=None,
                     help="override the penalty-grid scale (absolute, replaces the per-n default)")
    det.add_argument("--residual-mode", choices=["direct", "post-ols"], default=None)
    det.add_argument("--kmax", type=int, default=None, help="lag-order upper bound")
    det.add_argument("--penalty", choices=["bic", "sqrt-n"], default=None,
                     help="penalty rule for the stationarity criteria")

    mc = sub.add_parser("montecarlo", help="run a Monte Carlo grid and write table CSVs")
    mc.add_argument("config", help="key-value grid config")
    mc.add_argument("--output", default=None, help="output directory (default: $SPARSECOINT_OUTPUT_DIR)")
    mc.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    return parser


def _cmd_simulate(args) -> int:
    try:
        config = load_dgp_config(args.config)
        if args.seed is not None:
            from dataclasses import replace

            config = replace(config, seed=args.seed)
    except ConfigFieldError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = args.output or os.path.join(_default_output_dir(), "dataset.csv")
    try:
        dataset = simulate(config)
        save_dataset_csv(dataset, out)
        save_dataset_metadata(config, os.path.splitext(out)[0] + ".meta")
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {dataset.n} rows, {dataset.p} covariates to {out}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    try:
        dataset = load_dataset_csv(args.data)
    except CsvFormatError as exc:
        where = f" (row {exc.row}" + (f", column {exc.col})" if exc.col else ")") if exc.row else ""
        print(f"input error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read data: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        config = pipeline_from_options(
            gamma=args.gamma,
            grid_scale=args.grid_scale,
            residual_mode=args.residual_mode,
            kmax=args.kmax,
            penalty=args.penalty,
        )
        result = detect(dataset, config)
    except (ValueError, ConfigFieldError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SparseCointError as exc:
        stage = f" [stage: {exc.stage}]" if exc.stage else ""
        print(f"detection failed{stage}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(format_record(result))
    return EXIT_OK if result.verdict is Verdict.COINTEGRATED else EXIT_SPURIOUS


def _cmd_montecarlo(args) -> int:
    try:
        grid = load_experiment_grid(args.config)
    except ConfigFieldError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out_dir = args.output or _default_output_dir()
    os.makedirs(out_dir, exist_ok=True)

    total = len(grid.cells())
    done = [0]

    def progress(res):
        done[0] += 1
        c = res.cell
        print(
            f"cell {done[0]}/{total} n={c.n} p={c.p} rho={c.rho:g} gamma={c.gamma:g} "
            f"[{res.preset}]: fpr=%.3f fnr=%.3f i0=%.3f (%.1fs)"
            % (res.mean_fpr, res.mean_fnr, res.freq_i0, res.wall_time),
            flush=True,
        )

    try:
        results = run_grid(grid, jobs=args.jobs, progress=progress)
        render_tables(results, out_dir)
        write_manifest(grid, results, out_dir)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    invalid = [r for r in results if not r.valid]
    if invalid:
        print(f"{len(invalid)} cell(s) flagged invalid (>1% failed replications)", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote tables for {total} cell(s) to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "detect":
        return _cmd_detect(args)
    return _cmd_montecarlo(args)


if __name__ == "__main__":
    sys.exit(main())
