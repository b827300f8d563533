"""Command-line entry point ``phonoline``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config, coupling, runner
from .hilbert import StateValidationError
from .lindblad import IntegrationError, SteadyStateError, TruncationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("phonoline")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoline",
        description="Phonon-line quantum state generation: scenarios, sweeps and coupling extraction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a built-in scenario or a config file")
    run.add_argument("scenario", help="scenario name (see 'list') or path to a TOML config")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--samples", type=_positive_int,
                     help="override the number of time samples (or sweep points per axis)")
    run.add_argument("--truncation", type=int, help="override the phonon Fock cutoff d")
    run.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")

    sweep = sub.add_parser("sweep", help="run a two-axis sweep config")
    sweep.add_argument("config", help="scenario name or TOML config of kind 'sweep'")
    sweep.add_argument("--out", default=".")
    sweep.add_argument("--samples", type=_positive_int, help="points per axis")
    sweep.add_argument("--truncation", type=int)
    sweep.add_argument("--threads", type=int, default=1)

    sub.add_parser("list", help="list built-in scenarios")

    ex = sub.add_parser("extract-coupling", help="project excited-state forces onto phonon modes")
    ex.add_argument("--forces", required=True, help="text file with one 'fx fy fz' row per atom")
    ex.add_argument("--modes", required=True, help="mode file with '# frequencies:' header")
    ex.add_argument("--lattice", type=float, default=2.5, help="lattice constant in angstrom")
    ex.add_argument("--select-label", help="only report modes carrying this label")
    ex.add_argument("--out", help="CSV path (default: stdout)")
    return parser


def _list() -> int:
    for name in config.scenario_names():
        try:
            desc = config.load_scenario(name).description
        except config.ConfigError as exc:
            desc = f"(invalid: {exc})"
        print(f"{name:<18}{desc}")
    return EXIT_OK


def _run(args, require_sweep: bool = False) -> int:
    cfg = config.load_scenario(args.scenario if not require_sweep else args.config,
                               samples=args.samples, truncation=args.truncation)
    if require_sweep and cfg.kind != "sweep":
        raise config.ConfigError(f"{cfg.name} is a {cfg.kind} scenario; use 'phonoline run'")
    paths, summary = runner.run_scenario(cfg, args.out, threads=max(1, args.threads))
    for p in paths:
        print(f"wrote {p}")
    for key, value in summary.items():
        print(f"{key} = {value}")
    if summary.get("failures"):
        print(f"warning: {summary['failures']} sweep cell(s) failed and were written as nan",
              file=sys.stderr)
    return EXIT_OK


def _extract(args) -> int:
    rows = coupling.extract_couplings(coupling.read_forces(args.forces),
                                      coupling.read_modes(args.modes),
                                      args.lattice, args.select_label)
    header = ["mode", "frequency_meV", "g_meVA", "abs_g_meVA", "g_meV"]
    if args.out:
        runner.write_pairs(Path(args.out), header, rows)
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in (None, "list"):
            return _list()
        if args.command == "run":
            return _run(args)
        if args.command == "sweep":
            return _run(args, require_sweep=True)
        return _extract(args)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, IntegrationError, SteadyStateError, StateValidationError,
            FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # remaining ValueErrors come from inconsistent inputs (bad mode files,
        # observables that do not fit the system size)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
