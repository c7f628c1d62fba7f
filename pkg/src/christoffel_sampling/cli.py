"""Command-line entry point.

Subcommands:
  run <config.json>   run experiments described in a JSON config
  preset <name>       run a built-in preset
  bound --d --p --kn  print the suboptimality bound value
  list-presets        list preset names and their experiment ids

Exit codes: 0 success, 1 invalid config/usage, 2 output I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .exceptions import ChristoffelError, ConfigError
from .harness import load_config, run_experiment
from .metrics import gamma_bound
from .presets import DEFAULT_REPS, DEFAULT_SEED, PRESET_NAMES, preset_specs

USAGE = """usage: christoffel-sampling <command> [options]

commands:
  run <config.json> [--out DIR] [--seed S] [--reps R] [--jobs J]
  preset <name> [--out DIR] [--seed S] [--reps R] [--jobs J]
  bound --d D --p P --kn KN
  list-presets
"""


def _default_jobs() -> int:
    raw = os.environ.get("CHRISTOFFEL_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override seed")
    parser.add_argument("--reps", type=int, default=None, help="override repetitions")
    parser.add_argument("--jobs", type=int, default=_default_jobs(), help="worker count")


def _apply_overrides(specs, seed, reps):
    import dataclasses

    out = []
    for spec in specs:
        if seed is not None:
            spec = dataclasses.replace(spec, seed=seed)
        if reps is not None:
            spec = dataclasses.replace(spec, repetitions=reps)
        out.append(spec)
    return out


def _cmd_run(argv) -> int:
    parser = argparse.ArgumentParser(prog="christoffel-sampling run")
    parser.add_argument("config")
    _add_run_options(parser)
    args = parser.parse_args(argv)
    specs = _apply_overrides(load_config(args.config), args.seed, args.reps)
    for spec in specs:
        run_experiment(spec, args.out, jobs=args.jobs)
    return 0


def _cmd_preset(argv) -> int:
    parser = argparse.ArgumentParser(prog="christoffel-sampling preset")
    parser.add_argument("name")
    _add_run_options(parser)
    args = parser.parse_args(argv)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    reps = DEFAULT_REPS if args.reps is None else args.reps
    for spec in preset_specs(args.name, seed=seed, repetitions=reps):
        run_experiment(spec, args.out, jobs=args.jobs)
    return 0


def _cmd_bound(argv) -> int:
    parser = argparse.ArgumentParser(prog="christoffel-sampling bound")
    parser.add_argument("--d", type=int, required=True)
    parser.add_argument("--p", type=float, required=True)
    parser.add_argument("--kn", type=float, required=True)
    args = parser.parse_args(argv)
    print(gamma_bound(args.kn, args.d, args.p))
    return 0


def _cmd_list_presets() -> int:
    for name in PRESET_NAMES:
        ids = [spec.id for spec in preset_specs(name)]
        print(f"{name}: {', '.join(ids)}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        print(USAGE, end="")
        return 1
    command, rest = argv[0], argv[1:]
    try:
        if command == "run":
            return _cmd_run(rest)
        if command == "preset":
            return _cmd_preset(rest)
        if command == "bound":
            return _cmd_bound(rest)
        if command == "list-presets":
            return _cmd_list_presets()
        if command in ("-h", "--help", "help"):
            print(USAGE, end="")
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ChristoffelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"unknown command {command!r}", file=sys.stderr)
    print(USAGE, end="", file=sys.stderr)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
