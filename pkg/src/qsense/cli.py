"""Command-line entry point: run, validate, and list experiments.

Exit codes: 0 success, 1 runtime failure inside a run, 2 unparseable or
invalid config (every violation is printed, not just the first).
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    ConfigError,
    list_experiments,
    run_experiment,
    validate_config,
)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_BAD_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsense",
        description="Run qubit-sensing simulation experiments from JSON "
                    "configs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a config")
    run.add_argument("config", help="path to a JSON config document")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    run.add_argument("--out", default=None,
                     help="override the config output_dir")

    val = sub.add_parser("validate", help="check a config without running")
    val.add_argument("config", help="path to a JSON config document")

    sub.add_parser("list", help="print the experiment registry as JSON")
    return parser


def _load_document(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror or exc}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path} is not valid JSON: {exc}"])


def _print_violations(err: ConfigError) -> None:
    for violation in err.violations:
        print(f"config error: {violation}", file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list":
        print(json.dumps(list_experiments(), indent=2, sort_keys=True))
        return EXIT_OK

    try:
        raw = _load_document(args.config)
        if args.command == "run":
            if not isinstance(raw, dict):
                raise ConfigError(["config document must be a JSON "
                                   "object"])
            if args.seed is not None:
                raw = {**raw, "seed": args.seed}
            if args.out is not None:
                raw = {**raw, "output_dir": args.out}
        config = validate_config(raw)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_BAD_CONFIG

    if args.command == "validate":
        print(f"ok: {config.experiment} "
              f"(seed {config.seed}, trials {config.trials})")
        return EXIT_OK

    try:
        outputs = run_experiment(config)
    except Exception as exc:  # surface library errors as a diagnostic
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    for kind in ("csv", "summary", "manifest"):
        print(outputs[kind])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
