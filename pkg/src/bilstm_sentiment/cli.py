"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, dump_config, load_config
from .pipeline import STAGES, StageError, check_inputs, full_run, run_stage
from .train import NumericalError, SweepAborted

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("preprocess", "build-lexicon", "embed", "train", "evaluate", "sweep", "explain", "full-run")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with flat dotted keys (e.g. train.epochs: 8)")
    common.add_argument("--workdir", help="artifact directory (paths.workdir)")
    common.add_argument("--seed", type=int, help="root seed")
    common.add_argument("--dry-run", action="store_true", help="validate configuration and inputs, write nothing")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="bilstm-sentiment", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "sweep":
            p.add_argument("--param", choices=("epochs", "batch_size", "dropout_rate"))
            p.add_argument("--values", help="comma-separated values, e.g. 8,10,12,17")
        if name == "explain":
            p.add_argument("--review", help="raw review text to attribute (default: review 1)")
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    if args.workdir:
        out["paths.workdir"] = args.workdir
    if args.seed is not None:
        out["seed"] = args.seed
    if getattr(args, "param", None):
        out["sweep.parameter"] = args.param
    if getattr(args, "values", None):
        out["sweep.values"] = args.values
    if getattr(args, "review", None):
        out["explain.review"] = args.review
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "sweep" and cfg.sweep.parameter == "epochs":
        cfg.sweep.values = [int(v) for v in cfg.sweep.values]

    stages = list(STAGES) if args.command == "full-run" else [args.command]
    try:
        if args.dry_run:
            check_inputs(cfg, stages)
            print(dump_config(cfg), end="")
            print(f"dry run: {' -> '.join(stages)} ok, nothing written")
            return EXIT_OK
        result = full_run(cfg) if args.command == "full-run" else run_stage(cfg, args.command)
    except StageError as exc:
        cause = exc.cause.__cause__ if isinstance(exc.cause, SweepAborted) else exc.cause
        print(f"error: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(cause, NumericalError) else EXIT_DATA
    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
