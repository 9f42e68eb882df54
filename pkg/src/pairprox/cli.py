"""Command-line entry point: ``pairprox <analyze|split|featurize|train|eval|run>``.

Exit codes: 0 success, 2 invalid input or config, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, InputError, PairProxError
from .pipeline import PipelineError, RunConfig, analyze, format_table, run_pipeline

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

STAGES_FOR = {
    "split": ("split",),
    "featurize": ("featurize",),
    "train": ("train",),
    "eval": ("eval",),
    "run": ("split", "featurize", "train", "eval"),
}


def _seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairprox", description="Pair-feature link prediction.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("analyze",) + tuple(STAGES_FOR):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON run config or a saved manifest.json")
        s.add_argument("--seed", type=_seeds, help="comma-separated seeds, e.g. 0,1,2")
        s.add_argument("--workers", type=int)
        s.add_argument("--preset", help="auc, hits20, hits50 or hits100")
        s.add_argument("--metric", action="append", help="auc or hits@K; repeatable")
        s.add_argument("--out", help="output directory")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seeds = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.preset is not None:
        cfg.preset = args.preset
    if args.metric:
        cfg.metrics = args.metric
    if args.out is not None:
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        if args.command == "analyze":
            print(format_table(analyze(cfg)))
            return EXIT_OK
        cfg.validate()
        report = run_pipeline(cfg, STAGES_FOR[args.command])
        if report is not None:
            print(json.dumps({"metric": report.metric, "mean": report.mean, "std": report.std}))
        return EXIT_OK
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (ConfigError, InputError)) and exc.stage in ("load", "split"):
            return EXIT_INVALID
        return EXIT_RUNTIME
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PairProxError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
