"""Command-line front end: generate instances, run sessions, verify bounds.

Exit codes: 0 on success, 1 on any bound violation or verification failure,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, SdncError
from .harness import (
    ExperimentConfig,
    cmd_gen,
    cmd_run,
    cmd_sweep,
    effective_workers,
    verify_results,
)


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _apply_overrides(data: dict, args) -> dict:
    data = dict(data)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdnc",
        description=(
            "Self-directed node classification: generate labeled graph "
            "instances, run learner-vs-source sessions, and verify mistake "
            "bounds."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("gen", "write edge-list/labeling/metadata files per trial seed"),
        ("run", "run sessions, write transcripts and a results CSV"),
        ("sweep", "cross-product parameter sweep, aggregated CSV"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default="out", help="output directory")
    v = sub.add_parser("verify", help="re-check a results directory")
    v.add_argument("--out", default="out", help="results directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            problems = verify_results(args.out)
            for p in problems:
                print(f"FAIL {p}")
            if problems:
                return 1
            print("verify: ok")
            return 0
        data = _apply_overrides(_load_config(args.config), args)
        if args.command == "sweep":
            workers = effective_workers(
                int(data.get("workers", 1)), args.workers
            )
            violations = cmd_sweep(data, args.out, workers=workers)
            print(f"sweep: wrote {args.out}/sweep.csv, {violations} violations")
            return 1 if violations else 0
        cfg = ExperimentConfig.from_dict(data)
        if args.command == "gen":
            written = cmd_gen(cfg, args.out)
            print(f"gen: wrote {len(written)} files to {args.out}")
            return 0
        if args.command == "run":
            workers = effective_workers(cfg.workers, args.workers)
            violations = cmd_run(cfg, args.out, workers=workers)
            print(
                f"run: wrote {args.out}/results.csv "
                f"({cfg.trials} trials, {violations} violations)"
            )
            return 1 if violations else 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SdncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
