"""Command-line front end.

Subcommands: ``extract`` (chunk extraction from a buggy/fixed pair),
``repair`` (single-bug repair run), ``stats`` (histograms over a
published results CSV). Exit codes: 0 success (for repair: best verdict
at least PL), 1 repair fell short, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
from pathlib import Path

from .campaign import (
    BugInput,
    LOCATION_BUCKETS,
    range_stats,
    read_results_csv,
    run_campaign,
)
from .diffs import extract_chunks
from .minilang import MiniJavaLanguage
from .model import CampaignConfig, ModelError, SourceText, VerdictKind, validate_config

__all__ = ["main"]


def _cmd_extract(args) -> int:
    try:
        buggy = SourceText.from_string(Path(args.buggy).read_text(), args.buggy)
        fixed = SourceText.from_string(Path(args.fixed).read_text(), args.fixed)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    chunks = extract_chunks(buggy, fixed)
    doc = [
        {
            "chunk_id": c.chunk_id,
            "file": c.file,
            "start_line": c.start_line,
            "end_line": c.end_line,
            "deleted_lines": list(c.deleted_lines),
            "effective_locations": c.effective_locations,
        }
        for c in chunks
    ]
    print(json.dumps(doc, indent=2))
    return 0


def _load_config(args) -> CampaignConfig:
    values = {}
    if args.config:
        values.update(json.loads(Path(args.config).read_text()))
    overrides = {
        "mc": args.mc,
        "beam_size": args.beam,
        "timeout_seconds": args.timeout,
        "seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.no_patch_optimization:
        values["no_patch_optimization"] = True
    if args.no_buggy_contexts:
        values["no_buggy_contexts"] = True
    if args.generator:
        values["generator_command"] = tuple(shlex.split(args.generator))
    for key in ("excluded_module_ids", "generator_command"):
        if key in values:
            values[key] = tuple(values[key])
    return validate_config(CampaignConfig(**values))


def _cmd_repair(args) -> int:
    root = Path(args.project)
    if not root.is_dir():
        print(f"error: project directory {root} not found", file=sys.stderr)
        return 2
    if args.candidates and args.generator:
        print("error: --candidates and --generator are mutually exclusive",
              file=sys.stderr)
        return 2
    try:
        cfg = _load_config(args)
    except (ModelError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.candidates:
        # external generator output: place alongside the project sources
        src = Path(args.candidates)
        if not src.is_file():
            print(f"error: candidates file {src} not found", file=sys.stderr)
            return 2
        target = root / "candidates.jsonl"
        if src.resolve() != target.resolve():
            target.write_text(src.read_text())
    bug_id = args.bug_id or root.name
    results_root = args.results or os.environ.get("BLOCKREPAIR_RESULTS", "results")
    lang = MiniJavaLanguage()
    report = run_campaign(cfg, [BugInput(bug_id, root)], lang, results_root)
    print(report.summary_table())
    if report.errors:
        for bug, err in report.errors.items():
            print(f"error: {bug}: {err}", file=sys.stderr)
        return 2
    best = report.records[0].best_verdict if report.records else None
    if best is not None and best.tier >= VerdictKind.PLAUSIBLE.tier:
        return 0
    return 1


def _cmd_stats(args) -> int:
    try:
        records = read_results_csv(args.results_csv)
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    chunk_hist, loc_hist = range_stats(records)
    print("correctly repaired bugs per chunk count:")
    for count in sorted(chunk_hist):
        print(f"  {count}: {chunk_hist[count]}")
    print("correctly repaired bugs per location range:")
    for bucket in LOCATION_BUCKETS:
        print(f"  {bucket}: {loc_hist[bucket]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockrepair",
        description="Multi-chunk program repair via buggy blocks and "
                    "candidate-patch optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract chunks from a buggy/fixed pair")
    p_extract.add_argument("--buggy", required=True)
    p_extract.add_argument("--fixed", required=True)
    p_extract.set_defaults(func=_cmd_extract)

    p_repair = sub.add_parser("repair", help="repair one bug")
    p_repair.add_argument("--project", required=True,
                          help="subject project directory (with project.json, faults.json)")
    p_repair.add_argument("--faults", help="fault spec path (default: PROJECT/faults.json)")
    p_repair.add_argument("--config", help="campaign config JSON file")
    p_repair.add_argument("--candidates", help="pre-generated candidates JSONL")
    p_repair.add_argument("--generator", help="external generator command (writes JSONL)")
    p_repair.add_argument("--no-patch-optimization", action="store_true")
    p_repair.add_argument("--no-buggy-contexts", action="store_true")
    p_repair.add_argument("--mc", type=int)
    p_repair.add_argument("--beam", type=int)
    p_repair.add_argument("--timeout", type=float)
    p_repair.add_argument("--seed", type=int)
    p_repair.add_argument("--jobs", type=int, default=1)
    p_repair.add_argument("--results", help="results directory root")
    p_repair.add_argument("--bug-id")
    p_repair.set_defaults(func=_cmd_repair)

    p_stats = sub.add_parser("stats", help="histograms over a results CSV")
    p_stats.add_argument("results_csv")
    p_stats.set_defaults(func=_cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    if getattr(args, "faults", None):
        # an explicit fault spec replaces PROJECT/faults.json
        project = Path(args.project)
        spec_path = Path(args.faults)
        if not spec_path.is_file():
            print(f"error: fault spec {spec_path} not found", file=sys.stderr)
            return 2
        if spec_path.resolve() != (project / "faults.json").resolve():
            (project / "faults.json").write_text(spec_path.read_text())
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
