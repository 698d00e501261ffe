"""Multi-bug campaign orchestration, bug-type statistics, and reporting.

Results directory layout, per bug:

    results/<bug_id>/block.txt
    results/<bug_id>/candidates.jsonl
    results/<bug_id>/combined.jsonl
    results/<bug_id>/verdicts.jsonl
    results/<bug_id>/logs/
    results/report.json

Published per-bug result files for statistics ingestion are CSV with
columns bug_id, chunk_count, location_count, verdict.
"""
from __future__ import annotations

import csv
import io
import json
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .blocks import build_block, serialize_block
from .diffs import FaultSpec, load_fault_spec
from .generator import (
    GeneratorResponse,
    generate_mock,
    load_hints,
    read_candidates,
    request_from_block,
    write_candidates,
)
from .blocks import MalformedOutputError, split_block_output
from .lang import SubjectLanguage
from .model import (
    BugRecord,
    BugType,
    CampaignConfig,
    CandidateFragment,
    ModelError,
    SourceText,
    VerdictKind,
    validate_config,
)
from .optimize import EmptyPoolError, combine, filter_candidates, rank_candidates
from .validate import Deadline, SubjectProject, run_bug

__all__ = [
    "classify_bug",
    "aggregate_module_type",
    "range_stats",
    "run_campaign",
    "RepairReport",
    "BugInput",
    "read_results_csv",
    "LOCATION_BUCKETS",
]

LOCATION_BUCKETS = ("1", "2", "3", "4", "5-9", "10+")


def classify_bug(chunk_count: int, location_count: int) -> BugType:
    """Type 1: one chunk, one location. Type 2: one chunk, several
    locations. Type 3: several chunks."""
    if chunk_count < 1 or location_count < 1:
        raise ModelError("chunk_count and location_count must be at least 1")
    if chunk_count >= 2:
        return BugType.TYPE3
    return BugType.TYPE1 if location_count == 1 else BugType.TYPE2


def aggregate_module_type(types: list[BugType]) -> BugType:
    """The hardest type present in one module."""
    if not types:
        raise ModelError("cannot aggregate an empty type list")
    return max(types, key=lambda t: t.hardness)


def _location_bucket(count: int) -> str:
    if count >= 10:
        return "10+"
    if count >= 5:
        return "5-9"
    return str(count)


def range_stats(records: list[BugRecord]) -> tuple[dict[int, int], dict[str, int]]:
    """Histograms of correctly repaired bugs by chunk count and by
    location bucket."""
    chunk_hist: dict[int, int] = {}
    loc_hist: dict[str, int] = {b: 0 for b in LOCATION_BUCKETS}
    for rec in records:
        if rec.best_verdict is not VerdictKind.CORRECT:
            continue
        chunk_hist[rec.chunk_count] = chunk_hist.get(rec.chunk_count, 0) + 1
        loc_hist[_location_bucket(rec.location_count)] += 1
    return chunk_hist, loc_hist


def read_results_csv(path: str | Path) -> list[BugRecord]:
    """Ingest a published per-bug results file."""
    records = []
    text = Path(path).read_text()
    reader = csv.DictReader(io.StringIO(text))
    required = {"bug_id", "chunk_count", "location_count", "verdict"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ModelError(f"results CSV must have columns {sorted(required)}")
    for row_no, row in enumerate(reader, start=2):
        try:
            chunk_count = int(row["chunk_count"])
            location_count = int(row["location_count"])
            verdict = VerdictKind(row["verdict"])
            bug_id = row["bug_id"]
            module_id = bug_id.split("-")[0] if "-" in bug_id else ""
            records.append(BugRecord(
                bug_id=bug_id,
                module_id=module_id,
                chunk_count=chunk_count,
                location_count=location_count,
                bug_type=classify_bug(chunk_count, location_count),
                best_verdict=verdict,
                patches_examined=0,
            ))
        except (TypeError, ValueError, KeyError, ModelError) as exc:
            raise ModelError(f"results CSV row {row_no}: {exc}")
    return records


@dataclass(frozen=True)
class BugInput:
    """One bug of a campaign: a subject project directory.

    The directory holds project.json, faults.json, the sources, and
    either hints.jsonl (mock generation) or candidates.jsonl (external
    generator output).
    """

    bug_id: str
    root: Path

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))


@dataclass
class RepairReport:
    records: list[BugRecord] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)
    funnel_patches: dict[str, int] = field(default_factory=dict)

    def totals(self) -> dict[str, int]:
        counts = {"CO": 0, "PL": 0, "CR": 0}
        for rec in self.records:
            tier = rec.best_verdict.tier
            if tier >= 1:
                counts["CO"] += 1
            if tier >= 2:
                counts["PL"] += 1
            if tier >= 3:
                counts["CR"] += 1
        return counts

    def per_type_cr(self) -> dict[str, int]:
        counts = {"Type1": 0, "Type2": 0, "Type3": 0}
        for rec in self.records:
            if rec.best_verdict is VerdictKind.CORRECT:
                counts[rec.bug_type.value] += 1
        return counts

    def to_json(self) -> str:
        chunk_hist, loc_hist = range_stats(self.records)
        doc = {
            "bugs": [
                {
                    "bug_id": r.bug_id,
                    "module_id": r.module_id,
                    "chunk_count": r.chunk_count,
                    "location_count": r.location_count,
                    "bug_type": r.bug_type.value,
                    "best_verdict": r.best_verdict.value,
                    "patches_examined": r.patches_examined,
                }
                for r in self.records
            ],
            "errors": dict(sorted(self.errors.items())),
            "totals": self.totals(),
            "per_type_cr": self.per_type_cr(),
            "chunk_histogram": {str(k): v for k, v in sorted(chunk_hist.items())},
            "location_histogram": loc_hist,
            "combined_patch_funnel": dict(sorted(self.funnel_patches.items())),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def summary_table(self) -> str:
        lines = [f"{'bug':<16}{'type':<8}{'chunks':<8}{'locs':<6}"
                 f"{'verdict':<10}{'examined':<8}"]
        for r in self.records:
            lines.append(f"{r.bug_id:<16}{r.bug_type.value:<8}{r.chunk_count:<8}"
                         f"{r.location_count:<6}{r.best_verdict.value:<10}"
                         f"{r.patches_examined:<8}")
        totals = self.totals()
        lines.append(f"CO {totals['CO']}  PL {totals['PL']}  CR {totals['CR']}")
        return "\n".join(lines)


def _load_sources(root: Path) -> dict[str, SourceText]:
    sources = {}
    for path in sorted(root.rglob("*.mj")):
        rel = str(path.relative_to(root))
        sources[rel] = SourceText.from_string(path.read_text(), rel)
    return sources


def _fragments_from_response(
    resp: GeneratorResponse, chunks
) -> tuple[list[list[CandidateFragment]], int]:
    """Per-chunk candidate pools from the generator outputs.

    Outputs that do not split into the expected chunk count are counted
    as filtered.
    """
    pools: list[list[CandidateFragment]] = [[] for _ in chunks]
    malformed = 0
    for rank, (text, score) in enumerate(resp.outputs, start=1):
        try:
            parts = split_block_output(text, len(chunks))
        except MalformedOutputError:
            malformed += 1
            continue
        for chunk, part in zip(chunks, parts):
            pools[chunk.chunk_id].append(CandidateFragment(
                chunk_id=chunk.chunk_id,
                replacement_lines=tuple(part.split("\n")) if part else (),
                model_rank=rank,
                model_score=score,
            ))
    return pools, malformed


def _spawn_generator(cfg: CampaignConfig, block_path: Path,
                     out_path: Path) -> GeneratorResponse:
    """Run the configured external generator command and ingest its
    candidates file.

    ``{python}`` expands to the running interpreter, ``{block}`` to the
    serialized block path, and ``{out}`` to the candidates path; the two
    paths are appended positionally when their placeholders are absent.
    """
    argv = []
    saw_block = saw_out = False
    for part in cfg.generator_command:
        if part == "{python}":
            part = sys.executable
        if "{block}" in part:
            part = part.replace("{block}", str(block_path))
            saw_block = True
        if "{out}" in part:
            part = part.replace("{out}", str(out_path))
            saw_out = True
        argv.append(part)
    if not saw_block:
        argv.append(str(block_path))
    if not saw_out:
        argv.append(str(out_path))
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ModelError(
            f"generator command failed (exit {proc.returncode}): "
            f"{proc.stderr.strip()[:500]}")
    if not out_path.exists():
        raise ModelError("generator command wrote no candidates file")
    return read_candidates(out_path)


def run_one_bug(
    bug: BugInput,
    cfg: CampaignConfig,
    lang: SubjectLanguage,
    results_dir: Path,
) -> BugRecord:
    """Full pipeline for one bug: fault spec -> block -> generate ->
    split -> filter/rank -> combine -> validate."""
    project = SubjectProject.load(bug.root)
    spec = FaultSpec.from_json((bug.root / "faults.json").read_text())
    chunks = load_fault_spec(spec, bug.root, lang)
    sources = _load_sources(bug.root)
    deadline = Deadline(cfg.timeout_seconds)

    results_dir.mkdir(parents=True, exist_ok=True)
    block = build_block(chunks, sources, cfg, lang, block_id=bug.bug_id)
    (results_dir / "block.txt").write_text(serialize_block(block))

    candidates_path = bug.root / "candidates.jsonl"
    if candidates_path.exists():
        resp = read_candidates(candidates_path)
    elif cfg.generator_command:
        resp = _spawn_generator(cfg, results_dir / "block.txt",
                                results_dir / "candidates.jsonl")
    else:
        hints_path = bug.root / "hints.jsonl"
        hints = load_hints(hints_path) if hints_path.exists() else []
        resp = generate_mock(request_from_block(block, cfg.beam_size),
                             hints, seed=cfg.seed)
    write_candidates(resp, results_dir / "candidates.jsonl")

    pools, _ = _fragments_from_response(resp, chunks)
    ranked = []
    for chunk in chunks:
        pool = filter_candidates(pools[chunk.chunk_id], chunk, lang,
                                 sources[chunk.file].lines)
        ranked.append(rank_candidates(pool, chunk, cfg, lang))

    stream = combine(ranked, cfg.mc)
    combined_log = results_dir / "combined.jsonl"
    verdict_log = results_dir / "verdicts.jsonl"
    with tempfile.TemporaryDirectory(prefix=f"{bug.bug_id}-") as tmp:
        with open(combined_log, "w") as fh:
            def logged_stream():
                for patch in stream:
                    fh.write(json.dumps({
                        "emit_index": patch.emit_index,
                        "aggregate_score": round(patch.aggregate_score, 9),
                        "fragments": [f.text for f in patch.fragments],
                    }) + "\n")
                    yield patch

            result = run_bug(project, chunks, logged_stream(), lang, deadline,
                             bug.bug_id, Path(tmp), results_dir / "logs")
    with open(verdict_log, "w") as fh:
        for emit_index, verdict in result.verdicts:
            fh.write(json.dumps({
                "emit_index": emit_index,
                "verdict": verdict.kind.value,
                "detail": verdict.detail,
            }) + "\n")
    return result.record


def run_campaign(
    cfg: CampaignConfig,
    bugs: list[BugInput],
    lang: SubjectLanguage,
    results_root: str | Path | None = None,
) -> RepairReport:
    """Run every non-excluded bug; per-bug failures are recorded and the
    campaign continues."""
    validate_config(cfg)
    root = Path(results_root if results_root is not None else cfg.results_root)
    if root.exists():
        shutil.rmtree(root)
    root.mkdir(parents=True)
    report = RepairReport()
    funnel = {"CO": 0, "PL": 0, "CR": 0}
    for bug in bugs:
        if bug.bug_id in cfg.excluded_module_ids:
            continue
        module_id = bug.bug_id.split("-")[0]
        if module_id in cfg.excluded_module_ids:
            continue
        try:
            record = run_one_bug(bug, cfg, lang, root / bug.bug_id)
        except (ModelError, EmptyPoolError, OSError, ValueError) as exc:
            report.errors[bug.bug_id] = f"{type(exc).__name__}: {exc}"
            continue
        report.records.append(record)
        verdict_file = root / bug.bug_id / "verdicts.jsonl"
        if verdict_file.exists():
            for line in verdict_file.read_text().splitlines():
                kind = json.loads(line)["verdict"]
                tier = VerdictKind(kind).tier
                if tier >= 1:
                    funnel["CO"] += 1
                if tier >= 2:
                    funnel["PL"] += 1
                if tier >= 3:
                    funnel["CR"] += 1
    report.funnel_patches = funnel
    (root / "report.json").write_text(report.to_json())
    return report
