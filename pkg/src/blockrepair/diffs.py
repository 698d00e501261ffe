"""Chunk extraction from (buggy, fixed) pairs and fault-spec loading.

Diff granularity is whole lines. The alignment is the canonical leftmost
maximal matching: walk both files front to back, match the earliest line
pair that still admits a maximal common subsequence, and prefer consuming
the buggy side on ties. Any unchanged line splits chunks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .lang import SubjectLanguage
from .model import BuggyChunk, ModelError, SourceText, check_chunk_list

__all__ = [
    "FaultSpec",
    "FaultEntry",
    "extract_chunks",
    "extract_chunk_pairs",
    "load_fault_spec",
    "count_effective_locations",
]


@dataclass(frozen=True)
class FaultEntry:
    file: str
    start_line: int
    end_line: int

    def __post_init__(self):
        if self.start_line < 1 or self.end_line < self.start_line - 1:
            raise ModelError(
                f"bad fault range ({self.file}, {self.start_line}, {self.end_line})"
            )


@dataclass(frozen=True)
class FaultSpec:
    """Known buggy locations of one bug (perfect fault localization)."""

    bug_id: str
    entries: tuple[FaultEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ordered = sorted(self.entries, key=lambda e: (e.file, e.start_line))
        if list(self.entries) != ordered:
            raise ModelError("fault entries must be sorted by (file, start_line)")
        for a, b in zip(self.entries, self.entries[1:]):
            if a.file == b.file and b.start_line <= max(a.end_line, a.start_line - 1):
                raise ModelError(f"fault entries overlap in {a.file}")

    @classmethod
    def from_json(cls, text: str) -> "FaultSpec":
        doc = json.loads(text)
        entries = tuple(
            FaultEntry(e["file"], e["start_line"], e["end_line"])
            for e in doc["entries"]
        )
        return cls(doc["bug_id"], entries)

    def to_json(self) -> str:
        return json.dumps(
            {
                "bug_id": self.bug_id,
                "entries": [
                    {"file": e.file, "start_line": e.start_line, "end_line": e.end_line}
                    for e in self.entries
                ],
            },
            indent=2,
        )


def _canonical_alignment(a: list[str], b: list[str]) -> list[tuple[int, int]]:
    """Leftmost maximal common-subsequence alignment (0-based index pairs)."""
    m, n = len(a), len(b)
    # suffix LCS lengths
    lcs = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -1, -1):
            if a[i] == b[j]:
                lcs[i][j] = lcs[i + 1][j + 1] + 1
            else:
                lcs[i][j] = max(lcs[i + 1][j], lcs[i][j + 1])
    pairs = []
    i = j = 0
    while i < m and j < n:
        if a[i] == b[j] and lcs[i][j] == lcs[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def extract_chunk_pairs(
    buggy: SourceText, fixed: SourceText
) -> list[tuple[BuggyChunk, tuple[str, ...]]]:
    """Chunks plus the fixed-side replacement lines for each chunk."""
    a = list(buggy.lines)
    b = list(fixed.lines)
    matches = _canonical_alignment(a, b)
    anchors = [(-1, -1)] + matches + [(len(a), len(b))]
    result = []
    chunk_id = 0
    for (i0, j0), (i1, j1) in zip(anchors, anchors[1:]):
        del_lines = tuple(a[i0 + 1 : i1])
        ins_lines = tuple(b[j0 + 1 : j1])
        if not del_lines and not ins_lines:
            continue
        if del_lines:
            start, end = i0 + 2, i1  # 1-based inclusive
        else:
            start, end = i1 + 1, i1  # pure insertion anchored before line i1+1
        effective = _default_location_count(del_lines)
        chunk = BuggyChunk(
            chunk_id=chunk_id,
            file=buggy.origin,
            start_line=start,
            end_line=end,
            deleted_lines=del_lines,
            effective_locations=effective,
        )
        result.append((chunk, ins_lines))
        chunk_id += 1
    return result


def _default_location_count(deleted: tuple[str, ...]) -> int:
    if not deleted:
        return 1  # omission chunk
    return sum(1 for line in deleted if line.strip())


def extract_chunks(buggy: SourceText, fixed: SourceText) -> list[BuggyChunk]:
    """Maximal groups of changed lines between the two versions."""
    return [chunk for chunk, _ in extract_chunk_pairs(buggy, fixed)]


def replay_chunks(
    buggy: SourceText, pairs: list[tuple[BuggyChunk, tuple[str, ...]]]
) -> SourceText:
    """Delete each chunk's buggy lines and splice in the fixed side."""
    lines = list(buggy.lines)
    for chunk, replacement in sorted(
        pairs, key=lambda p: p[0].start_line, reverse=True
    ):
        start = chunk.start_line - 1
        end = chunk.end_line  # exclusive when 0-based
        lines[start:end] = list(replacement)
    return SourceText(tuple(lines), buggy.origin)


def load_fault_spec(spec: FaultSpec, project_root: str | Path,
                    lang: SubjectLanguage | None = None) -> list[BuggyChunk]:
    """Materialize a fault spec into chunks with deleted lines read from
    the project. Raises on missing files or out-of-range entries."""
    root = Path(project_root)
    chunks = []
    for chunk_id, entry in enumerate(spec.entries):
        path = root / entry.file
        if not path.is_file():
            raise ModelError(f"fault entry ({entry.file}, {entry.start_line}, "
                             f"{entry.end_line}): file not found")
        source = SourceText.from_string(path.read_text(), entry.file)
        if entry.end_line > len(source):
            raise ModelError(f"fault entry ({entry.file}, {entry.start_line}, "
                             f"{entry.end_line}): beyond end of file "
                             f"({len(source)} lines)")
        if entry.start_line > len(source) + 1:
            raise ModelError(f"fault entry ({entry.file}, {entry.start_line}, "
                             f"{entry.end_line}): start beyond end of file")
        deleted = tuple(
            source.line(n) for n in range(entry.start_line, entry.end_line + 1)
        )
        chunk = BuggyChunk(
            chunk_id=chunk_id,
            file=entry.file,
            start_line=entry.start_line,
            end_line=entry.end_line,
            deleted_lines=deleted,
            effective_locations=_default_location_count(deleted),
        )
        if lang is not None:
            chunk = BuggyChunk(
                chunk_id=chunk.chunk_id,
                file=chunk.file,
                start_line=chunk.start_line,
                end_line=chunk.end_line,
                deleted_lines=chunk.deleted_lines,
                effective_locations=count_effective_locations(chunk, lang),
            )
        chunks.append(chunk)
    check_chunk_list(chunks)
    return chunks


def count_effective_locations(chunk: BuggyChunk, lang: SubjectLanguage) -> int:
    """Deleted lines that carry a real statement.

    Blank lines, comment-only lines, and null statements (bare ';' or a
    loop/conditional over an empty body) do not count. A pure-insertion
    chunk counts as one location: the anchor itself.
    """
    if chunk.is_omission:
        return 1
    count = 0
    for line in chunk.deleted_lines:
        if not line.strip():
            continue
        if lang.is_comment_line(line):
            continue
        if lang.is_null_line(line):
            continue
        count += 1
    return count
