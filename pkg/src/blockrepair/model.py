"""Shared domain vocabulary for the repair engine.

Every type validates its invariants at construction time and is immutable
afterwards, so values can be shared freely across concurrent workers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

__all__ = [
    "SourceText",
    "BuggyChunk",
    "BlockSegment",
    "BuggyBlock",
    "IngredientIndex",
    "CandidateFragment",
    "CombinedPatch",
    "VerdictKind",
    "Verdict",
    "BugType",
    "BugRecord",
    "CampaignConfig",
    "validate_config",
    "ModelError",
]

CHUNK_SEPARATOR = "<CHUNK-SEP>"
CONTEXT_DELIMITER = "<CTX-SEP>"


class ModelError(ValueError):
    """Raised when a domain value violates one of its invariants."""


@dataclass(frozen=True)
class SourceText:
    """Lines of one file of a subject project. Line indices are 1-based."""

    lines: tuple[str, ...]
    origin: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        for ln in self.lines:
            if "\n" in ln or "\r" in ln:
                raise ModelError("SourceText lines must not embed newlines")

    @classmethod
    def from_string(cls, text: str, origin: str = "") -> "SourceText":
        # A trailing newline does not create a phantom empty last line.
        if text == "":
            return cls((), origin)
        stripped = text[:-1] if text.endswith("\n") else text
        return cls(tuple(stripped.split("\n")), origin)

    def line(self, number: int) -> str:
        if not 1 <= number <= len(self.lines):
            raise ModelError(f"line {number} out of range for {self.origin or '<text>'}")
        return self.lines[number - 1]

    def to_string(self) -> str:
        if not self.lines:
            return ""
        return "\n".join(self.lines) + "\n"

    def __len__(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class BuggyChunk:
    """One contiguous group of buggy lines.

    ``end_line = start_line - 1`` marks a pure-insertion (omission) chunk
    anchored just before ``start_line``.
    """

    chunk_id: int
    file: str
    start_line: int
    end_line: int
    deleted_lines: tuple[str, ...] = ()
    effective_locations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "deleted_lines", tuple(self.deleted_lines))
        if self.chunk_id < 0:
            raise ModelError("chunk_id must be non-negative")
        if self.start_line < 1:
            raise ModelError("start_line must be 1-based")
        if self.end_line < self.start_line - 1:
            raise ModelError(
                f"end_line {self.end_line} < start_line {self.start_line} - 1"
            )
        expected = self.end_line - self.start_line + 1
        if len(self.deleted_lines) != expected:
            raise ModelError(
                f"chunk spans {expected} line(s) but carries {len(self.deleted_lines)}"
            )
        if self.effective_locations < 0:
            raise ModelError("effective_locations must be non-negative")
        if self.is_omission and self.effective_locations == 0:
            raise ModelError("an omission chunk counts as one effective location")

    @property
    def is_omission(self) -> bool:
        return self.end_line == self.start_line - 1

    @property
    def body(self) -> str:
        return "\n".join(self.deleted_lines)


def check_chunk_list(chunks: list[BuggyChunk] | tuple[BuggyChunk, ...]) -> None:
    """Chunks of one bug must be sorted by (file, start_line) and disjoint."""
    ordered = sorted(chunks, key=lambda c: (c.file, c.start_line))
    if list(chunks) != ordered:
        raise ModelError("chunks must be sorted by (file, start_line)")
    for a, b in zip(ordered, ordered[1:]):
        if a.file == b.file and b.start_line <= max(a.end_line, a.start_line - 1):
            raise ModelError(
                f"chunks {a.chunk_id} and {b.chunk_id} overlap in {a.file}"
            )


@dataclass(frozen=True)
class BlockSegment:
    """Pre-context, chunk body, and post-context texts for one chunk."""

    pre_context: str
    body: str
    post_context: str


@dataclass(frozen=True)
class BuggyBlock:
    """All chunks of one bug bound into a single delimited sequence."""

    block_id: str
    segments: tuple[BlockSegment, ...]
    token_count: int
    separator_token: str = CHUNK_SEPARATOR

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ModelError("a block needs at least one segment")
        if self.token_count < 0:
            raise ModelError("token_count must be non-negative")
        for seg in self.segments:
            for text in (seg.pre_context, seg.body, seg.post_context):
                if self.separator_token in text or CONTEXT_DELIMITER in text:
                    raise ModelError("reserved marker occurs inside a segment")


@dataclass(frozen=True)
class IngredientIndex:
    """Project-level repair material: methods, fields, call relations."""

    methods: tuple[tuple[str, str, str], ...] = ()
    fields_: tuple[tuple[str, str, str], ...] = ()
    relations: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "fields_", tuple(self.fields_))
        object.__setattr__(self, "relations", tuple(self.relations))
        if len(set(self.methods)) != len(self.methods):
            raise ModelError("duplicate method entry")
        if len(set(self.fields_)) != len(self.fields_):
            raise ModelError("duplicate field entry")
        names = {m[0] for m in self.methods}
        for caller, callee in self.relations:
            if caller not in names or callee not in names:
                raise ModelError(f"relation ({caller}, {callee}) references unindexed entry")


@dataclass(frozen=True)
class CandidateFragment:
    """One generated replacement for one chunk, with score provenance."""

    chunk_id: int
    replacement_lines: tuple[str, ...]
    model_rank: int
    model_score: float
    opt_score: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "replacement_lines", tuple(self.replacement_lines))
        if self.model_rank < 1:
            raise ModelError("model_rank is 1-based")
        if not 0.0 <= self.opt_score <= 1.0:
            raise ModelError(f"opt_score {self.opt_score} outside [0, 1]")

    @property
    def text(self) -> str:
        return "\n".join(self.replacement_lines)

    def with_opt_score(self, score: float) -> "CandidateFragment":
        return replace(self, opt_score=score)


@dataclass(frozen=True)
class CombinedPatch:
    """One fragment per chunk, assembled into a single applicable fix."""

    fragments: tuple[CandidateFragment, ...]
    aggregate_score: float
    emit_index: int

    def __post_init__(self):
        object.__setattr__(self, "fragments", tuple(self.fragments))
        if not self.fragments:
            raise ModelError("a combined patch needs at least one fragment")
        ids = [f.chunk_id for f in self.fragments]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ModelError("fragments must be ordered by distinct chunk_id")
        total = sum(f.opt_score for f in self.fragments)
        if abs(total - self.aggregate_score) > 1e-9:
            raise ModelError("aggregate_score must equal the sum of fragment opt_scores")
        if self.emit_index < 1:
            raise ModelError("emit_index is 1-based")


class VerdictKind(enum.Enum):
    APPLY_ERROR = "ApplyError"
    FILTERED = "Filtered"
    TIMEOUT = "Timeout"
    COMPILED_ONLY = "CO"
    PLAUSIBLE = "PL"
    CORRECT = "CR"

    @property
    def tier(self) -> int:
        return _TIERS[self]


_TIERS = {
    VerdictKind.APPLY_ERROR: 0,
    VerdictKind.FILTERED: 0,
    VerdictKind.TIMEOUT: 0,
    VerdictKind.COMPILED_ONLY: 1,
    VerdictKind.PLAUSIBLE: 2,
    VerdictKind.CORRECT: 3,
}

# Total order used for "best verdict" aggregation.
_ORDER = [
    VerdictKind.APPLY_ERROR,
    VerdictKind.FILTERED,
    VerdictKind.TIMEOUT,
    VerdictKind.COMPILED_ONLY,
    VerdictKind.PLAUSIBLE,
    VerdictKind.CORRECT,
]


def verdict_rank(kind: VerdictKind) -> int:
    return _ORDER.index(kind)


@dataclass(frozen=True)
class Verdict:
    """Outcome of validating one combined patch."""

    kind: VerdictKind
    detail: str = ""

    def at_least(self, other: VerdictKind) -> bool:
        return self.kind.tier >= other.tier


class BugType(enum.Enum):
    TYPE1 = "Type1"  # single chunk, single location
    TYPE2 = "Type2"  # single chunk, multiple locations
    TYPE3 = "Type3"  # multiple chunks

    @property
    def hardness(self) -> int:
        return {"Type1": 1, "Type2": 2, "Type3": 3}[self.value]


@dataclass(frozen=True)
class BugRecord:
    """Per-bug aggregate result of one campaign."""

    bug_id: str
    module_id: str
    chunk_count: int
    location_count: int
    bug_type: BugType
    best_verdict: VerdictKind
    patches_examined: int

    def __post_init__(self):
        if self.chunk_count < 1 or self.location_count < 1:
            raise ModelError("chunk_count and location_count are at least 1")
        if self.patches_examined < 0:
            raise ModelError("patches_examined must be non-negative")
        expected = _classify(self.chunk_count, self.location_count)
        if self.bug_type is not expected:
            raise ModelError(
                f"bug_type {self.bug_type.value} inconsistent with "
                f"({self.chunk_count} chunks, {self.location_count} locations)"
            )


def _classify(chunk_count: int, location_count: int) -> BugType:
    if chunk_count >= 2:
        return BugType.TYPE3
    return BugType.TYPE1 if location_count == 1 else BugType.TYPE2


@dataclass(frozen=True)
class CampaignConfig:
    """All knobs of one repair campaign."""

    alpha: float = 0.5
    beta: float = 0.5
    p: float = 0.5
    ngram_n: int = 3
    mc: int = 10_000
    beam_size: int = 500
    token_budget: int = 512
    context_width: int = 3
    timeout_seconds: float = 19_800.0  # 5.5 hours per module
    no_patch_optimization: bool = False
    no_buggy_contexts: bool = False
    excluded_module_ids: tuple[str, ...] = ()
    seed: int = 0
    results_root: str = "results"
    # external candidate generator; empty means mock / file ingestion.
    # Placeholders: {python} -> interpreter, {block} -> serialized block
    # path, {out} -> candidates JSONL path (appended when absent).
    generator_command: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "excluded_module_ids", tuple(self.excluded_module_ids)
        )
        object.__setattr__(
            self, "generator_command", tuple(self.generator_command)
        )


def validate_config(cfg: CampaignConfig) -> CampaignConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise."""
    for name in ("alpha", "beta", "p"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            raise ModelError(f"{name} must lie in [0, 1], got {value}")
    if cfg.mc < 1:
        raise ModelError(f"mc must be at least 1, got {cfg.mc}")
    if cfg.beam_size < 1:
        raise ModelError(f"beam_size must be at least 1, got {cfg.beam_size}")
    if cfg.ngram_n < 1:
        raise ModelError(f"ngram_n must be at least 1, got {cfg.ngram_n}")
    if cfg.token_budget < 1:
        raise ModelError(f"token_budget must be at least 1, got {cfg.token_budget}")
    if cfg.context_width < 0:
        raise ModelError(f"context_width must be non-negative, got {cfg.context_width}")
    if cfg.timeout_seconds < 0:
        raise ModelError(f"timeout_seconds must be non-negative, got {cfg.timeout_seconds}")
    return cfg
