"""Generator contract, candidates wire format, and the mock generator.

Candidates travel as JSON Lines, one output per line:

    {"block_id": str, "rank": int, "model_score": float, "text": str}

Scores must be non-increasing down the file; ranks are 1-based and
contiguous. The mock generator produces deterministic mutations of the
block so desk-scale runs need no neural model; hint files can plant
specific outputs at specific beam ranks.
"""
from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

from .blocks import serialize_block, split_block_output, serialize_label
from .model import BuggyBlock, CHUNK_SEPARATOR, CONTEXT_DELIMITER, ModelError

__all__ = [
    "GeneratorRequest",
    "GeneratorResponse",
    "GeneratorHint",
    "generate_mock",
    "read_candidates",
    "write_candidates",
    "load_hints",
    "CandidateFormatError",
]


class CandidateFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorRequest:
    block_id: str
    block_text: str
    beam_size: int
    ingredient_metadata: dict | None = None

    def __post_init__(self):
        if self.beam_size < 1:
            raise ModelError("beam_size must be at least 1")


@dataclass(frozen=True)
class GeneratorResponse:
    block_id: str
    outputs: tuple[tuple[str, float], ...]  # (text, model_score), best first

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(self.outputs))
        scores = [score for _, score in self.outputs]
        if any(b > a for a, b in zip(scores, scores[1:])):
            raise ModelError("model_score must be non-increasing")


@dataclass(frozen=True)
class GeneratorHint:
    """Plants ``text`` as the mock generator's output at beam ``rank``."""

    rank: int
    text: str


def load_hints(path: str | Path) -> list[GeneratorHint]:
    hints = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            hints.append(GeneratorHint(int(doc["rank"]), doc["text"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CandidateFormatError(f"{path}:{lineno}: bad hint record: {exc}")
    return hints


# -- mock generation ---------------------------------------------------


_OPERATOR_FLIPS = {
    "+": "-", "-": "+", "*": "/", "/": "*",
    "<": "<=", "<=": "<", ">": ">=", ">=": ">",
    "==": "!=", "!=": "==", "&&": "||", "||": "&&",
}

_RESERVED_WORDS = {
    "class", "if", "else", "for", "while", "return", "true", "false",
    "int", "bool", "str", "void",
}


def _mutate_line(line: str, rng: random.Random, salt: int) -> str:
    words = line.split(" ")
    choices = []
    for idx, word in enumerate(words):
        if word in _OPERATOR_FLIPS:
            choices.append(("flip", idx))
        if word.rstrip(";").isdigit():
            choices.append(("bump", idx))
    if not choices:
        return line + f" // v{salt}"
    op, idx = rng.choice(choices)
    if op == "flip":
        words[idx] = _OPERATOR_FLIPS[words[idx]]
    else:
        suffix = ";" if words[idx].endswith(";") else ""
        value = int(words[idx].rstrip(";"))
        words[idx] = str(value + rng.choice([1, -1, salt % 7 + 1])) + suffix
    return " ".join(words)


def _segment_identifiers(pre: str, body: str, post: str) -> list[str]:
    idents = []
    for text in (pre, body, post):
        for word in re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text):
            if word not in _RESERVED_WORDS and word not in idents:
                idents.append(word)
    return idents


def _insertion_candidates(pre: str, body: str, post: str) -> list[str]:
    """Deterministic fill-ins for an empty chunk body, derived from the
    surrounding context: raw context-line copies first, then copies with
    each numeric literal replaced by each in-scope identifier."""
    context_lines = [ln for ln in (pre.split("\n") + post.split("\n")) if ln.strip()]
    idents = _segment_identifiers(pre, body, post)
    out = list(context_lines)
    for line in context_lines:
        words = line.split(" ")
        for idx, word in enumerate(words):
            if word.rstrip(";").isdigit():
                suffix = ";" if word.endswith(";") else ""
                for ident in idents:
                    variant = words[:idx] + [ident + suffix] + words[idx + 1:]
                    out.append(" ".join(variant))
    return out


def _mutate_bodies(triples: list[tuple[str, str, str]], rng: random.Random,
                   rank: int, salt: int) -> str:
    mutated = []
    for pre, body, post in triples:
        lines = body.split("\n") if body else []
        if not lines:
            pool = _insertion_candidates(pre, body, post)
            if pool:
                lines = [pool[(rank - 1) % len(pool)]]
            else:
                lines = [f"x = {salt};"]
        elif rng.random() < 0.15:
            lines = lines[: len(lines) - 1] or [""]  # drop last statement line
        else:
            pick = rng.randrange(len(lines))
            lines[pick] = _mutate_line(lines[pick], rng, salt)
        mutated.append("\n".join(lines))
    return serialize_label(mutated)


def generate_mock(
    req: GeneratorRequest,
    corpus_hints: list[GeneratorHint] | None = None,
    seed: int = 0,
) -> GeneratorResponse:
    """Deterministic stand-in for a neural generator.

    Produces ``beam_size`` distinct outputs by mutating the block's chunk
    bodies (for empty omission bodies, by copying nearby context lines
    with identifier substitutions); hinted ranks carry their planted text
    verbatim. Scores start at 0 and decrease strictly by rank.
    """
    planted = {h.rank: h.text for h in (corpus_hints or [])}
    triples = _segment_triples(req.block_text)
    outputs: list[tuple[str, float]] = []
    seen: set[str] = set(planted.values())
    for rank in range(1, req.beam_size + 1):
        score = -0.01 * (rank - 1)
        if rank in planted:
            outputs.append((planted[rank], score))
            continue
        digest = hashlib.sha256(req.block_text.encode()).hexdigest()[:12]
        rng = random.Random(f"{seed}:{req.block_id}:{digest}:{rank}")
        text = _mutate_bodies(triples, rng, rank, rank)
        tries = 0
        while text in seen:
            tries += 1
            if tries > 10:
                # force distinctness with a comment marker
                bodies = serialize_block_parts(text)
                bodies[0] = bodies[0] + f"\n// alt {rank} {tries}"
                text = serialize_label(bodies)
                continue
            text = _mutate_bodies(triples, rng, rank, rank + tries * req.beam_size)
        seen.add(text)
        outputs.append((text, score))
    return GeneratorResponse(req.block_id, tuple(outputs))


def _segment_triples(block_text: str) -> list[tuple[str, str, str]]:
    """(pre_context, body, post_context) per segment; contexts are empty
    for label-format input."""
    parts = block_text.split("\n" + CHUNK_SEPARATOR + "\n")
    triples = []
    for part in parts:
        pieces = part.split("\n" + CONTEXT_DELIMITER + "\n")
        if len(pieces) == 3:
            triples.append((pieces[0], pieces[1], pieces[2]))
        else:
            triples.append(("", part, ""))
    return triples


def serialize_block_parts(block_text: str) -> list[str]:
    """Chunk bodies of a serialized block (or label) text."""
    raw = block_text.split("\n" + CHUNK_SEPARATOR + "\n")
    return split_block_output(block_text, len(raw))


def request_from_block(block: BuggyBlock, beam_size: int,
                       ingredient_metadata: dict | None = None) -> GeneratorRequest:
    return GeneratorRequest(
        block_id=block.block_id,
        block_text=serialize_block(block),
        beam_size=beam_size,
        ingredient_metadata=ingredient_metadata,
    )


# -- wire format -------------------------------------------------------


def write_candidates(resp: GeneratorResponse, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rank, (text, score) in enumerate(resp.outputs, start=1):
            fh.write(json.dumps(
                {"block_id": resp.block_id, "rank": rank,
                 "model_score": score, "text": text},
                ensure_ascii=False) + "\n")


def read_candidates(path: str | Path) -> GeneratorResponse:
    """Parse a candidates JSONL file, enforcing schema and score order."""
    block_id = ""
    outputs: list[tuple[str, float]] = []
    prev_score = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CandidateFormatError(f"{path}:{lineno}: not JSON: {exc}")
            for key in ("block_id", "rank", "model_score", "text"):
                if key not in doc:
                    raise CandidateFormatError(
                        f"{path}:{lineno}: missing field {key!r}")
            if doc["rank"] != len(outputs) + 1:
                raise CandidateFormatError(
                    f"{path}:{lineno}: rank {doc['rank']} out of sequence")
            score = float(doc["model_score"])
            if prev_score is not None and score > prev_score:
                raise CandidateFormatError(
                    f"{path}:{lineno}: model_score increases")
            prev_score = score
            block_id = doc["block_id"]
            outputs.append((doc["text"], score))
    return GeneratorResponse(block_id, tuple(outputs))
