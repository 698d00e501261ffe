"""Building buggy blocks and splitting generated blocks back apart.

Wire format (normative, shared with the generator):

* chunk segments are joined by a line consisting of ``<CHUNK-SEP>``;
* within a segment, pre-context, chunk body, and post-context are joined
  by lines consisting of ``<CTX-SEP>``;
* label/generation outputs carry bodies only: fragment texts joined by
  the ``<CHUNK-SEP>`` line, no context delimiters.

Both markers are reserved: they must not occur inside subject sources,
and building refuses inputs that contain them.
"""
from __future__ import annotations

from pathlib import Path

from .lang import ParseError, SubjectLanguage
from .model import (
    BlockSegment,
    BuggyBlock,
    BuggyChunk,
    CampaignConfig,
    CHUNK_SEPARATOR,
    CONTEXT_DELIMITER,
    IngredientIndex,
    ModelError,
    SourceText,
    check_chunk_list,
)

__all__ = [
    "build_block",
    "serialize_block",
    "serialize_label",
    "split_block_output",
    "block_token_count",
    "build_ingredient_index",
    "BlockBuildError",
    "MalformedOutputError",
]

_SEP_LINE = "\n" + CHUNK_SEPARATOR + "\n"
_CTX_LINE = "\n" + CONTEXT_DELIMITER + "\n"


class BlockBuildError(ModelError):
    pass


class MalformedOutputError(ValueError):
    """A generated block does not split into the expected chunk count."""


def _check_reserved(text: str, what: str) -> None:
    if CHUNK_SEPARATOR in text or CONTEXT_DELIMITER in text:
        raise BlockBuildError(f"reserved marker occurs in {what}")


def block_token_count(segments: list[BlockSegment], lang: SubjectLanguage) -> int:
    """Tokens of all segment texts plus one token per marker."""
    count = 0
    for seg in segments:
        for text in (seg.pre_context, seg.body, seg.post_context):
            count += len(lang.tokenize(text))
        count += 2  # the two context delimiters of this segment
    count += len(segments) - 1  # inter-chunk separators
    return count


def build_block(
    chunks: list[BuggyChunk],
    sources: dict[str, SourceText],
    cfg: CampaignConfig,
    lang: SubjectLanguage,
    block_id: str = "",
) -> BuggyBlock:
    """Bind all chunks of one bug, each with its surrounding context lines,
    into a single delimited block under the token budget.

    When the contexts overflow the budget they are trimmed symmetrically,
    dropping outermost lines round-robin across segments. A single chunk
    body alone exceeding the budget is unbuildable.
    """
    if not chunks:
        raise BlockBuildError("cannot build a block from zero chunks")
    check_chunk_list(chunks)

    width = 0 if cfg.no_buggy_contexts else cfg.context_width
    pres: list[list[str]] = []
    posts: list[list[str]] = []
    bodies: list[str] = []
    for chunk in chunks:
        source = sources[chunk.file]
        _check_reserved(chunk.body, f"chunk {chunk.chunk_id}")
        body_start = chunk.start_line
        body_end = chunk.end_line
        pre = [source.line(n)
               for n in range(max(1, body_start - width), body_start)]
        post = [source.line(n)
                for n in range(body_end + 1, min(len(source), body_end + width) + 1)]
        for line in pre + post:
            _check_reserved(line, f"context of chunk {chunk.chunk_id}")
        pres.append(pre)
        posts.append(post)
        bodies.append(chunk.body)

    def segments() -> list[BlockSegment]:
        return [
            BlockSegment("\n".join(p), body, "\n".join(q))
            for p, body, q in zip(pres, bodies, posts)
        ]

    # trim outermost context lines round-robin until the block fits
    while block_token_count(segments(), lang) > cfg.token_budget:
        trimmed = False
        for i in range(len(chunks)):
            if pres[i]:
                pres[i] = pres[i][1:]  # outermost pre line is the first
                trimmed = True
            if posts[i]:
                posts[i] = posts[i][:-1]  # outermost post line is the last
                trimmed = True
        if not trimmed:
            over = [c.chunk_id for c in chunks]
            raise BlockBuildError(
                f"chunk bodies alone exceed the token budget "
                f"({cfg.token_budget}); chunks {over}"
            )

    segs = segments()
    return BuggyBlock(
        block_id=block_id,
        segments=tuple(segs),
        token_count=block_token_count(segs, lang),
    )


def serialize_block(block: BuggyBlock) -> str:
    """Full block text: contexts, bodies, and all markers."""
    parts = [
        seg.pre_context + _CTX_LINE + seg.body + _CTX_LINE + seg.post_context
        for seg in block.segments
    ]
    return _SEP_LINE.join(parts)


def serialize_label(bodies: list[str]) -> str:
    """Label/generation text: per-chunk bodies joined by the separator."""
    for body in bodies:
        _check_reserved(body, "label body")
    return _SEP_LINE.join(bodies)


def split_block_output(text: str, expected_chunks: int) -> list[str]:
    """Split generated text into per-chunk fragment texts.

    Accepts either the bare label format or the full block format (context
    delimiters present); context parts are stripped. The separator count
    must match ``expected_chunks - 1``.
    """
    if expected_chunks < 1:
        raise ValueError("expected_chunks must be at least 1")
    parts = text.split(_SEP_LINE)
    if len(parts) != expected_chunks:
        raise MalformedOutputError(
            f"expected {expected_chunks - 1} separator(s), found {len(parts) - 1}"
        )
    fragments = []
    for part in parts:
        pieces = part.split(_CTX_LINE)
        if len(pieces) == 3:
            fragments.append(pieces[1])
        elif len(pieces) == 1:
            fragments.append(pieces[0])
        else:
            raise MalformedOutputError(
                f"segment carries {len(pieces) - 1} context delimiter(s)"
            )
    return fragments


def build_ingredient_index(
    project_root: str | Path, lang: SubjectLanguage
) -> tuple[IngredientIndex, dict[str, str]]:
    """Walk every parseable source file and index methods, fields, and
    caller-to-callee relations. Parse failures are recorded per file and
    a partial index is returned."""
    root = Path(project_root)
    methods: list[tuple[str, str, str]] = []
    fields: list[tuple[str, str, str]] = []
    calls: set[tuple[str, str]] = set()
    errors: dict[str, str] = {}
    for path in sorted(root.rglob("*.mj")):
        rel = str(path.relative_to(root))
        try:
            tree = lang.parse(path.read_text())
        except ParseError as exc:
            errors[rel] = str(exc)
            continue
        _walk_ingredients(tree, rel, methods, fields, calls)
    names = {m[0] for m in methods}
    relations = tuple(sorted((c, d) for c, d in calls if c in names and d in names))
    index = IngredientIndex(
        methods=tuple(dict.fromkeys(methods)),
        fields_=tuple(dict.fromkeys(fields)),
        relations=relations,
    )
    return index, errors


def _walk_ingredients(tree, rel, methods, fields, calls):
    def visit(node, owner=None):
        if node.kind == "func":
            params = ",".join(p.children[0].value for p in node.children[1].children)
            signature = f"{node.value}({params})"
            methods.append((node.value, signature, rel))
            for callee in _called_names(node.children[2]):
                calls.add((node.value, callee))
        elif node.kind in ("field", "var_decl") and owner == "top":
            fields.append((node.value, node.children[0].value, rel))
        if node.kind == "class":
            for child in node.children:
                visit(child, owner="top")
        elif node.kind == "program":
            for child in node.children:
                visit(child, owner="top")

    visit(tree, owner=None)


def _called_names(node) -> set[str]:
    found = set()

    def visit(n):
        if n.kind == "call":
            found.add(n.value)
        for c in n.children:
            visit(c)

    visit(node)
    return found
