"""Patch optimization: filter, rank, and combine candidate fragments.

Ranking blends the generator's own score with a similarity prior that
favors conservative, buggy-adjacent edits:

    opt_score = p * norm_model + (1 - p) * sim
    sim       = 0.5 * action_conservatism + 0.5 * trigram_similarity
    action_conservatism = 1 / (1 + |edit script buggy -> fragment|)

Combination is a best-first frontier search over the product lattice of
per-chunk candidate pools, capped at MC emissions.
"""
from __future__ import annotations

import heapq
from collections import Counter
from collections.abc import Iterator, Sequence

from .lang import ParseError, SubjectLanguage
from .model import BuggyChunk, CampaignConfig, CandidateFragment, CombinedPatch
from .trees import GenericTree, dice, edit_script

__all__ = [
    "filter_candidates",
    "rank_candidates",
    "ngram_similarity",
    "combine",
    "EmptyPoolError",
]


class EmptyPoolError(ValueError):
    """A chunk retained no candidate fragments after filtering."""


def _splice(file_lines: Sequence[str], chunk: BuggyChunk, fragment_text: str) -> str:
    lines = list(file_lines)
    start = chunk.start_line - 1
    end = chunk.end_line
    replacement = fragment_text.split("\n") if fragment_text else []
    lines[start:end] = replacement
    return "\n".join(lines) + ("\n" if lines else "")


def filter_candidates(
    fragments: list[CandidateFragment],
    chunk: BuggyChunk,
    lang: SubjectLanguage,
    file_lines: Sequence[str],
) -> list[CandidateFragment]:
    """Drop unusable fragments, preserving relative order.

    Three rules: the fragment's substitution into the chunk's file must
    parse after normalization; normalized duplicates keep only the lowest
    model_rank; fragments identical to the buggy body are pointless.
    """
    buggy_norm = lang.normalize(chunk.body)
    survivors: list[CandidateFragment] = []
    seen_normals: set[str] = set()
    for frag in fragments:
        patched = _splice(file_lines, chunk, frag.text)
        try:
            lang.parse(lang.normalize(patched))
        except ParseError:
            continue
        normal = lang.normalize(frag.text)
        if normal == buggy_norm:
            continue
        if normal in seen_normals:
            continue
        seen_normals.add(normal)
        survivors.append(frag)
    return survivors


def ngram_similarity(a_tokens: Sequence[str], b_tokens: Sequence[str], n: int) -> float:
    """Dice coefficient over multisets of length-n token windows.

    A sequence shorter than n contributes itself as a single gram; two
    empty sequences are identical, hence 1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return dice(_grams(a_tokens, n), _grams(b_tokens, n))


def _grams(tokens: Sequence[str], n: int) -> Counter:
    tokens = tuple(tokens)
    if len(tokens) < n:
        return Counter([tokens])
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))


def _parse_or_empty(text: str, lang: SubjectLanguage) -> GenericTree:
    try:
        return lang.parse(text)
    except ParseError:
        return GenericTree("program")


def rank_candidates(
    fragments: list[CandidateFragment],
    chunk: BuggyChunk,
    cfg: CampaignConfig,
    lang: SubjectLanguage,
) -> list[CandidateFragment]:
    """Assign opt_scores and return fragments ordered best first.

    Ties break by ascending model_rank. Under the no_patch_optimization
    ablation the ranking is the model order and opt_score is the
    normalized model score alone.
    """
    if not fragments:
        return []
    scores = [f.model_score for f in fragments]
    lo, hi = min(scores), max(scores)
    span = hi - lo

    def norm_model(f: CandidateFragment) -> float:
        if span == 0:
            return 1.0  # single survivor or all-equal pool
        return (f.model_score - lo) / span

    if cfg.no_patch_optimization:
        scored = [f.with_opt_score(norm_model(f)) for f in fragments]
        return sorted(scored, key=lambda f: f.model_rank)

    buggy_tree = _parse_or_empty(lang.normalize(chunk.body), lang)
    buggy_tokens = lang.tokenize(chunk.body)
    scored = []
    for frag in fragments:
        frag_tree = _parse_or_empty(lang.normalize(frag.text), lang)
        script = edit_script(buggy_tree, frag_tree)
        conservatism = 1.0 / (1.0 + len(script))
        trigram = ngram_similarity(buggy_tokens, lang.tokenize(frag.text), cfg.ngram_n)
        sim = 0.5 * conservatism + 0.5 * trigram
        opt = cfg.p * norm_model(frag) + (1.0 - cfg.p) * sim
        scored.append(frag.with_opt_score(opt))
    return sorted(scored, key=lambda f: (-f.opt_score, f.model_rank))


def combine(
    per_chunk_ranked: list[list[CandidateFragment]],
    mc: int,
) -> Iterator[CombinedPatch]:
    """Emit combined patches in non-increasing aggregate-score order.

    Best-first frontier search over the product lattice with visited-set
    dedup; stops after min(product of pool sizes, mc) emissions. Ties
    break lexicographically on the per-chunk rank indices.
    """
    if mc < 1:
        raise ValueError("mc must be at least 1")
    for idx, pool in enumerate(per_chunk_ranked):
        if not pool:
            raise EmptyPoolError(f"chunk {idx} has no surviving candidates")

    pools = per_chunk_ranked
    start = (0,) * len(pools)

    def score(index: tuple[int, ...]) -> float:
        return sum(pool[i].opt_score for pool, i in zip(pools, index))

    heap: list[tuple[float, tuple[int, ...]]] = [(-score(start), start)]
    visited = {start}
    emitted = 0
    while heap and emitted < mc:
        neg, index = heapq.heappop(heap)
        emitted += 1
        fragments = tuple(
            sorted((pool[i] for pool, i in zip(pools, index)),
                   key=lambda f: f.chunk_id)
        )
        yield CombinedPatch(
            fragments=fragments,
            aggregate_score=-neg,
            emit_index=emitted,
        )
        for dim in range(len(pools)):
            if index[dim] + 1 < len(pools[dim]):
                nxt = index[:dim] + (index[dim] + 1,) + index[dim + 1:]
                if nxt not in visited:
                    visited.add(nxt)
                    heapq.heappush(heap, (-score(nxt), nxt))
