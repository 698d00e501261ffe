"""Acceptance gate: one test per release criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line naming its
criterion (run with ``pytest -s`` to see them live).
"""
import functools
import itertools
import json
import random
import time
from pathlib import Path

import pytest

from blockrepair.blocks import build_block, serialize_label, split_block_output
from blockrepair.campaign import (
    BugInput,
    classify_bug,
    range_stats,
    read_results_csv,
    run_campaign,
)
from blockrepair.diffs import FaultSpec, extract_chunk_pairs, load_fault_spec, replay_chunks
from blockrepair.minilang import MiniJavaLanguage
from blockrepair.model import (
    BugType,
    CampaignConfig,
    CandidateFragment,
    SourceText,
    VerdictKind,
)
from blockrepair.optimize import combine, ngram_similarity
from blockrepair.trees import EditScript, action_similarity, edit_script
from test_diffs import oracle_chunks, random_pair
from test_trees import random_tree, script_of

lang = MiniJavaLanguage()
CORPUS = Path(__file__).parent / "corpus"
DATA = Path(__file__).parent / "data"

BUG_IDS = sorted(p.name for p in CORPUS.iterdir() if p.is_dir())

FAST = dict(beam_size=20, mc=100, timeout_seconds=120.0, seed=1)


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}")
                raise
            print(f"[PASS] {name}")
        return inner
    return wrap


def run_full(results_root, **overrides):
    cfg = CampaignConfig(**{**FAST, **overrides})
    bugs = [BugInput(b, CORPUS / b) for b in BUG_IDS]
    return run_campaign(cfg, bugs, lang, results_root)


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("campaign")
    started = time.monotonic()
    report = run_full(root)
    elapsed = time.monotonic() - started
    return report, root, elapsed


class TestAcceptance:
    @criterion("mini-corpus end-to-end: >=9/10 CR, combination-only CR, <2min")
    def test_mini_corpus_end_to_end(self, full_run):
        report, root, elapsed = full_run
        assert not report.errors, report.errors
        assert len(report.records) == 10
        by_chunks = {1: 0, 2: 0, 3: 0}
        for rec in report.records:
            by_chunks[rec.chunk_count] += 1
        assert by_chunks == {1: 4, 2: 4, 3: 2}
        cr = [r for r in report.records
              if r.best_verdict is VerdictKind.CORRECT]
        assert len(cr) >= 9, f"only {len(cr)}/10 CR"
        assert elapsed < 120.0, f"campaign took {elapsed:.1f}s"

        # at least one multi-chunk CR where no single beam output is the
        # complete correct label
        combination_only = 0
        for rec in cr:
            if rec.chunk_count < 2:
                continue
            ref = json.loads(
                (CORPUS / rec.bug_id / "reference_fix.json").read_text())
            ref_parts = [lang.normalize(ref[str(i)])
                         for i in range(rec.chunk_count)]
            fully_correct_output = False
            cand_file = root / rec.bug_id / "candidates.jsonl"
            for line in cand_file.read_text().splitlines():
                text = json.loads(line)["text"]
                try:
                    parts = split_block_output(text, rec.chunk_count)
                except ValueError:
                    continue
                if [lang.normalize(p) for p in parts] == ref_parts:
                    fully_correct_output = True
                    break
            if not fully_correct_output:
                combination_only += 1
        assert combination_only >= 1

    @criterion("cap arithmetic: 500^3 -> 10000, 3x4 -> 12, ordered emissions")
    def test_cap_arithmetic(self):
        def pool(chunk_id, size, score=0.5):
            return [CandidateFragment(chunk_id, (f"s{i};",), i + 1, -0.01 * i,
                                      opt_score=score) for i in range(size)]

        big = [pool(0, 500), pool(1, 500), pool(2, 500)]
        assert sum(1 for _ in combine(big, mc=10_000)) == 10_000
        small = [pool(0, 3), pool(1, 4)]
        assert sum(1 for _ in combine(small, mc=10_000)) == 12
        rng = random.Random(8)
        varied = [pool(c, 6, 0.0) for c in range(2)]
        for p in varied:
            scores = sorted((rng.random() for _ in p), reverse=True)
            p[:] = [f.with_opt_score(s) for f, s in zip(p, scores)]
        emitted = [c.aggregate_score for c in combine(varied, mc=10_000)]
        assert emitted == sorted(emitted, reverse=True)

    @criterion("combination oracle: 50 random 20^3 instances match "
               "brute force top-100 exactly")
    def test_combination_oracle(self):
        rng = random.Random(2024)
        for trial in range(50):
            pools = []
            for chunk_id in range(3):
                scores = sorted((round(rng.random(), 6) for _ in range(20)),
                                reverse=True)
                pools.append([
                    CandidateFragment(chunk_id, (f"c{chunk_id}_{i};",),
                                      i + 1, -0.01 * i, opt_score=s)
                    for i, s in enumerate(scores)])
            got = [
                (round(-p.aggregate_score, 9),
                 tuple(f.model_rank - 1 for f in p.fragments))
                for p in combine(pools, mc=100)
            ]
            expected = sorted(
                ((round(-sum(pools[d][i].opt_score for d, i in enumerate(ix)),
                        9), ix)
                 for ix in itertools.product(range(20), repeat=3)),
            )[:100]
            assert got == expected, f"trial {trial}"

    @criterion("diff oracle: 500 random pairs match exhaustive LCS, "
               "replay is byte-exact")
    def test_diff_oracle(self):
        rng = random.Random(424242)
        for trial in range(500):
            a, b = random_pair(rng, max_lines=40)
            A = SourceText(tuple(a), "f")
            B = SourceText(tuple(b), "f")
            pairs = extract_chunk_pairs(A, B)
            got = [(c.start_line - 1, c.end_line, c.deleted_lines, ins)
                   for c, ins in pairs]
            assert got == oracle_chunks(a, b), f"trial {trial}"
            replayed = replay_chunks(A, pairs)
            assert replayed.to_string() == B.to_string(), f"trial {trial}"

    @criterion("edit-script apply-back: 1000 random tree pairs")
    def test_edit_script_apply_back(self):
        from blockrepair.trees import apply_edit_script

        rng = random.Random(31337)
        for trial in range(1000):
            a = random_tree(rng, [rng.randint(1, 25)])
            b = random_tree(rng, [rng.randint(1, 25)])
            script = edit_script(a, b)
            assert apply_edit_script(script, a) == b, f"trial {trial}"

    @criterion("similarity properties: bounds, symmetry, worked example 0.5")
    def test_similarity_properties(self):
        assert ngram_similarity(["a", "b", "c", "d"],
                                ["b", "c", "d", "e"], 3) == 0.5
        rng = random.Random(6)
        for _ in range(200):
            x = [rng.choice("abc") for _ in range(rng.randint(0, 12))]
            y = [rng.choice("abc") for _ in range(rng.randint(0, 12))]
            v = ngram_similarity(x, y, 3)
            assert 0.0 <= v <= 1.0
            assert v == ngram_similarity(y, x, 3)
            assert ngram_similarity(x, x, 3) == 1.0
        assert ngram_similarity(list("aaaa"), list("bbbb"), 3) == 0.0

        s1 = script_of(["update", "insert"])
        s2 = script_of(["delete", "move"], label="m")
        assert action_similarity(s1, s1) == 1.0
        assert action_similarity(s1, s2) == 0.0
        assert action_similarity(EditScript(), EditScript()) == 1.0
        for _ in range(100):
            a = random_tree(rng, [rng.randint(1, 10)])
            b = random_tree(rng, [rng.randint(1, 10)])
            c = random_tree(rng, [rng.randint(1, 10)])
            u, w = edit_script(a, b), edit_script(a, c)
            v = action_similarity(u, w)
            assert 0.0 <= v <= 1.0
            assert v == action_similarity(w, u)

    @criterion("block round trip: label split byte-exact, blocks <=512 tokens "
               "for every corpus bug")
    def test_block_round_trip(self):
        cfg = CampaignConfig()
        for bug_id in BUG_IDS:
            root = CORPUS / bug_id
            spec = FaultSpec.from_json((root / "faults.json").read_text())
            chunks = load_fault_spec(spec, root, lang)
            ref = json.loads((root / "reference_fix.json").read_text())
            bodies = [ref[str(c.chunk_id)] for c in chunks]
            assert split_block_output(serialize_label(bodies),
                                      len(chunks)) == bodies, bug_id
            sources = {}
            for path in sorted(root.rglob("*.mj")):
                rel = str(path.relative_to(root))
                sources[rel] = SourceText.from_string(path.read_text(), rel)
            block = build_block(chunks, sources, cfg, lang, bug_id)
            assert block.token_count <= 512, bug_id

    @criterion("classification and published stats: 20-case table, "
               "chunk/location histograms, 37+7+21=65")
    def test_classification_and_stats(self):
        cases = [
            (1, 1, BugType.TYPE1), (1, 2, BugType.TYPE2),
            (1, 3, BugType.TYPE2), (1, 4, BugType.TYPE2),
            (1, 9, BugType.TYPE2), (1, 30, BugType.TYPE2),
            (2, 1, BugType.TYPE3), (2, 2, BugType.TYPE3),
            (2, 8, BugType.TYPE3), (3, 1, BugType.TYPE3),
            (3, 3, BugType.TYPE3), (3, 12, BugType.TYPE3),
            (4, 4, BugType.TYPE3), (5, 1, BugType.TYPE3),
            (5, 10, BugType.TYPE3), (6, 6, BugType.TYPE3),
            (7, 2, BugType.TYPE3), (8, 40, BugType.TYPE3),
            (9, 9, BugType.TYPE3), (10, 1, BugType.TYPE3),
        ]
        assert len(cases) == 20
        for chunks, locations, expected in cases:
            assert classify_bug(chunks, locations) is expected

        # null-location lines contribute zero effective locations
        from blockrepair.diffs import count_effective_locations

        class _Chunk:
            is_omission = False

        for line in (";", "for (int i = 0; i < 10; i++);"):
            c = _Chunk()
            c.deleted_lines = (line,)
            assert count_effective_locations(c, lang) == 0, line

        records = read_results_csv(DATA / "published_results.csv")
        chunk_hist, loc_hist = range_stats(records)
        assert chunk_hist == {1: 44, 2: 18, 3: 3}
        assert loc_hist == {"1": 37, "2": 12, "3": 7, "4": 2,
                            "5-9": 4, "10+": 3}
        per_type = {"Type1": 0, "Type2": 0, "Type3": 0}
        for rec in records:
            if rec.best_verdict is VerdictKind.CORRECT:
                per_type[rec.bug_type.value] += 1
        assert per_type == {"Type1": 37, "Type2": 7, "Type3": 21}
        assert sum(per_type.values()) == 65

    @criterion("ablation direction: strict CR drop without patch "
               "optimization and without contexts")
    def test_ablation_direction(self, full_run, tmp_path):
        report, _, _ = full_run
        cr_full = report.totals()["CR"]
        cr_no_opt = run_full(tmp_path / "no-opt",
                             no_patch_optimization=True).totals()["CR"]
        cr_no_ctx = run_full(tmp_path / "no-ctx",
                             no_buggy_contexts=True).totals()["CR"]
        assert cr_full >= cr_no_opt
        assert cr_full >= cr_no_ctx
        assert cr_no_opt < cr_full, "patch optimization ablation did not drop"
        assert cr_no_ctx < cr_full, "context ablation did not drop"

    @criterion("determinism: same-seed campaigns produce byte-identical "
               "report.json")
    def test_determinism(self, full_run, tmp_path):
        _, root, _ = full_run
        run_full(tmp_path / "again")
        first = (root / "report.json").read_bytes()
        second = (tmp_path / "again" / "report.json").read_bytes()
        assert first == second
