import random
from functools import lru_cache

import pytest

from blockrepair.diffs import (
    FaultEntry,
    FaultSpec,
    count_effective_locations,
    extract_chunk_pairs,
    extract_chunks,
    load_fault_spec,
    replay_chunks,
)
from blockrepair.minilang import MiniJavaLanguage
from blockrepair.model import ModelError, SourceText


def oracle_chunks(a, b):
    """Independent exhaustive-LCS differ: recursive, memoized, with the
    same canonical tie-break (earliest match, buggy side first)."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def lcs_len(i, j):
        if i == len(a) or j == len(b):
            return 0
        best = 0
        if a[i] == b[j]:
            best = 1 + lcs_len(i + 1, j + 1)
        return max(best, lcs_len(i + 1, j), lcs_len(i, j + 1))

    def walk(i, j, matches):
        while i < len(a) and j < len(b):
            if a[i] == b[j] and lcs_len(i, j) == lcs_len(i + 1, j + 1) + 1:
                matches.append((i, j))
                i, j = i + 1, j + 1
            elif lcs_len(i + 1, j) >= lcs_len(i, j + 1):
                i += 1
            else:
                j += 1
        return matches

    matches = walk(0, 0, [])
    anchors = [(-1, -1)] + matches + [(len(a), len(b))]
    groups = []
    for (i0, j0), (i1, j1) in zip(anchors, anchors[1:]):
        deleted = a[i0 + 1:i1]
        inserted = b[j0 + 1:j1]
        if deleted or inserted:
            groups.append((i0 + 1, i1, deleted, inserted))
    return groups


def random_pair(rng, max_lines=40):
    vocab = [f"line{i}" for i in range(9)]
    n = rng.randint(0, max_lines)
    a = [rng.choice(vocab) for _ in range(n)]
    b = list(a)
    for _ in range(rng.randint(0, 8)):
        op = rng.choice(["ins", "del", "sub"])
        if op == "ins" or not b:
            b.insert(rng.randint(0, len(b)), rng.choice(vocab))
        elif op == "del":
            b.pop(rng.randrange(len(b)))
        else:
            b[rng.randrange(len(b))] = rng.choice(vocab)
    return a, b


class TestExtractChunks:
    def test_identical_inputs(self):
        src = SourceText(("a", "b"), "f")
        assert extract_chunks(src, src) == []

    def test_single_line_replacement(self):
        buggy = SourceText(tuple(f"l{i}" for i in range(1, 10)), "f")
        fixed_lines = list(buggy.lines)
        fixed_lines[4] = "changed"
        chunks = extract_chunks(buggy, SourceText(tuple(fixed_lines), "f"))
        assert len(chunks) == 1
        assert (chunks[0].start_line, chunks[0].end_line) == (5, 5)
        assert chunks[0].deleted_lines == ("l5",)

    def test_two_groups_split_by_unchanged_line(self):
        buggy = SourceText(("a", "b", "c", "d", "e"), "f")
        fixed = SourceText(("a", "B", "c", "D", "e"), "f")
        chunks = extract_chunks(buggy, fixed)
        assert [(c.start_line, c.end_line) for c in chunks] == [(2, 2), (4, 4)]

    def test_pure_insertion_is_omission_chunk(self):
        buggy = SourceText(("a", "b"), "f")
        fixed = SourceText(("a", "new", "b"), "f")
        chunks = extract_chunks(buggy, fixed)
        assert len(chunks) == 1
        assert chunks[0].is_omission
        assert (chunks[0].start_line, chunks[0].end_line) == (2, 1)
        assert chunks[0].effective_locations == 1

    def test_matches_lcs_oracle_on_random_pairs(self):
        rng = random.Random(20240817)
        for trial in range(500):
            a, b = random_pair(rng)
            A, B = SourceText(tuple(a), "f"), SourceText(tuple(b), "f")
            pairs = extract_chunk_pairs(A, B)
            got = [
                (c.start_line - 1, c.end_line, c.deleted_lines, ins)
                for c, ins in pairs
            ]
            assert got == oracle_chunks(a, b), f"trial {trial}"
            assert replay_chunks(A, pairs).lines == B.lines, f"trial {trial}"

    def test_replay_works_in_both_directions(self):
        # the leftmost canonical alignment need not pick mirrored match
        # sets, but replay must reconstruct the target either way
        rng = random.Random(5)
        for _ in range(100):
            a, b = random_pair(rng, max_lines=30)
            A, B = SourceText(tuple(a), "f"), SourceText(tuple(b), "f")
            assert replay_chunks(A, extract_chunk_pairs(A, B)).lines == B.lines
            assert replay_chunks(B, extract_chunk_pairs(B, A)).lines == A.lines


class TestFaultSpec:
    def test_json_round_trip(self):
        spec = FaultSpec("bug-1", (FaultEntry("f", 5, 5), FaultEntry("g", 7, 6)))
        assert FaultSpec.from_json(spec.to_json()) == spec

    def test_rejects_overlap(self):
        with pytest.raises(ModelError):
            FaultSpec("b", (FaultEntry("f", 1, 3), FaultEntry("f", 2, 4)))

    def test_rejects_unsorted(self):
        with pytest.raises(ModelError):
            FaultSpec("b", (FaultEntry("f", 5, 5), FaultEntry("f", 1, 1)))


class TestLoadFaultSpec:
    def make_project(self, tmp_path, n_lines=10):
        (tmp_path / "F").write_text(
            "\n".join(f"line {i};" for i in range(1, n_lines + 1)) + "\n")
        return tmp_path

    def test_direct_read(self, tmp_path):
        root = self.make_project(tmp_path)
        spec = FaultSpec("b", (FaultEntry("F", 5, 5),))
        chunks = load_fault_spec(spec, root)
        assert chunks[0].deleted_lines == ("line 5;",)

    def test_omission_entry(self, tmp_path):
        root = self.make_project(tmp_path)
        spec = FaultSpec("b", (FaultEntry("F", 7, 6),))
        chunks = load_fault_spec(spec, root)
        assert chunks[0].is_omission
        assert chunks[0].effective_locations == 1

    def test_out_of_range_names_entry(self, tmp_path):
        root = self.make_project(tmp_path)
        spec = FaultSpec("b", (FaultEntry("F", 5, 99),))
        with pytest.raises(ModelError, match=r"\(F, 5, 99\)"):
            load_fault_spec(spec, root)

    def test_missing_file_names_entry(self, tmp_path):
        spec = FaultSpec("b", (FaultEntry("G", 1, 1),))
        with pytest.raises(ModelError, match="G"):
            load_fault_spec(spec, tmp_path)


class TestEffectiveLocations:
    lang = MiniJavaLanguage()

    def chunk(self, lines):
        return type("C", (), {
            "is_omission": False, "deleted_lines": tuple(lines)})()

    def test_null_blank_comment_excluded(self):
        chunk = self.chunk(["x = 1;", "", "// note", ";"])
        assert count_effective_locations(chunk, self.lang) == 1

    def test_empty_bodied_loop_is_null(self):
        chunk = self.chunk(["for (int i = 0; i < 10; i++);"])
        assert count_effective_locations(chunk, self.lang) == 0

    def test_plain_statements_all_count(self):
        chunk = self.chunk(["a = 1;", "b = 2;", "c = a + b;", "call(c);"])
        assert count_effective_locations(chunk, self.lang) == 4

    def test_bounds(self):
        for lines in (["x = 1;"], [";", ";"], ["// only", ""]):
            chunk = self.chunk(lines)
            n = count_effective_locations(chunk, self.lang)
            assert 0 <= n <= len(lines)
