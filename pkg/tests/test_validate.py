import json
import time

import pytest

from blockrepair.minilang import MiniJavaLanguage
from blockrepair.model import (
    BuggyChunk,
    BugType,
    CandidateFragment,
    CombinedPatch,
    ModelError,
    VerdictKind,
)
from blockrepair.validate import (
    ApplyError,
    Deadline,
    SubjectProject,
    apply_patch,
    run_bug,
    validate_patch,
)

lang = MiniJavaLanguage()

BUGGY_SOURCE = "int inc(int x) {\n  return x - 1;\n}\n"
FIX_TEXT = "  return x + 1;"
PROJECT_JSON = {
    "build_command": ["{python}", "-m", "blockrepair.minilang", "check", "."],
    "test_command": ["{python}", "-m", "blockrepair.minilang", "run-tests", "."],
    "module_id": "mod-test",
}


@pytest.fixture
def project(tmp_path):
    root = tmp_path / "subject"
    root.mkdir()
    (root / "m.mj").write_text(BUGGY_SOURCE)
    (root / "tests.json").write_text(json.dumps(
        [{"call": "inc(3)", "expect": 4}, {"call": "inc(-1)", "expect": 0}]))
    (root / "project.json").write_text(json.dumps(PROJECT_JSON))
    (root / "reference_fix.json").write_text(json.dumps({"0": FIX_TEXT}))
    return SubjectProject.load(root)


CHUNK = BuggyChunk(0, "m.mj", 2, 2, ("  return x - 1;",), 1)


def patch_of(text, emit_index=1):
    frag = CandidateFragment(0, tuple(text.split("\n")), 1, 0.0, opt_score=0.5)
    return CombinedPatch((frag,), aggregate_score=0.5, emit_index=emit_index)


def deadline(seconds=60.0):
    return Deadline(seconds)


class TestSubjectProject:
    def test_load(self, project):
        assert project.module_id == "mod-test"
        assert project.reference_fix == {0: FIX_TEXT}
        assert project.build_command[0] == "{python}"

    def test_commands_required(self, tmp_path):
        with pytest.raises(ModelError):
            SubjectProject(tmp_path, (), ("x",))


class TestApplyPatch:
    def test_splices_fragment(self, project, tmp_path):
        dest = apply_patch(project.root, [CHUNK], patch_of(FIX_TEXT),
                           tmp_path / "patched")
        assert (dest / "m.mj").read_text() == BUGGY_SOURCE.replace(
            "  return x - 1;", FIX_TEXT)
        # original untouched
        assert (project.root / "m.mj").read_text() == BUGGY_SOURCE

    def test_empty_fragment_deletes_lines(self, project, tmp_path):
        dest = apply_patch(project.root, [CHUNK], patch_of(""),
                           tmp_path / "patched")
        assert (dest / "m.mj").read_text() == "int inc(int x) {\n}\n"

    def test_drifted_source_detected(self, project, tmp_path):
        drifted = BuggyChunk(0, "m.mj", 2, 2, ("  something else;",), 1)
        with pytest.raises(ApplyError, match="drifted"):
            apply_patch(project.root, [drifted], patch_of(FIX_TEXT),
                        tmp_path / "patched")

    def test_missing_file_detected(self, project, tmp_path):
        ghost = BuggyChunk(0, "ghost.mj", 1, 1, ("x;",), 1)
        with pytest.raises(ApplyError, match="ghost.mj"):
            apply_patch(project.root, [ghost], patch_of(FIX_TEXT),
                        tmp_path / "patched")

    def test_misaligned_fragments_detected(self, project, tmp_path):
        frag = CandidateFragment(1, ("x;",), 1, 0.0, opt_score=0.5)
        patch = CombinedPatch((frag,), aggregate_score=0.5, emit_index=1)
        with pytest.raises(ApplyError, match="align"):
            apply_patch(project.root, [CHUNK], patch, tmp_path / "patched")


class TestValidatePatch:
    def run(self, project, tmp_path, text, seconds=60.0):
        patch = patch_of(text)
        dest = apply_patch(project.root, [CHUNK], patch, tmp_path / "patched")
        return validate_patch(dest, project, [CHUNK], patch, lang,
                              deadline(seconds))

    def test_correct(self, project, tmp_path):
        verdict = self.run(project, tmp_path, FIX_TEXT)
        assert verdict.kind is VerdictKind.CORRECT

    def test_equivalent_tree_is_correct(self, project, tmp_path):
        # parenthesized form normalizes to the same tree
        verdict = self.run(project, tmp_path, "  return (x + 1);")
        assert verdict.kind is VerdictKind.CORRECT

    def test_allow_list_widens_correctness(self, project, tmp_path):
        allow = project.root / "allowed_equivalents.json"
        allow.write_text(json.dumps(["  return 1 + x;"]))
        project = SubjectProject.load(project.root)
        verdict = self.run(project, tmp_path, "  return 1 + x;")
        assert verdict.kind is VerdictKind.CORRECT

    def test_plausible(self, project, tmp_path):
        # passes both tests but is not the reference fix
        verdict = self.run(project, tmp_path, "  return (x + 2) - 1;")
        assert verdict.kind is VerdictKind.PLAUSIBLE

    def test_compiled_only(self, project, tmp_path):
        verdict = self.run(project, tmp_path, "  return x - 2;")
        assert verdict.kind is VerdictKind.COMPILED_ONLY

    def test_build_failure_filtered(self, project, tmp_path):
        verdict = self.run(project, tmp_path, "  return (x;")
        assert verdict.kind is VerdictKind.FILTERED

    def test_expired_deadline_times_out(self, project, tmp_path):
        verdict = self.run(project, tmp_path, FIX_TEXT, seconds=0.0)
        assert verdict.kind is VerdictKind.TIMEOUT

    def test_logs_written(self, project, tmp_path):
        patch = patch_of(FIX_TEXT)
        dest = apply_patch(project.root, [CHUNK], patch, tmp_path / "patched")
        log_dir = tmp_path / "logs"
        validate_patch(dest, project, [CHUNK], patch, lang, deadline(),
                       log_dir)
        assert (log_dir / "build.log").exists()
        assert (log_dir / "test.log").exists()


class TestRunBug:
    def test_stops_at_first_correct(self, project, tmp_path):
        stream = [patch_of("  return x - 2;", 1), patch_of(FIX_TEXT, 2),
                  patch_of("  return 4;", 3)]
        result = run_bug(project, [CHUNK], iter(stream), lang, deadline(),
                         "bug-1", tmp_path / "work")
        assert result.record.best_verdict is VerdictKind.CORRECT
        assert result.record.patches_examined == 2
        assert [i for i, _ in result.verdicts] == [1, 2]

    def test_exhaustion_keeps_best(self, project, tmp_path):
        stream = [patch_of("  return x - 2;", 1), patch_of("  return 4;", 2)]
        result = run_bug(project, [CHUNK], iter(stream), lang, deadline(),
                         "bug-1", tmp_path / "work")
        # "return 4;" passes the first test only, so best is CO
        assert result.record.best_verdict is VerdictKind.COMPILED_ONLY
        assert result.record.patches_examined == 2

    def test_apply_error_recorded(self, project, tmp_path):
        drift = BuggyChunk(0, "m.mj", 2, 2, ("  nope;",), 1)
        result = run_bug(project, [drift], iter([patch_of("x;", 1)]), lang,
                         deadline(), "bug-1", tmp_path / "work")
        assert result.verdicts[0][1].kind is VerdictKind.APPLY_ERROR

    def test_zero_deadline_is_timeout(self, project, tmp_path):
        result = run_bug(project, [CHUNK], iter([patch_of(FIX_TEXT, 1)]),
                         lang, deadline(0.0), "bug-1", tmp_path / "work")
        assert result.record.best_verdict is VerdictKind.TIMEOUT
        assert result.record.patches_examined == 0

    def test_record_classification(self, project, tmp_path):
        result = run_bug(project, [CHUNK], iter([patch_of(FIX_TEXT, 1)]),
                         lang, deadline(), "bug-1", tmp_path / "work")
        assert result.record.bug_type is BugType.TYPE1
        assert result.record.chunk_count == 1
        assert result.record.location_count == 1

    def test_workdirs_cleaned(self, project, tmp_path):
        work = tmp_path / "work"
        run_bug(project, [CHUNK], iter([patch_of(FIX_TEXT, 1)]), lang,
                deadline(), "bug-1", work)
        assert not any(work.glob("patch-*"))


class TestDeadline:
    def test_counts_down(self):
        d = Deadline(100.0)
        assert 0 < d.remaining() <= 100.0
        assert not d.expired()

    def test_expires(self):
        d = Deadline(0.0)
        time.sleep(0.001)
        assert d.expired()
