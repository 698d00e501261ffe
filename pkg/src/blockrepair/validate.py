"""Applying combined patches and classifying them CO / PL / CR.

Each validation runs in an isolated copy of the subject project. The
build and test commands are arbitrary argv vectors from the project
config; exit code 0 means success. ``{python}`` in a command expands to
the running interpreter, and commands execute with the patched copy as
working directory.

Correctness (CR) is decided by normalized-tree equality against the
reference fix, optionally widened by an allow-list of vetted equivalent
patch texts.
"""
from __future__ import annotations

import json
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .lang import SubjectLanguage, trees_equal_normalized
from .model import (
    BugRecord,
    BuggyChunk,
    BugType,
    CombinedPatch,
    ModelError,
    SourceText,
    Verdict,
    VerdictKind,
    verdict_rank,
)

__all__ = [
    "SubjectProject",
    "Deadline",
    "apply_patch",
    "validate_patch",
    "run_bug",
    "ApplyError",
]


class ApplyError(ValueError):
    pass


@dataclass(frozen=True)
class SubjectProject:
    """A repairable project: sources plus build/test commands."""

    root: Path
    build_command: tuple[str, ...]
    test_command: tuple[str, ...]
    module_id: str = ""
    reference_fix: dict[int, str] | None = None  # chunk_id -> replacement text
    allowed_equivalents: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "build_command", tuple(self.build_command))
        object.__setattr__(self, "test_command", tuple(self.test_command))
        if not self.build_command or not self.test_command:
            raise ModelError("build and test commands must be declared")

    @classmethod
    def load(cls, root: str | Path) -> "SubjectProject":
        root = Path(root)
        doc = json.loads((root / "project.json").read_text())
        reference = None
        ref_path = root / "reference_fix.json"
        if ref_path.exists():
            raw = json.loads(ref_path.read_text())
            reference = {int(k): v for k, v in raw.items()}
        allow_path = root / "allowed_equivalents.json"
        allowed = ()
        if allow_path.exists():
            allowed = tuple(json.loads(allow_path.read_text()))
        return cls(
            root=root,
            build_command=tuple(doc["build_command"]),
            test_command=tuple(doc["test_command"]),
            module_id=doc.get("module_id", ""),
            reference_fix=reference,
            allowed_equivalents=allowed,
        )


class Deadline:
    """Wall-clock budget for one bug's whole pipeline."""

    def __init__(self, seconds: float):
        self.seconds = seconds
        self.start = time.monotonic()

    def remaining(self) -> float:
        return self.seconds - (time.monotonic() - self.start)

    def expired(self) -> bool:
        return self.remaining() <= 0


def apply_patch(
    project_root: Path,
    chunks: list[BuggyChunk],
    patch: CombinedPatch,
    dest_root: Path,
) -> Path:
    """Copy the project and splice each fragment over its chunk's range.

    Later-in-file chunks are applied first so earlier line numbers stay
    valid. The original project is untouched.
    """
    if [f.chunk_id for f in patch.fragments] != [c.chunk_id for c in chunks]:
        raise ApplyError("fragments do not align with chunks by chunk_id")
    if dest_root.exists():
        shutil.rmtree(dest_root)
    shutil.copytree(project_root, dest_root)
    by_file: dict[str, list[tuple[BuggyChunk, str]]] = {}
    for chunk, frag in zip(chunks, patch.fragments):
        by_file.setdefault(chunk.file, []).append((chunk, frag.text))
    for rel, items in by_file.items():
        path = dest_root / rel
        if not path.is_file():
            raise ApplyError(f"chunk file {rel} missing from project")
        source = SourceText.from_string(path.read_text(), rel)
        lines = list(source.lines)
        for chunk, text in sorted(items, key=lambda it: it[0].start_line,
                                  reverse=True):
            if chunk.end_line > len(source):
                raise ApplyError(
                    f"chunk {chunk.chunk_id} range beyond end of {rel}")
            current = lines[chunk.start_line - 1 : chunk.end_line]
            if tuple(current) != chunk.deleted_lines:
                raise ApplyError(
                    f"chunk {chunk.chunk_id} drifted: {rel} changed since extraction")
            replacement = text.split("\n") if text else []
            lines[chunk.start_line - 1 : chunk.end_line] = replacement
        path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return dest_root


def _run_command(command: tuple[str, ...], cwd: Path, timeout: float,
                 log_path: Path | None) -> tuple[int | None, str]:
    argv = [sys.executable if part == "{python}" else part for part in command]
    try:
        proc = subprocess.run(
            argv, cwd=cwd, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired:
        return None, "timeout"
    except OSError as exc:
        raise ApplyError(f"cannot spawn {argv[0]!r}: {exc}")
    output = proc.stdout + proc.stderr
    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        log_path.write_text(output)
    return proc.returncode, output


def _is_correct(patched_root: Path, project: SubjectProject,
                chunks: list[BuggyChunk], patch: CombinedPatch,
                lang: SubjectLanguage) -> bool:
    if project.reference_fix is None:
        return False
    combined_text = "\n".join(f.text for f in patch.fragments)
    if lang.normalize(combined_text) in {
        lang.normalize(t) for t in project.allowed_equivalents
    }:
        return True
    # compare every touched file against the reference-applied version
    by_file: dict[str, list[BuggyChunk]] = {}
    for chunk in chunks:
        by_file.setdefault(chunk.file, []).append(chunk)
    for rel, file_chunks in by_file.items():
        original = SourceText.from_string((project.root / rel).read_text(), rel)
        ref_lines = list(original.lines)
        for chunk in sorted(file_chunks, key=lambda c: c.start_line, reverse=True):
            text = project.reference_fix[chunk.chunk_id]
            replacement = text.split("\n") if text else []
            ref_lines[chunk.start_line - 1 : chunk.end_line] = replacement
        patched_text = (patched_root / rel).read_text()
        reference_text = "\n".join(ref_lines) + ("\n" if ref_lines else "")
        if not trees_equal_normalized(patched_text, reference_text, lang):
            return False
    return True


def validate_patch(
    patched_root: Path,
    project: SubjectProject,
    chunks: list[BuggyChunk],
    patch: CombinedPatch,
    lang: SubjectLanguage,
    deadline: Deadline,
    log_dir: Path | None = None,
) -> Verdict:
    """Run the CO -> PL -> CR funnel for one applied patch."""
    if deadline.expired():
        return Verdict(VerdictKind.TIMEOUT, "deadline expired before build")
    build_log = log_dir / "build.log" if log_dir else None
    code, _ = _run_command(project.build_command, patched_root,
                           deadline.remaining(), build_log)
    if code is None:
        return Verdict(VerdictKind.TIMEOUT, "build timed out")
    if code != 0:
        return Verdict(VerdictKind.FILTERED, f"build failed (exit {code})")
    if deadline.expired():
        return Verdict(VerdictKind.TIMEOUT, "deadline expired before tests")
    test_log = log_dir / "test.log" if log_dir else None
    code, _ = _run_command(project.test_command, patched_root,
                           deadline.remaining(), test_log)
    if code is None:
        return Verdict(VerdictKind.TIMEOUT, "tests timed out")
    if code != 0:
        return Verdict(VerdictKind.COMPILED_ONLY, f"tests failed (exit {code})")
    if _is_correct(patched_root, project, chunks, patch, lang):
        return Verdict(VerdictKind.CORRECT, "matches reference fix")
    return Verdict(VerdictKind.PLAUSIBLE, "passes tests, differs from reference")


@dataclass
class BugRunResult:
    record: BugRecord
    verdicts: list[tuple[int, Verdict]] = field(default_factory=list)


def run_bug(
    project: SubjectProject,
    chunks: list[BuggyChunk],
    combined_stream,
    lang: SubjectLanguage,
    deadline: Deadline,
    bug_id: str,
    work_dir: Path,
    log_root: Path | None = None,
) -> BugRunResult:
    """Consume combinations in emit order until CR, exhaustion, or timeout."""
    best = VerdictKind.FILTERED
    examined = 0
    verdicts: list[tuple[int, Verdict]] = []
    for patch in combined_stream:
        if deadline.expired():
            verdicts.append((patch.emit_index, Verdict(VerdictKind.TIMEOUT,
                                                       "deadline expired")))
            best = max(best, VerdictKind.TIMEOUT, key=verdict_rank)
            break
        examined += 1
        dest = work_dir / f"patch-{patch.emit_index}"
        log_dir = (log_root / f"patch-{patch.emit_index}") if log_root else None
        try:
            apply_patch(project.root, chunks, patch, dest)
            verdict = validate_patch(dest, project, chunks, patch, lang,
                                     deadline, log_dir)
        except ApplyError as exc:
            verdict = Verdict(VerdictKind.APPLY_ERROR, str(exc))
        finally:
            shutil.rmtree(dest, ignore_errors=True)
        verdicts.append((patch.emit_index, verdict))
        best = max(best, verdict.kind, key=verdict_rank)
        if verdict.kind is VerdictKind.CORRECT:
            break
    location_count = max(1, sum(c.effective_locations for c in chunks))
    chunk_count = len(chunks)
    bug_type = (BugType.TYPE3 if chunk_count >= 2
                else BugType.TYPE1 if location_count == 1 else BugType.TYPE2)
    record = BugRecord(
        bug_id=bug_id,
        module_id=project.module_id,
        chunk_count=chunk_count,
        location_count=location_count,
        bug_type=bug_type,
        best_verdict=best,
        patches_examined=examined,
    )
    return BugRunResult(record=record, verdicts=verdicts)
