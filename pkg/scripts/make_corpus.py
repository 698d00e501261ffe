#!/usr/bin/env python3
"""Regenerates the seeded bug corpus under tests/corpus/.

Each bug is a self-contained subject project: sources, project.json,
faults.json, reference_fix.json, tests.json, and (for most bugs) a
hints.jsonl steering the mock generator. The script verifies every bug:
the buggy project builds but fails its tests, the reference fix passes
them, and the designated multi-chunk bugs have no single hinted output
that is fully correct.
"""
from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from blockrepair.blocks import serialize_label  # noqa: E402
from blockrepair.minilang import MiniJavaLanguage  # noqa: E402

CORPUS = REPO / "tests" / "corpus"

PROJECT_JSON = {
    "build_command": ["{python}", "-m", "blockrepair.minilang", "check", "."],
    "test_command": ["{python}", "-m", "blockrepair.minilang", "run-tests", "."],
}


def bug(bug_id, files, faults, ref_fix, tests, hints=None, combination_only=False):
    return {
        "bug_id": bug_id,
        "files": files,
        "faults": faults,
        "ref_fix": ref_fix,
        "tests": tests,
        "hints": hints or [],
        "combination_only": combination_only,
    }


BUGS = [
    # -- single chunk -------------------------------------------------
    bug(
        "alpha-1",
        {"main.mj": """int max2(int a, int b) {
  if (a < b) {
    return a;
  }
  return b;
}
"""},
        [("main.mj", 2, 2)],
        {0: "  if (a > b) {"},
        [{"call": "max2(3, 5)", "expect": 5},
         {"call": "max2(9, 2)", "expect": 9},
         {"call": "max2(4, 4)", "expect": 4}],
        hints=[(1, ["  if (a == b) {"]),
               (2, ["  if (a > b) {"])],
    ),
    bug(
        # fixable by the mock generator's own operator flip; no hints
        "alpha-2",
        {"main.mj": """int sumTo(int n) {
  int s = 0;
  for (int i = 1; i < n; i++) {
    s = s + i;
  }
  return s;
}
"""},
        [("main.mj", 3, 3)],
        {0: "  for (int i = 1; i <= n; i++) {"},
        [{"call": "sumTo(4)", "expect": 10},
         {"call": "sumTo(1)", "expect": 1}],
    ),
    bug(
        # one chunk, two buggy locations
        "alpha-3",
        {"main.mj": """int area(int w, int h) {
  int a = w + h;
  return a * 2;
}
"""},
        [("main.mj", 2, 3)],
        {0: "  int a = w * h;\n  return a;"},
        [{"call": "area(3, 4)", "expect": 12},
         {"call": "area(5, 1)", "expect": 5}],
        hints=[(1, ["  int a = w + h;\n  return a;"]),
               (2, ["  int a = w * h;\n  return a;"])],
    ),
    bug(
        # omission fault; repaired from context lines, no hints -- this
        # is the bug the no-contexts ablation loses
        "beta-1",
        {"main.mj": """int fact(int n) {
  int acc = 1;
  acc = acc * 1;
  for (int i = 2; i <= n; i++) {
  }
  return acc;
}
"""},
        [("main.mj", 5, 4)],
        {0: "    acc = acc * i;"},
        [{"call": "fact(4)", "expect": 24},
         {"call": "fact(1)", "expect": 1},
         {"call": "fact(0)", "expect": 1}],
    ),
    # -- two chunks ---------------------------------------------------
    bug(
        # correct fragments hinted deep in the beam behind many shallow
        # decoys -- this is the bug the no-patch-optimization ablation
        # loses to the combination cap
        "beta-2",
        {"main.mj": """int min2(int a, int b) {
  if (a < b) {
    return b;
  }
  return b;
}
int clamp(int x, int lo, int hi) {
  if (x < lo) {
    return lo;
  }
  if (x > hi) {
    return x;
  }
  return x;
}
"""},
        [("main.mj", 2, 5), ("main.mj", 11, 14)],
        {0: "  if (a < b) {\n    return a;\n  }\n  return b;",
         1: "  if (x > hi) {\n    return hi;\n  }\n  return x;"},
        [{"call": "min2(3, 5)", "expect": 3},
         {"call": "min2(9, 2)", "expect": 2},
         {"call": "clamp(5, 1, 10)", "expect": 5},
         {"call": "clamp(12, 1, 10)", "expect": 10},
         {"call": "clamp(0 - 3, 1, 10)", "expect": 1}],
        hints=(
            [(k, [f"  return a + {k};", f"  return x + {k};"])
             for k in range(1, 13)]
            + [(13, ["  if (a < b) {\n    return a;\n  }\n  return b;",
                     "  return x + 13;"]),
               (14, ["  return a + 13;",
                     "  if (x > hi) {\n    return hi;\n  }\n  return x;"])]
        ),
        combination_only=True,
    ),
    bug(
        "gamma-1",
        {"main.mj": """int sumAbs(int a, int b) {
  int x = a;
  if (a < 0) {
    x = a;
  }
  int y = b;
  if (b < 0) {
    y = b;
  }
  return x + y;
}
"""},
        [("main.mj", 4, 4), ("main.mj", 8, 8)],
        {0: "    x = 0 - a;", 1: "    y = 0 - b;"},
        [{"call": "sumAbs(0 - 3, 4)", "expect": 7},
         {"call": "sumAbs(3, 0 - 4)", "expect": 7},
         {"call": "sumAbs(0 - 2, 0 - 5)", "expect": 7},
         {"call": "sumAbs(1, 1)", "expect": 2}],
        hints=[(1, ["    x = 0 - a;", "    y = b + 1;"]),
               (2, ["    x = a + 1;", "    y = 0 - b;"])],
        combination_only=True,
    ),
    bug(
        # a plausible-but-wrong fragment passes the weak tests first
        "gamma-2",
        {"main.mj": """int parity(int n) {
  int m = n % 2;
  return m + 1;
}
int half(int n) {
  return n / 3;
}
"""},
        [("main.mj", 3, 3), ("main.mj", 6, 6)],
        {0: "  return m;", 1: "  return n / 2;"},
        [{"call": "parity(4)", "expect": 0},
         {"call": "parity(7)", "expect": 1},
         {"call": "half(8)", "expect": 4},
         {"call": "half(9)", "expect": 4}],
        hints=[(1, ["  return m * 1;", "  return n / 2;"]),
               (2, ["  return m;", "  return n / 2;"])],
    ),
    bug(
        "delta-1",
        {"a.mj": """int scale(int v) {
  return v * v;
}
""",
         "b.mj": """int shift(int v) {
  return v + v;
}
int apply2(int v) {
  return shift(scale(v));
}
"""},
        [("a.mj", 2, 2), ("b.mj", 2, 2)],
        {0: "  return v * 10;", 1: "  return v + 10;"},
        [{"call": "scale(2)", "expect": 20},
         {"call": "shift(3)", "expect": 13},
         {"call": "apply2(1)", "expect": 20}],
        hints=[(1, ["  return v * 10;", "  return v + 1;"]),
               (2, ["  return v * 2;", "  return v + 10;"])],
        combination_only=True,
    ),
    # -- three chunks -------------------------------------------------
    bug(
        "delta-2",
        {"main.mj": """int f1(int x) {
  return x;
}
int f2(int x) {
  return x;
}
int f3(int x) {
  return x;
}
int total(int x) {
  return f1(x) + f2(x) + f3(x);
}
"""},
        [("main.mj", 2, 2), ("main.mj", 5, 5), ("main.mj", 8, 8)],
        {0: "  return x + 1;", 1: "  return x + 2;", 2: "  return x + 3;"},
        [{"call": "f1(0)", "expect": 1},
         {"call": "f2(0)", "expect": 2},
         {"call": "f3(0)", "expect": 3},
         {"call": "total(5)", "expect": 21}],
        hints=[(1, ["  return x + 1;", "  return x - 1;", "  return x - 1;"]),
               (2, ["  return x - 2;", "  return x + 2;", "  return x - 2;"]),
               (3, ["  return x - 3;", "  return x - 3;", "  return x + 3;"])],
        combination_only=True,
    ),
    bug(
        # middle chunk is an omission inside a loop; wrong fill-ins leave
        # the loop infinite and run into the interpreter's step budget
        "epsilon-1",
        {"main.mj": """int sumOdd(int n) {
  int s = 0;
  for (int i = 0; i <= n; i++) {
    if (i % 2 == 1) {
      s = s + 1;
    }
  }
  return s;
}
int countDown(int n) {
  int c = 0;
  while (n > 0) {
    c = c + 1;
  }
  return c;
}
int twice(int n) {
  return n * n;
}
"""},
        [("main.mj", 5, 5), ("main.mj", 14, 13), ("main.mj", 18, 18)],
        {0: "      s = s + i;", 1: "    n = n - 1;", 2: "  return n + n;"},
        [{"call": "sumOdd(5)", "expect": 9},
         {"call": "countDown(3)", "expect": 3},
         {"call": "countDown(0)", "expect": 0},
         {"call": "twice(3)", "expect": 6},
         {"call": "twice(0)", "expect": 0}],
        hints=[(1, ["      s = s + i;", "    c = c + 2;", "  return n - n;"]),
               (2, ["      s = s + n;", "    n = n - 1;", "  return n - 1;"]),
               (3, ["      s = s - i;", "    n = n - 2;", "  return n + n;"])],
        combination_only=True,
    ),
]


def apply_reference(files, faults, ref_fix):
    fixed = {}
    per_file = {}
    for chunk_id, (rel, start, end) in enumerate(faults):
        per_file.setdefault(rel, []).append((chunk_id, start, end))
    for rel, text in files.items():
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        for chunk_id, start, end in sorted(per_file.get(rel, []),
                                           key=lambda t: t[1], reverse=True):
            repl = ref_fix[chunk_id].split("\n") if ref_fix[chunk_id] else []
            lines[start - 1:end] = repl
        fixed[rel] = "\n".join(lines) + "\n"
    return fixed


def run_minilang(cmd, cwd):
    return subprocess.run(
        [sys.executable, "-m", "blockrepair.minilang", cmd, "."],
        cwd=cwd, capture_output=True, text=True,
        env={"PYTHONPATH": str(REPO / "src"), "PATH": "/usr/bin:/bin"},
    ).returncode


def write_bug(spec, verify_dir):
    bug_dir = CORPUS / spec["bug_id"]
    if bug_dir.exists():
        shutil.rmtree(bug_dir)
    bug_dir.mkdir(parents=True)
    for rel, text in spec["files"].items():
        path = bug_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    (bug_dir / "project.json").write_text(json.dumps(
        {**PROJECT_JSON, "module_id": spec["bug_id"].split("-")[0]}, indent=2) + "\n")
    (bug_dir / "faults.json").write_text(json.dumps({
        "bug_id": spec["bug_id"],
        "entries": [{"file": f, "start_line": s, "end_line": e}
                    for f, s, e in spec["faults"]],
    }, indent=2) + "\n")
    (bug_dir / "reference_fix.json").write_text(json.dumps(
        {str(k): v for k, v in spec["ref_fix"].items()}, indent=2) + "\n")
    (bug_dir / "tests.json").write_text(json.dumps(spec["tests"], indent=2) + "\n")
    if spec["hints"]:
        with open(bug_dir / "hints.jsonl", "w") as fh:
            for rank, frags in spec["hints"]:
                fh.write(json.dumps(
                    {"rank": rank, "text": serialize_label(list(frags))}) + "\n")

    # -- verification -------------------------------------------------
    lang = MiniJavaLanguage()
    assert run_minilang("check", bug_dir) == 0, f"{spec['bug_id']}: buggy must build"
    assert run_minilang("run-tests", bug_dir) != 0, \
        f"{spec['bug_id']}: buggy must fail its tests"
    fixed_dir = verify_dir / spec["bug_id"]
    fixed_dir.mkdir(parents=True)
    fixed_files = apply_reference(spec["files"], spec["faults"], spec["ref_fix"])
    for rel, text in fixed_files.items():
        path = fixed_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    (fixed_dir / "tests.json").write_text(json.dumps(spec["tests"], indent=2) + "\n")
    assert run_minilang("check", fixed_dir) == 0, \
        f"{spec['bug_id']}: reference must build"
    assert run_minilang("run-tests", fixed_dir) == 0, \
        f"{spec['bug_id']}: reference must pass its tests"

    if spec["combination_only"]:
        ref_norm = [lang.normalize(spec["ref_fix"][i])
                    for i in sorted(spec["ref_fix"])]
        for rank, frags in spec["hints"]:
            normalized = [lang.normalize(f) for f in frags]
            assert normalized != ref_norm, \
                f"{spec['bug_id']}: hint rank {rank} is fully correct"
    print(f"  {spec['bug_id']}: ok")


def main():
    import tempfile

    CORPUS.mkdir(parents=True, exist_ok=True)
    print(f"writing corpus to {CORPUS}")
    with tempfile.TemporaryDirectory() as tmp:
        for spec in BUGS:
            write_bug(spec, Path(tmp))
    print("done")


if __name__ == "__main__":
    main()
