"""Generate the cross-component golden fixtures consumed by the
frontend test suite.

Everything under frontend/test/fixtures/ that this script writes is
produced by the engine's own serializers, so the frontend tests prove
byte-level wire compatibility rather than self-consistency.
"""
import json
import sys
from dataclasses import replace
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from blockrepair.blocks import build_block, serialize_block, serialize_label
from blockrepair.diffs import extract_chunk_pairs
from blockrepair.generator import GeneratorResponse, write_candidates
from blockrepair.minilang import MiniJavaLanguage
from blockrepair.model import CampaignConfig, SourceText

FIXTURES = REPO / "frontend" / "test" / "fixtures"
lang = MiniJavaLanguage()
cfg = CampaignConfig(context_width=3)


def entry_sources(i):
    """Buggy/fixed file trees for synthetic corpus entry i."""
    if i % 5 == 4:
        # two files, one chunk each
        buggy = {
            "a.mj": f"int left{i}(int x) {{\n  return x + {i};\n}}\n",
            "b.mj": f"int right{i}(int x) {{\n  return x * 2;\n}}\n",
        }
        fixed = {
            "a.mj": f"int left{i}(int x) {{\n  return x + {i + 1};\n}}\n",
            "b.mj": f"int right{i}(int x) {{\n  return x * 3;\n}}\n",
        }
    elif i % 5 == 3:
        # omission: a statement is inserted
        buggy = {"m.mj": (
            f"int sum{i}(int n) {{\n"
            "  int acc = 0;\n"
            "  for (int k = 0; k < n; k++) {\n"
            "  }\n"
            "  return acc;\n"
            "}\n")}
        fixed = {"m.mj": (
            f"int sum{i}(int n) {{\n"
            "  int acc = 0;\n"
            "  for (int k = 0; k < n; k++) {\n"
            "    acc = acc + k;\n"
            "  }\n"
            "  return acc;\n"
            "}\n")}
    elif i % 5 == 2:
        # three chunks in one file
        buggy = {"m.mj": (
            f"int p{i}(int x) {{\n  return x;\n}}\n"
            f"int q{i}(int x) {{\n  return x;\n}}\n"
            f"int r{i}(int x) {{\n  return x;\n}}\n")}
        fixed = {"m.mj": (
            f"int p{i}(int x) {{\n  return x + 1;\n}}\n"
            f"int q{i}(int x) {{\n  return x + 2;\n}}\n"
            f"int r{i}(int x) {{\n  return x + 3;\n}}\n")}
    elif i % 5 == 1:
        # two chunks separated by unchanged lines
        buggy = {"m.mj": (
            f"int lo{i}(int a, int b) {{\n"
            "  if (a < b) {\n"
            "    return b;\n"
            "  }\n"
            "  return a;\n"
            "}\n")}
        fixed = {"m.mj": (
            f"int lo{i}(int a, int b) {{\n"
            "  if (a > b) {\n"
            "    return b;\n"
            "  }\n"
            "  return a + 0;\n"
            "}\n")}
    else:
        # one-line replacement
        buggy = {"m.mj": f"int id{i}(int x) {{\n  return x - 1;\n}}\n"}
        fixed = {"m.mj": f"int id{i}(int x) {{\n  return x + 1;\n}}\n"}
    return buggy, fixed


def entry_pair(bug_id, buggy, fixed):
    """(block, label) via the engine's diff + serializers."""
    chunks = []
    inserted = []
    sources = {}
    for rel in sorted(buggy):
        b = SourceText.from_string(buggy[rel], rel)
        f = SourceText.from_string(fixed[rel], rel)
        sources[rel] = b
        for chunk, ins in extract_chunk_pairs(b, f):
            chunks.append(replace(chunk, chunk_id=len(chunks)))
            inserted.append("\n".join(ins))
    if not chunks:
        return None
    block = build_block(chunks, sources, cfg, lang, block_id=bug_id)
    return serialize_block(block), serialize_label(inserted)


def main():
    corpus = FIXTURES / "corpus20"
    expected = []
    for i in range(20):
        name = f"entry-{i:02d}"
        buggy, fixed = entry_sources(i)
        for side, files in (("buggy", buggy), ("fixed", fixed)):
            for rel, text in files.items():
                path = corpus / name / side / rel
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text)
        block, label = entry_pair(name, buggy, fixed)
        expected.append({"id": name, "block": block, "label": label})
    with open(corpus / "expected_pairs.jsonl", "w") as fh:
        for doc in expected:
            fh.write(json.dumps(doc, separators=(",", ":")) + "\n")

    # standalone round-trip fixture: block, label, and candidates file
    rt = FIXTURES / "roundtrip"
    rt.mkdir(parents=True, exist_ok=True)
    buggy, fixed = entry_sources(2)  # the three-chunk shape
    block, label = entry_pair("roundtrip", buggy, fixed)
    (rt / "block.txt").write_text(block)
    (rt / "label.txt").write_text(label)
    resp = GeneratorResponse("roundtrip", (
        (label, 0.0),
        (label.replace("+ 1", "+ 9"), -0.25),
        (label.replace("return", "return "), -1.5),
    ))
    write_candidates(resp, rt / "candidates.jsonl")
    print(f"wrote fixtures under {FIXTURES}")


if __name__ == "__main__":
    main()
