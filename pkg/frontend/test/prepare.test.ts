import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it } from "vitest";

import { CHUNK_SEPARATOR } from "../src/wire.js";
import { preparePairs, writePairsJsonl } from "../src/prepare.js";

const __dirname = path.dirname(fileURLToPath(import.meta.url));
const CORPUS20 = path.join(__dirname, "fixtures", "corpus20");

const tmpDirs: string[] = [];
function tmpCorpus(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "neuralgen-"));
  tmpDirs.push(dir);
  return dir;
}
afterEach(() => {
  while (tmpDirs.length > 0) {
    fs.rmSync(tmpDirs.pop()!, { recursive: true, force: true });
  }
});

function writeEntry(
  corpus: string,
  name: string,
  buggy: Record<string, string>,
  fixed: Record<string, string>,
) {
  for (const [side, files] of [
    ["buggy", buggy],
    ["fixed", fixed],
  ] as const) {
    for (const [rel, text] of Object.entries(files)) {
      const p = path.join(corpus, name, side, rel);
      fs.mkdirSync(path.dirname(p), { recursive: true });
      fs.writeFileSync(p, text);
    }
  }
}

describe("preparePairs", () => {
  it("excludes identical entries", () => {
    const corpus = tmpCorpus();
    const text = "int f() {\n  return 1;\n}\n";
    writeEntry(corpus, "same", { "m.mj": text }, { "m.mj": text });
    const { pairs, stats } = preparePairs(corpus);
    expect(pairs).toHaveLength(0);
    expect(stats.excludedEmpty).toBe(1);
  });

  it("gives a 3-chunk bug a label with exactly 2 separators", () => {
    const corpus = tmpCorpus();
    writeEntry(
      corpus,
      "three",
      {
        "m.mj":
          "int p(int x) {\n  return x;\n}\n" +
          "int q(int x) {\n  return x;\n}\n" +
          "int r(int x) {\n  return x;\n}\n",
      },
      {
        "m.mj":
          "int p(int x) {\n  return x + 1;\n}\n" +
          "int q(int x) {\n  return x + 2;\n}\n" +
          "int r(int x) {\n  return x + 3;\n}\n",
      },
    );
    const { pairs } = preparePairs(corpus);
    expect(pairs).toHaveLength(1);
    const separators = pairs[0].label
      .split("\n")
      .filter((l) => l === CHUNK_SEPARATOR);
    expect(separators).toHaveLength(2);
  });

  it("drops and counts over-budget pairs", () => {
    const corpus = tmpCorpus();
    const bigBody = Array.from(
      { length: 300 },
      (_, i) => `  int v${i} = ${i};`,
    ).join("\n");
    writeEntry(
      corpus,
      "huge",
      { "m.mj": `int f() {\n${bigBody}\n  return 0;\n}\n` },
      { "m.mj": `int f() {\n${bigBody}\n  return 1;\n}\n` },
    );
    // the changed chunk is tiny, but force a budget the block cannot meet
    const { pairs, stats } = preparePairs(corpus, 4);
    expect(pairs).toHaveLength(0);
    expect(stats.droppedOverBudget).toBe(1);
  });

  it("keeps pairs within the default budget", () => {
    const corpus = tmpCorpus();
    writeEntry(
      corpus,
      "small",
      { "m.mj": "int f(int x) {\n  return x - 1;\n}\n" },
      { "m.mj": "int f(int x) {\n  return x + 1;\n}\n" },
    );
    const { pairs, stats } = preparePairs(corpus);
    expect(stats).toEqual({ pairs: 1, droppedOverBudget: 0, excludedEmpty: 0 });
    expect(pairs[0].block).toContain("return x - 1;");
    expect(pairs[0].label).toBe("  return x + 1;");
  });

  it("byte-matches the goldens produced by the repair engine's serializer", () => {
    const { pairs, stats } = preparePairs(CORPUS20);
    expect(stats.pairs).toBe(20);
    const expected = fs.readFileSync(
      path.join(CORPUS20, "expected_pairs.jsonl"),
      "utf-8",
    );
    expect(writePairsJsonl(pairs)).toBe(expected);
  });
});
