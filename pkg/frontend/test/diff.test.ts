import { describe, expect, it } from "vitest";

import { extractChunks, replayChunks, splitLines } from "../src/diff.js";

describe("chunk extraction", () => {
  it("identical inputs give no chunks", () => {
    expect(extractChunks(["a", "b"], ["a", "b"])).toEqual([]);
  });

  it("groups a single replacement", () => {
    const chunks = extractChunks(["a", "b", "c"], ["a", "B", "c"]);
    expect(chunks).toHaveLength(1);
    expect(chunks[0].startLine).toBe(2);
    expect(chunks[0].endLine).toBe(2);
    expect(chunks[0].deletedLines).toEqual(["b"]);
    expect(chunks[0].insertedLines).toEqual(["B"]);
  });

  it("splits groups separated by unchanged lines", () => {
    const chunks = extractChunks(
      ["a", "b", "c", "d", "e"],
      ["a", "B", "c", "D", "e"],
    );
    expect(chunks.map((c) => [c.startLine, c.endLine])).toEqual([
      [2, 2],
      [4, 4],
    ]);
  });

  it("encodes a pure insertion as an anchored empty chunk", () => {
    const chunks = extractChunks(["a", "b"], ["a", "new", "b"]);
    expect(chunks).toHaveLength(1);
    expect(chunks[0].startLine).toBe(2);
    expect(chunks[0].endLine).toBe(1);
    expect(chunks[0].deletedLines).toEqual([]);
    expect(chunks[0].insertedLines).toEqual(["new"]);
  });

  it("replay reconstructs the fixed lines on random pairs", () => {
    let seed = 12345;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) & 0x7fffffff;
      return seed / 0x7fffffff;
    };
    const vocab = ["l0", "l1", "l2", "l3", "l4", "l5"];
    for (let trial = 0; trial < 300; trial++) {
      const n = Math.floor(rand() * 30);
      const a = Array.from({ length: n }, () =>
        vocab[Math.floor(rand() * vocab.length)],
      );
      const b = [...a];
      const edits = Math.floor(rand() * 6);
      for (let e = 0; e < edits; e++) {
        const op = Math.floor(rand() * 3);
        if (op === 0 || b.length === 0) {
          b.splice(Math.floor(rand() * (b.length + 1)), 0,
            vocab[Math.floor(rand() * vocab.length)]);
        } else if (op === 1) {
          b.splice(Math.floor(rand() * b.length), 1);
        } else {
          b[Math.floor(rand() * b.length)] =
            vocab[Math.floor(rand() * vocab.length)];
        }
      }
      const chunks = extractChunks(a, b);
      expect(replayChunks(a, chunks), `trial ${trial}`).toEqual(b);
    }
  });
});

describe("splitLines", () => {
  it("drops only the final empty segment", () => {
    expect(splitLines("a\nb\n")).toEqual(["a", "b"]);
    expect(splitLines("a\nb")).toEqual(["a", "b"]);
    expect(splitLines("")).toEqual([]);
    expect(splitLines("a\n\nb\n")).toEqual(["a", "", "b"]);
  });
});
