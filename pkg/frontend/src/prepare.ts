/**
 * Training-pair preparation: diff buggy/fixed project pairs into chunked
 * blocks and labels under the shared wire format and token budget.
 *
 * A corpus directory holds one subdirectory per entry, each with
 * `buggy/` and `fixed/` file trees. Entries whose trees are identical
 * are excluded; pairs whose block or label exceeds the token budget are
 * dropped and counted.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { Chunk, extractChunks, splitLines } from "./diff.js";
import {
  BlockSegment,
  blockTokenCount,
  serializeBlock,
  serializeLabel,
  tokenize,
} from "./wire.js";

export interface Pair {
  id: string;
  block: string;
  label: string;
}

export interface PrepareStats {
  pairs: number;
  droppedOverBudget: number;
  excludedEmpty: number;
}

export const DEFAULT_TOKEN_BUDGET = 512;
export const DEFAULT_CONTEXT_WIDTH = 3;

function listFiles(root: string): string[] {
  const out: string[] = [];
  const walk = (dir: string) => {
    for (const entry of fs.readdirSync(dir, { withFileTypes: true }).sort(
      (a, b) => a.name.localeCompare(b.name),
    )) {
      const full = path.join(dir, entry.name);
      if (entry.isDirectory()) walk(full);
      else out.push(path.relative(root, full));
    }
  };
  walk(root);
  return out.sort();
}

export function entryChunks(entryDir: string): Chunk[] {
  const buggyRoot = path.join(entryDir, "buggy");
  const fixedRoot = path.join(entryDir, "fixed");
  const files = new Set([...listFiles(buggyRoot), ...listFiles(fixedRoot)]);
  const chunks: Chunk[] = [];
  for (const rel of [...files].sort()) {
    const read = (root: string) => {
      const p = path.join(root, rel);
      return fs.existsSync(p) ? splitLines(fs.readFileSync(p, "utf-8")) : [];
    };
    for (const chunk of extractChunks(read(buggyRoot), read(fixedRoot), rel)) {
      chunks.push({ ...chunk, chunkId: chunks.length });
    }
  }
  return chunks;
}

/** Bind an entry's chunks into (block, label), trimming outermost
 * context lines round-robin until the block fits the budget. Returns
 * null when the chunk bodies alone cannot fit or the label overflows. */
export function pairFromChunks(
  chunks: Chunk[],
  buggyFiles: Map<string, string[]>,
  budget = DEFAULT_TOKEN_BUDGET,
  contextWidth = DEFAULT_CONTEXT_WIDTH,
): { block: string; label: string } | null {
  const pres: string[][] = [];
  const posts: string[][] = [];
  for (const chunk of chunks) {
    const lines = buggyFiles.get(chunk.file) ?? [];
    const preStart = Math.max(0, chunk.startLine - 1 - contextWidth);
    pres.push(lines.slice(preStart, chunk.startLine - 1));
    posts.push(lines.slice(chunk.endLine, chunk.endLine + contextWidth));
  }
  const segments = (): BlockSegment[] =>
    chunks.map((chunk, i) => ({
      preContext: pres[i].join("\n"),
      body: chunk.deletedLines.join("\n"),
      postContext: posts[i].join("\n"),
    }));
  while (blockTokenCount(segments()) > budget) {
    let trimmed = false;
    for (let i = 0; i < chunks.length; i++) {
      if (pres[i].length > 0) {
        pres[i] = pres[i].slice(1);
        trimmed = true;
      }
      if (posts[i].length > 0) {
        posts[i] = posts[i].slice(0, -1);
        trimmed = true;
      }
    }
    if (!trimmed) return null;
  }
  const label = serializeLabel(chunks.map((c) => c.insertedLines.join("\n")));
  if (tokenize(label).length + chunks.length - 1 > budget) return null;
  return { block: serializeBlock(segments()), label };
}

export function preparePairs(
  corpusDir: string,
  budget = DEFAULT_TOKEN_BUDGET,
  contextWidth = DEFAULT_CONTEXT_WIDTH,
): { pairs: Pair[]; stats: PrepareStats } {
  const pairs: Pair[] = [];
  const stats: PrepareStats = {
    pairs: 0,
    droppedOverBudget: 0,
    excludedEmpty: 0,
  };
  const entries = fs
    .readdirSync(corpusDir, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  for (const name of entries) {
    const entryDir = path.join(corpusDir, name);
    const chunks = entryChunks(entryDir);
    if (chunks.length === 0) {
      stats.excludedEmpty++;
      continue;
    }
    const buggyFiles = new Map<string, string[]>();
    for (const chunk of chunks) {
      if (!buggyFiles.has(chunk.file)) {
        const p = path.join(entryDir, "buggy", chunk.file);
        buggyFiles.set(
          chunk.file,
          fs.existsSync(p) ? splitLines(fs.readFileSync(p, "utf-8")) : [],
        );
      }
    }
    const pair = pairFromChunks(chunks, buggyFiles, budget, contextWidth);
    if (pair === null) {
      stats.droppedOverBudget++;
      continue;
    }
    pairs.push({ id: name, ...pair });
    stats.pairs++;
  }
  return { pairs, stats };
}

export function writePairsJsonl(pairs: Pair[]): string {
  return pairs.map((p) => JSON.stringify(p) + "\n").join("");
}

export function readPairsJsonl(text: string): Pair[] {
  const pairs: Pair[] = [];
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const doc = JSON.parse(line);
    if (
      typeof doc.id !== "string" ||
      typeof doc.block !== "string" ||
      typeof doc.label !== "string"
    ) {
      throw new Error("pair rows need string id/block/label fields");
    }
    pairs.push(doc);
  }
  return pairs;
}
