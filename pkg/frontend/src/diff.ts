/**
 * Canonical line diff: leftmost-maximal LCS alignment with a fixed
 * tie-break, grouping unmatched runs into chunks. An insertion-only
 * chunk is anchored with `endLine = startLine - 1` and an empty deleted
 * body.
 */

export interface Chunk {
  chunkId: number;
  file: string;
  startLine: number; // 1-based
  endLine: number; // inclusive; startLine - 1 for pure insertions
  deletedLines: string[];
  insertedLines: string[];
}

/** Leftmost-maximal LCS match pairs: on equal-length alternatives take
 * the earliest match, otherwise advance the buggy side first. */
function lcsPairs(a: string[], b: string[]): Array<[number, number]> {
  const n = a.length;
  const m = b.length;
  const lcs: Int32Array[] = [];
  for (let i = 0; i <= n; i++) lcs.push(new Int32Array(m + 1));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i] === b[j]
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const pairs: Array<[number, number]> = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j] && lcs[i][j] === lcs[i + 1][j + 1] + 1) {
      pairs.push([i, j]);
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      i++;
    } else {
      j++;
    }
  }
  return pairs;
}

export function extractChunks(
  buggyLines: string[],
  fixedLines: string[],
  file = "",
): Chunk[] {
  const matches = lcsPairs(buggyLines, fixedLines);
  const anchors: Array<[number, number]> = [
    [-1, -1],
    ...matches,
    [buggyLines.length, fixedLines.length],
  ];
  const chunks: Chunk[] = [];
  for (let k = 0; k + 1 < anchors.length; k++) {
    const [i0, j0] = anchors[k];
    const [i1, j1] = anchors[k + 1];
    const deleted = buggyLines.slice(i0 + 1, i1);
    const inserted = fixedLines.slice(j0 + 1, j1);
    if (deleted.length === 0 && inserted.length === 0) continue;
    chunks.push({
      chunkId: chunks.length,
      file,
      startLine: i0 + 2,
      endLine: i1, // = startLine - 1 when nothing was deleted
      deletedLines: deleted,
      insertedLines: inserted,
    });
  }
  return chunks;
}

/** Reapply every chunk's inserted lines over the buggy lines; inverse
 * of extraction. */
export function replayChunks(buggyLines: string[], chunks: Chunk[]): string[] {
  const out = [...buggyLines];
  for (const chunk of [...chunks].sort((x, y) => y.startLine - x.startLine)) {
    out.splice(
      chunk.startLine - 1,
      chunk.endLine - chunk.startLine + 1,
      ...chunk.insertedLines,
    );
  }
  return out;
}

export function splitLines(text: string): string[] {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  return lines;
}
