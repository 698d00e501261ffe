/**
 * Normative wire formats shared with the repair engine.
 *
 * - Chunk segments of a block are joined by a line consisting of
 *   `<CHUNK-SEP>`.
 * - Within a segment, pre-context, chunk body, and post-context are
 *   joined by lines consisting of `<CTX-SEP>`.
 * - Label / generation texts carry bodies only, joined by the chunk
 *   separator line.
 * - Candidates travel as JSON Lines: one
 *   `{"block_id", "rank", "model_score", "text"}` object per line,
 *   ranks 1-based and contiguous, scores non-increasing.
 */

export const CHUNK_SEPARATOR = "<CHUNK-SEP>";
export const CONTEXT_DELIMITER = "<CTX-SEP>";

const SEP_LINE = "\n" + CHUNK_SEPARATOR + "\n";
const CTX_LINE = "\n" + CONTEXT_DELIMITER + "\n";

export interface BlockSegment {
  preContext: string;
  body: string;
  postContext: string;
}

export class WireError extends Error {}

function checkReserved(text: string, what: string): void {
  if (text.includes(CHUNK_SEPARATOR) || text.includes(CONTEXT_DELIMITER)) {
    throw new WireError(`reserved marker occurs in ${what}`);
  }
}

export function serializeBlock(segments: BlockSegment[]): string {
  return segments
    .map((s) => s.preContext + CTX_LINE + s.body + CTX_LINE + s.postContext)
    .join(SEP_LINE);
}

export function serializeLabel(bodies: string[]): string {
  for (const body of bodies) {
    checkReserved(body, "label body");
  }
  return bodies.join(SEP_LINE);
}

/** Split generated text into per-chunk fragment texts; accepts the bare
 * label format or the full block format (context parts stripped). */
export function splitBlockOutput(text: string, expectedChunks: number): string[] {
  if (expectedChunks < 1) {
    throw new WireError("expectedChunks must be at least 1");
  }
  const parts = text.split(SEP_LINE);
  if (parts.length !== expectedChunks) {
    throw new WireError(
      `expected ${expectedChunks - 1} separator(s), found ${parts.length - 1}`,
    );
  }
  return parts.map((part) => {
    const pieces = part.split(CTX_LINE);
    if (pieces.length === 3) return pieces[1];
    if (pieces.length === 1) return pieces[0];
    throw new WireError(
      `segment carries ${pieces.length - 1} context delimiter(s)`,
    );
  });
}

/**
 * Code tokens of a text: identifiers, numbers, string literals, two-char
 * operators, then single characters; whitespace and line comments are
 * skipped. Mirrors the engine's lexer closely enough for budget checks.
 */
export function tokenize(text: string): string[] {
  const pattern =
    /\/\/[^\n]*|"(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z_0-9]*|\d+|[<>=!]=|&&|\|\||\+\+|--|\S/g;
  const tokens: string[] = [];
  for (const match of text.matchAll(pattern)) {
    if (!match[0].startsWith("//")) tokens.push(match[0]);
  }
  return tokens;
}

/** Token count of a serialized block: segment texts plus one token per
 * marker occurrence. */
export function blockTokenCount(segments: BlockSegment[]): number {
  let count = 0;
  for (const seg of segments) {
    count += tokenize(seg.preContext).length;
    count += tokenize(seg.body).length;
    count += tokenize(seg.postContext).length;
    count += 2; // the two context delimiters of this segment
  }
  count += segments.length - 1; // inter-chunk separators
  return count;
}

export interface CandidateRow {
  block_id: string;
  rank: number;
  model_score: number;
  text: string;
}

export function writeCandidatesJsonl(
  blockId: string,
  outputs: Array<{ text: string; score: number }>,
): string {
  let prev = Infinity;
  const lines = outputs.map((out, i) => {
    if (out.score > prev) {
      throw new WireError("model_score must be non-increasing");
    }
    prev = out.score;
    const row: CandidateRow = {
      block_id: blockId,
      rank: i + 1,
      model_score: out.score,
      text: out.text,
    };
    return JSON.stringify(row);
  });
  return lines.map((l) => l + "\n").join("");
}

export function readCandidatesJsonl(text: string): CandidateRow[] {
  const rows: CandidateRow[] = [];
  let prev = Infinity;
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    if (!lines[i].trim()) continue;
    let doc: CandidateRow;
    try {
      doc = JSON.parse(lines[i]);
    } catch (err) {
      throw new WireError(`line ${i + 1}: not JSON: ${err}`);
    }
    for (const key of ["block_id", "rank", "model_score", "text"]) {
      if (!(key in doc)) {
        throw new WireError(`line ${i + 1}: missing field ${key}`);
      }
    }
    if (doc.rank !== rows.length + 1) {
      throw new WireError(`line ${i + 1}: rank ${doc.rank} out of sequence`);
    }
    if (doc.model_score > prev) {
      throw new WireError(`line ${i + 1}: model_score increases`);
    }
    prev = doc.model_score;
    rows.push(doc);
  }
  return rows;
}
