/**
 * Beam decoding of candidate labels for one block, emitted in the
 * candidates JSONL wire format (ranks 1-based, scores non-increasing;
 * the score is the sequence log-likelihood).
 */
import * as tf from "@tensorflow/tfjs";

import { BOS, EOS, LabelModel } from "./model.js";
import { writeCandidatesJsonl } from "./wire.js";

export interface Generation {
  text: string;
  score: number; // sum of character log-probabilities
}

interface Beam {
  ids: number[];
  score: number;
  done: boolean;
}

export function beamGenerate(
  model: LabelModel,
  blockText: string,
  beamSize: number,
  maxLength = 160,
): Generation[] {
  if (beamSize < 1) {
    throw new Error("beamSize must be at least 1");
  }
  const k = model.config.contextLength;
  const blockIds = model.blockIds(blockText);
  let beams: Beam[] = [{ ids: [], score: 0, done: false }];

  for (let step = 0; step < maxLength; step++) {
    const active = beams.filter((b) => !b.done);
    if (active.length === 0) break;
    const logProbs = tf.tidy(() => {
      const contexts = active.map((b) => {
        const context: number[] = [];
        for (let j = b.ids.length - k; j < b.ids.length; j++) {
          context.push(j < 0 ? BOS : b.ids[j]);
        }
        return context;
      });
      const probs = model.net.predict([
        tf.tensor2d(active.map(() => blockIds)),
        tf.tensor2d(contexts),
      ]) as tf.Tensor2D;
      return tf.log(tf.maximum(probs, 1e-12));
    });
    const rows = logProbs.arraySync() as number[][];
    logProbs.dispose();

    const next: Beam[] = beams.filter((b) => b.done);
    for (let a = 0; a < active.length; a++) {
      const beam = active[a];
      const scored = rows[a]
        .map((lp, id) => ({ lp, id }))
        .sort((x, y) => y.lp - x.lp)
        .slice(0, beamSize);
      for (const { lp, id } of scored) {
        next.push({
          ids: id === EOS ? beam.ids : [...beam.ids, id],
          score: beam.score + lp,
          done: id === EOS,
        });
      }
    }
    next.sort((x, y) => y.score - x.score);
    beams = next.slice(0, beamSize);
  }

  const seen = new Set<string>();
  const out: Generation[] = [];
  for (const beam of beams.sort((x, y) => y.score - x.score)) {
    const text = beam.ids.map((id) => model.decodeChar(id)).join("");
    if (seen.has(text)) continue;
    seen.add(text);
    out.push({ text, score: beam.score });
    if (out.length === beamSize) break;
  }
  return out;
}

export function generationsToJsonl(
  blockId: string,
  generations: Generation[],
): string {
  return writeCandidatesJsonl(
    blockId,
    generations.map((g) => ({ text: g.text, score: g.score })),
  );
}
