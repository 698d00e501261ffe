/**
 * Tiny conditional character model over (block, label) pairs.
 *
 * The block is encoded as the mean embedding of its characters; the
 * decoder predicts the next label character from that encoding plus the
 * last K label characters. Quality is tracked as perplexity,
 * exp(mean token-level negative log-likelihood), on a held-out
 * validation split — lower is better.
 *
 * The full-scale defaults (embedding width 768, max length 512,
 * batches 16/16, beam 500) are recorded as `FULL_SCALE`; tests use the
 * tiny configuration so training runs in seconds on a CPU.
 */
import * as tf from "@tensorflow/tfjs";

import { Pair } from "./prepare.js";

export const FULL_SCALE = {
  embeddingDim: 768,
  maxLength: 512,
  trainBatch: 16,
  evalBatch: 16,
  beamSize: 500,
} as const;

export interface ModelConfig {
  embeddingDim: number;
  contextLength: number; // K previous label characters fed to the decoder
  blockLength: number; // block characters used for the encoding
  hiddenDim: number;
}

export const TINY_CONFIG: ModelConfig = {
  embeddingDim: 24,
  contextLength: 8,
  blockLength: 192,
  hiddenDim: 48,
};

export const PAD = 0;
export const BOS = 1;
export const EOS = 2;
const FIRST_CHAR = 3;

export interface Checkpoint {
  config: ModelConfig;
  vocab: string[]; // index - FIRST_CHAR -> character
  weights: Array<{ shape: number[]; values: number[] }>;
}

export class LabelModel {
  readonly config: ModelConfig;
  readonly vocab: string[];
  private readonly charIndex: Map<string, number>;
  readonly net: tf.LayersModel;

  constructor(config: ModelConfig, vocab: string[]) {
    this.config = config;
    this.vocab = vocab;
    this.charIndex = new Map(vocab.map((ch, i) => [ch, i + FIRST_CHAR]));
    this.net = buildNet(config, vocab.length + FIRST_CHAR);
  }

  get vocabSize(): number {
    return this.vocab.length + FIRST_CHAR;
  }

  encodeChar(ch: string): number {
    return this.charIndex.get(ch) ?? PAD;
  }

  decodeChar(id: number): string {
    return id >= FIRST_CHAR ? this.vocab[id - FIRST_CHAR] : "";
  }

  blockIds(block: string): number[] {
    const ids = [...block.slice(0, this.config.blockLength)].map((ch) =>
      this.encodeChar(ch),
    );
    while (ids.length < this.config.blockLength) ids.push(PAD);
    return ids;
  }

  /** label -> [(context window, target id)] including the EOS target */
  examples(label: string): Array<{ context: number[]; target: number }> {
    const k = this.config.contextLength;
    const ids = [...label].map((ch) => this.encodeChar(ch));
    ids.push(EOS);
    const out: Array<{ context: number[]; target: number }> = [];
    for (let t = 0; t < ids.length; t++) {
      const context: number[] = [];
      for (let j = t - k; j < t; j++) context.push(j < 0 ? BOS : ids[j]);
      out.push({ context, target: ids[t] });
    }
    return out;
  }
}

function buildNet(config: ModelConfig, vocabSize: number): tf.LayersModel {
  const blockInput = tf.input({ shape: [config.blockLength], name: "block" });
  const contextInput = tf.input({
    shape: [config.contextLength],
    name: "context",
  });
  const embedding = tf.layers.embedding({
    inputDim: vocabSize,
    outputDim: config.embeddingDim,
    name: "chars",
  });
  const blockVec = tf.layers
    .globalAveragePooling1d({})
    .apply(embedding.apply(blockInput)) as tf.SymbolicTensor;
  const contextVec = tf.layers
    .flatten()
    .apply(embedding.apply(contextInput)) as tf.SymbolicTensor;
  const merged = tf.layers
    .concatenate()
    .apply([blockVec, contextVec]) as tf.SymbolicTensor;
  const hidden = tf.layers
    .dense({ units: config.hiddenDim, activation: "relu" })
    .apply(merged) as tf.SymbolicTensor;
  const logits = tf.layers
    .dense({ units: vocabSize, activation: "softmax" })
    .apply(hidden) as tf.SymbolicTensor;
  const net = tf.model({ inputs: [blockInput, contextInput], outputs: logits });
  net.compile({
    optimizer: tf.train.adam(0.01),
    loss: "sparseCategoricalCrossentropy",
  });
  return net;
}

export function buildVocab(pairs: Pair[]): string[] {
  const chars = new Set<string>();
  for (const pair of pairs) {
    for (const ch of pair.block) chars.add(ch);
    for (const ch of pair.label) chars.add(ch);
  }
  return [...chars].sort();
}

export function saveCheckpoint(model: LabelModel): Checkpoint {
  return {
    config: model.config,
    vocab: model.vocab,
    weights: model.net.getWeights().map((w) => ({
      shape: w.shape.slice(),
      values: Array.from(w.dataSync()),
    })),
  };
}

export function loadCheckpoint(doc: Checkpoint): LabelModel {
  const model = new LabelModel(doc.config, doc.vocab);
  model.net.setWeights(
    doc.weights.map((w) => tf.tensor(w.values, w.shape)),
  );
  return model;
}

/** Deterministic PRNG for batch sampling (mulberry32). */
export function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
