/**
 * Fine-tuning loop: minibatch gradient steps over (block, label)
 * character examples with periodic validation perplexity measurement.
 */
import * as tf from "@tensorflow/tfjs";

import {
  Checkpoint,
  LabelModel,
  ModelConfig,
  TINY_CONFIG,
  buildVocab,
  makeRng,
  saveCheckpoint,
} from "./model.js";
import { Pair } from "./prepare.js";

export interface TrainOptions {
  steps: number;
  batchSize: number;
  valFraction: number;
  evalEvery: number;
  seed: number;
  config: ModelConfig;
}

export const DEFAULT_TRAIN: TrainOptions = {
  steps: 200,
  batchSize: 16,
  valFraction: 0.2,
  evalEvery: 50,
  seed: 0,
  config: TINY_CONFIG,
};

export interface PplPoint {
  step: number;
  perplexity: number;
}

export interface TrainResult {
  checkpoint: Checkpoint;
  log: PplPoint[]; // includes step 0 (before training) and the last step
  initialPerplexity: number;
  finalPerplexity: number;
}

interface Example {
  blockIds: number[];
  context: number[];
  target: number;
}

function collectExamples(model: LabelModel, pairs: Pair[]): Example[] {
  const out: Example[] = [];
  for (const pair of pairs) {
    const blockIds = model.blockIds(pair.block);
    for (const ex of model.examples(pair.label)) {
      out.push({ blockIds, context: ex.context, target: ex.target });
    }
  }
  return out;
}

function toTensors(batch: Example[]): {
  inputs: [tf.Tensor, tf.Tensor];
  targets: tf.Tensor;
} {
  return {
    inputs: [
      tf.tensor2d(batch.map((e) => e.blockIds)),
      tf.tensor2d(batch.map((e) => e.context)),
    ],
    targets: tf.tensor1d(batch.map((e) => e.target), "float32"),
  };
}

/** exp(mean negative log-likelihood) over the given examples. */
export function perplexity(model: LabelModel, examples: Example[]): number {
  if (examples.length === 0) {
    throw new Error("cannot measure perplexity on zero examples");
  }
  let total = 0;
  const batchSize = 256;
  for (let i = 0; i < examples.length; i += batchSize) {
    const batch = examples.slice(i, i + batchSize);
    const nll = tf.tidy(() => {
      const { inputs, targets } = toTensors(batch);
      const probs = model.net.predict(inputs) as tf.Tensor2D;
      const picked = tf.gather(probs, targets.toInt(), 1, 1);
      return tf.neg(tf.sum(tf.log(tf.maximum(picked, 1e-12))));
    });
    total += nll.dataSync()[0];
    nll.dispose();
  }
  return Math.exp(total / examples.length);
}

export async function finetune(
  pairs: Pair[],
  options: Partial<TrainOptions> = {},
): Promise<TrainResult> {
  const opts = { ...DEFAULT_TRAIN, ...options };
  if (pairs.length === 0) {
    throw new Error("no training pairs");
  }
  const rng = makeRng(opts.seed);
  const shuffled = [...pairs];
  for (let i = shuffled.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [shuffled[i], shuffled[j]] = [shuffled[j], shuffled[i]];
  }
  const valCount = Math.max(1, Math.floor(shuffled.length * opts.valFraction));
  const valPairs = shuffled.slice(0, valCount);
  const trainPairs = shuffled.slice(valCount);
  if (trainPairs.length === 0) {
    throw new Error("validation split consumed every pair");
  }

  const model = new LabelModel(opts.config, buildVocab(pairs));
  const trainExamples = collectExamples(model, trainPairs);
  const valExamples = collectExamples(model, valPairs);

  const log: PplPoint[] = [];
  const initial = perplexity(model, valExamples);
  log.push({ step: 0, perplexity: initial });

  for (let step = 1; step <= opts.steps; step++) {
    const batch: Example[] = [];
    for (let b = 0; b < opts.batchSize; b++) {
      batch.push(trainExamples[Math.floor(rng() * trainExamples.length)]);
    }
    const { inputs, targets } = toTensors(batch);
    const loss = (await model.net.trainOnBatch(inputs, targets)) as number;
    inputs.forEach((t) => t.dispose());
    targets.dispose();
    if (!Number.isFinite(loss)) {
      throw new Error(`training diverged at step ${step}: loss ${loss}`);
    }
    if (step % opts.evalEvery === 0 || step === opts.steps) {
      log.push({ step, perplexity: perplexity(model, valExamples) });
    }
  }

  const final = log[log.length - 1].perplexity;
  return {
    checkpoint: saveCheckpoint(model),
    log,
    initialPerplexity: initial,
    finalPerplexity: final,
  };
}
