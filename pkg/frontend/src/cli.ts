#!/usr/bin/env node
/**
 * neuralgen command line: prepare / train / generate.
 *
 *   prepare  --corpus DIR --out pairs.jsonl [--budget N] [--context N]
 *   train    --pairs pairs.jsonl --out model.json [--steps N] [--seed N]
 *   generate --model model.json --block block.txt --out candidates.jsonl
 *            [--beam N] [--block-id ID]
 */
import * as fs from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { beamGenerate, generationsToJsonl } from "./generate.js";
import { loadCheckpoint } from "./model.js";
import {
  DEFAULT_CONTEXT_WIDTH,
  DEFAULT_TOKEN_BUDGET,
  preparePairs,
  readPairsJsonl,
  writePairsJsonl,
} from "./prepare.js";
import { DEFAULT_TRAIN, finetune } from "./train.js";

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  await yargs(argv)
    .scriptName("neuralgen")
    .command(
      "prepare",
      "diff buggy/fixed projects into training pairs",
      (y) =>
        y
          .option("corpus", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("budget", { type: "number", default: DEFAULT_TOKEN_BUDGET })
          .option("context", {
            type: "number",
            default: DEFAULT_CONTEXT_WIDTH,
          }),
      (args) => {
        const { pairs, stats } = preparePairs(
          args.corpus,
          args.budget,
          args.context,
        );
        fs.writeFileSync(args.out, writePairsJsonl(pairs));
        console.log(
          JSON.stringify({
            pairs: stats.pairs,
            dropped_over_budget: stats.droppedOverBudget,
            excluded_empty: stats.excludedEmpty,
          }),
        );
      },
    )
    .command(
      "train",
      "fine-tune the label model on prepared pairs",
      (y) =>
        y
          .option("pairs", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("log", { type: "string" })
          .option("steps", { type: "number", default: DEFAULT_TRAIN.steps })
          .option("batch", {
            type: "number",
            default: DEFAULT_TRAIN.batchSize,
          })
          .option("seed", { type: "number", default: DEFAULT_TRAIN.seed }),
      async (args) => {
        const pairs = readPairsJsonl(fs.readFileSync(args.pairs, "utf-8"));
        if (pairs.length === 0) {
          console.error("error: empty pair file");
          exitCode = 2;
          return;
        }
        const result = await finetune(pairs, {
          steps: args.steps,
          batchSize: args.batch,
          seed: args.seed,
        });
        fs.writeFileSync(args.out, JSON.stringify(result.checkpoint));
        const logText = result.log
          .map((p) => JSON.stringify(p) + "\n")
          .join("");
        if (args.log) fs.writeFileSync(args.log, logText);
        console.log(
          JSON.stringify({
            initial_perplexity: result.initialPerplexity,
            final_perplexity: result.finalPerplexity,
            steps: args.steps,
          }),
        );
      },
    )
    .command(
      "generate",
      "beam-decode candidates for a serialized block",
      (y) =>
        y
          .option("model", { type: "string", demandOption: true })
          .option("block", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("beam", { type: "number", default: 10 })
          .option("block-id", { type: "string", default: "" }),
      (args) => {
        const checkpoint = JSON.parse(fs.readFileSync(args.model, "utf-8"));
        const blockText = fs.readFileSync(args.block, "utf-8");
        const model = loadCheckpoint(checkpoint);
        const blockId = args.blockId || args.block;
        const generations = beamGenerate(model, blockText, args.beam);
        fs.writeFileSync(args.out, generationsToJsonl(blockId, generations));
        console.log(JSON.stringify({ generations: generations.length }));
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(`error: ${msg ?? err?.message}`);
      exitCode = 2;
    })
    .parseAsync();
  return exitCode;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
