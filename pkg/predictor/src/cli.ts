/** CLI: train a model from a dataset directory, evaluate a saved model.
 *
 *   train    --data DIR --out DIR [--seed N] [--epochs N] [--deterministic]
 *   evaluate --model DIR --data DIR [--split test] [--out FILE]
 */

import * as path from "path";

import {
  evalReportToJson,
  historyToJson,
  loadModel,
  saveModel,
  writeJson,
} from "./artifacts";
import { initBackend } from "./backend";
import { makeConfig } from "./config";
import { loadDataset, SplitName, SPLIT_NAMES } from "./data";
import { evaluateSplit, SplitEvaluation } from "./evaluate";
import { buildModel, compileModel } from "./model";
import { trainModel } from "./train";

interface Args {
  command: string;
  options: Map<string, string | boolean>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error("usage: cli <train|evaluate> [--option value ...]");
  }
  const [command, ...rest] = argv;
  const options = new Map<string, string | boolean>();
  for (let i = 0; i < rest.length; i++) {
    const token = rest[i];
    if (!token.startsWith("--")) {
      throw new Error(`unexpected argument: ${token}`);
    }
    const key = token.slice(2);
    const next = rest[i + 1];
    if (next === undefined || next.startsWith("--")) {
      options.set(key, true);
    } else {
      options.set(key, next);
      i++;
    }
  }
  return { command, options };
}

function requireOption(args: Args, name: string): string {
  const value = args.options.get(name);
  if (typeof value !== "string") {
    throw new Error(`--${name} is required`);
  }
  return value;
}

async function runTrain(args: Args): Promise<void> {
  const dataDir = requireOption(args, "data");
  const outDir = requireOption(args, "out");
  const seed = Number(args.options.get("seed") ?? 0);
  const config = makeConfig({
    seed,
    deterministic: args.options.get("deterministic") === true,
    ...(args.options.has("epochs") ? { maxEpochs: Number(args.options.get("epochs")) } : {}),
    ...(args.options.has("batch-size")
      ? { batchSize: Number(args.options.get("batch-size")) }
      : {}),
  });

  const backend = await initBackend();
  const dataset = loadDataset(dataDir);
  const dims = {
    maxLen: dataset.maxLen,
    vocabSize: dataset.vocabSize,
    staticDim: dataset.staticDim,
  };
  console.log(
    `backend=${backend} train=${dataset.splits.train.seq.length} ` +
      `val=${dataset.splits.val.seq.length} test=${dataset.splits.test.seq.length} ` +
      `maxLen=${dims.maxLen} vocab=${dims.vocabSize} staticDim=${dims.staticDim}`
  );

  const model = buildModel(config, dims);
  compileModel(model, config);
  const started = Date.now();
  const history = await trainModel(model, dataset.splits.train, dataset.splits.val, config);
  const seconds = (Date.now() - started) / 1000;
  console.log(
    `trained ${history.epochs.length} epochs in ${seconds.toFixed(1)}s ` +
      `(best epoch ${history.bestEpoch})`
  );

  saveModel(outDir, model, config, dims);
  writeJson(path.join(outDir, "history.json"), historyToJson(history));

  const evaluations: Partial<Record<SplitName, SplitEvaluation>> = {};
  for (const name of SPLIT_NAMES) {
    if (dataset.splits[name].seq.length >= 2) {
      evaluations[name] = evaluateSplit(model, dataset.splits[name]);
    }
  }
  writeJson(path.join(outDir, "eval_report.json"), evalReportToJson(evaluations));
  for (const name of SPLIT_NAMES) {
    const ev = evaluations[name];
    if (ev) {
      console.log(
        `${name}: mae_h=${ev.maeHours.toFixed(3)} r2_log=${ev.r2Log.toFixed(3)} ` +
          `acc=${ev.accuracy.toFixed(3)} f1=${ev.f1.toFixed(3)}`
      );
    }
  }
}

async function runEvaluate(args: Args): Promise<void> {
  const modelDir = requireOption(args, "model");
  const dataDir = requireOption(args, "data");
  const splitName = (args.options.get("split") ?? "test") as SplitName;
  if (!SPLIT_NAMES.includes(splitName)) {
    throw new Error(`--split must be one of ${SPLIT_NAMES.join("/")}, got ${splitName}`);
  }
  await initBackend();
  const dataset = loadDataset(dataDir);
  const { model } = loadModel(modelDir);
  const evaluation = evaluateSplit(model, dataset.splits[splitName]);
  const report = evalReportToJson({ [splitName]: evaluation });
  const out = args.options.get("out");
  if (typeof out === "string") {
    writeJson(out, report);
    console.log(`wrote ${out}`);
  } else {
    console.log(JSON.stringify(report, null, 2));
  }
}

export async function main(argv: string[]): Promise<number> {
  try {
    const args = parseArgs(argv);
    if (args.command === "train") {
      await runTrain(args);
    } else if (args.command === "evaluate") {
      await runEvaluate(args);
    } else {
      throw new Error(`unknown command: ${args.command}`);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
