/** End-to-end acceptance: train on a 2,000-case synthetic dataset produced
 * by the upstream pipeline and verify the quality and runtime bars. */

import { beforeAll, describe, expect, it } from "vitest";

import { initBackend } from "../src/backend";
import { makeConfig } from "../src/config";
import { Dataset, loadDataset } from "../src/data";
import { evaluateSplit } from "../src/evaluate";
import { buildModel, compileModel } from "../src/model";
import { trainModel } from "../src/train";
import { ensureDataset } from "./util";

let dataset: Dataset;

beforeAll(() => {
  dataset = loadDataset(ensureDataset(2000, 77));
});

describe("synthetic end-to-end", () => {
  it(
    "reaches test r2(log) >= 0.80, deadline accuracy >= 0.90, f1 >= 0.90 within 10 minutes",
    async () => {
      await initBackend();
      const config = makeConfig({ seed: 7 });
      const dims = {
        maxLen: dataset.maxLen,
        vocabSize: dataset.vocabSize,
        staticDim: dataset.staticDim,
      };
      const model = buildModel(config, dims);
      compileModel(model, config);

      const started = Date.now();
      const history = await trainModel(
        model,
        dataset.splits.train,
        dataset.splits.val,
        config
      );
      const trainSeconds = (Date.now() - started) / 1000;

      const test = evaluateSplit(model, dataset.splits.test);
      const ok =
        test.r2Log >= 0.8 && test.accuracy >= 0.9 && test.f1 >= 0.9 && trainSeconds <= 600;
      console.log(
        `ACCEPTANCE synthetic-end-to-end: ${ok ? "PASS" : "FAIL"} ` +
          `(r2_log=${test.r2Log.toFixed(3)} acc=${test.accuracy.toFixed(3)} ` +
          `f1=${test.f1.toFixed(3)} mae_h=${test.maeHours.toFixed(2)} ` +
          `epochs=${history.epochs.length} train_s=${trainSeconds.toFixed(0)})`
      );

      expect(history.epochs.length).toBeLessThanOrEqual(config.maxEpochs);
      expect(trainSeconds).toBeLessThanOrEqual(600);
      expect(test.r2Log).toBeGreaterThanOrEqual(0.8);
      expect(test.accuracy).toBeGreaterThanOrEqual(0.9);
      expect(test.f1).toBeGreaterThanOrEqual(0.9);
    },
    900_000
  );
});
