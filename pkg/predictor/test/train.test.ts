import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";

import { loadModel, saveModel } from "../src/artifacts";
import { initBackend } from "../src/backend";
import { EarlyStoppingRestore, NanLossGuard, ReduceLROnPlateau } from "../src/callbacks";
import { makeConfig } from "../src/config";
import { SplitData } from "../src/data";
import { predictLog } from "../src/evaluate";
import { buildModel, compileModel } from "../src/model";
import { mulberry32, shuffledIndices, trainModel } from "../src/train";

beforeAll(async () => {
  await initBackend();
});

function constantSplit(n: number, maxLen: number, staticDim: number, value: number): SplitData {
  const rand = mulberry32(17);
  const rows = Array.from({ length: n }, (_, i) => {
    const len = 1 + (i % maxLen);
    const seq = Array.from({ length: maxLen }, (_, j) => (j < len ? 1 + (j % 4) : 0));
    const dt = Array.from({ length: maxLen }, (_, j) => (j < len ? rand() - 0.5 : 0));
    const staticX = Array.from({ length: staticDim }, () => rand() - 0.5);
    return { seq, dt, staticX };
  });
  return {
    prIds: rows.map((_, i) => i),
    seq: rows.map((r) => r.seq),
    dt: rows.map((r) => r.dt),
    staticX: rows.map((r) => r.staticX),
    yLog: rows.map(() => value),
    ySeconds: rows.map(() => Math.expm1(value)),
    elapsedSeconds: rows.map(() => 0),
    deadlineSeconds: rows.map(() => 10),
    };
}

describe("training", () => {
  it("converges to a constant target with val mse < 1e-3", async () => {
    const dims = { maxLen: 4, vocabSize: 6, staticDim: 5 };
    const config = makeConfig({ seed: 5, learningRate: 1e-2, maxEpochs: 40, batchSize: 16 });
    const model = buildModel(config, dims);
    compileModel(model, config);
    const train = constantSplit(96, dims.maxLen, dims.staticDim, 0.7);
    const val = constantSplit(32, dims.maxLen, dims.staticDim, 0.7);
    const history = await trainModel(model, train, val, config);
    expect(history.epochs.length).toBeGreaterThan(0);
    const preds = predictLog(model, val);
    const mse = preds.reduce((acc, p) => acc + (p - 0.7) ** 2, 0) / preds.length;
    expect(mse).toBeLessThan(1e-3);
  }, 180_000);

  it("history records per-epoch train/val loss and the learning rate", async () => {
    const dims = { maxLen: 4, vocabSize: 6, staticDim: 5 };
    const config = makeConfig({ seed: 6, maxEpochs: 3 });
    const model = buildModel(config, dims);
    compileModel(model, config);
    const history = await trainModel(
      model,
      constantSplit(64, dims.maxLen, dims.staticDim, 0.3),
      constantSplit(16, dims.maxLen, dims.staticDim, 0.3),
      config
    );
    expect(history.epochs.length).toBe(3);
    for (const epoch of history.epochs) {
      expect(Number.isFinite(epoch.loss)).toBe(true);
      expect(Number.isFinite(epoch.valLoss)).toBe(true);
      expect(epoch.learningRate).toBe(config.learningRate);
    }
  });
});

describe("early stopping callback", () => {
  function stubModel() {
    let counter = 0;
    const state = {
      stopTraining: false,
      snapshots: [] as number[],
      restored: null as number | null,
    };
    const model = {
      get stopTraining() {
        return state.stopTraining;
      },
      set stopTraining(v: boolean) {
        state.stopTraining = v;
      },
      getWeights: () => {
        counter += 1;
        state.snapshots.push(counter);
        return [tf.scalar(counter)];
      },
      setWeights: (weights: tf.Tensor[]) => {
        state.restored = weights[0].dataSync()[0];
      },
    };
    return { model: model as unknown as tf.LayersModel, state };
  }

  it("stops after patience epochs and restores the best weights", async () => {
    const { model, state } = stubModel();
    const callback = new EarlyStoppingRestore({ patience: 8 });
    callback.setModel(model);

    const valLosses = [1.0, 0.9, 0.8, ...Array(8).fill(0.85)];
    for (let epoch = 0; epoch < valLosses.length; epoch++) {
      await callback.onEpochEnd(epoch, { val_loss: valLosses[epoch] } as tf.Logs);
      if (state.stopTraining) {
        break;
      }
    }
    expect(state.stopTraining).toBe(true);
    expect(callback.stoppedEpoch).toBe(10);
    expect(callback.bestEpoch).toBe(2);
    expect(callback.bestEpoch).toBeLessThanOrEqual(callback.stoppedEpoch - 8);

    await callback.onTrainEnd({});
    expect(state.restored).toBe(3); // snapshot taken at the third improvement
  });

  it("keeps training while the monitored loss improves", async () => {
    const { model, state } = stubModel();
    const callback = new EarlyStoppingRestore({ patience: 2 });
    callback.setModel(model);
    for (let epoch = 0; epoch < 10; epoch++) {
      await callback.onEpochEnd(epoch, { val_loss: 1 / (epoch + 1) } as tf.Logs);
    }
    expect(state.stopTraining).toBe(false);
    expect(callback.bestEpoch).toBe(9);
  });
});

describe("reduce-lr-on-plateau callback", () => {
  function stubWithOptimizer() {
    const optimizer = { learningRate: 1e-3 };
    const model = { optimizer } as unknown as tf.LayersModel;
    return { model, optimizer };
  }

  it("halves the rate after the plateau patience and floors at the minimum", async () => {
    const { model, optimizer } = stubWithOptimizer();
    const callback = new ReduceLROnPlateau({
      initialLr: 1e-3,
      factor: 0.5,
      patience: 3,
      minLr: 1e-5,
    });
    callback.setModel(model);

    await callback.onEpochEnd(0, { val_loss: 1.0 } as tf.Logs);
    for (let epoch = 1; epoch <= 3; epoch++) {
      await callback.onEpochEnd(epoch, { val_loss: 1.5 } as tf.Logs);
    }
    expect(callback.currentLr).toBeCloseTo(5e-4, 12);
    expect(optimizer.learningRate).toBeCloseTo(5e-4, 12);

    for (let epoch = 4; epoch < 40; epoch++) {
      await callback.onEpochEnd(epoch, { val_loss: 1.5 } as tf.Logs);
    }
    expect(callback.currentLr).toBeCloseTo(1e-5, 12);
    expect(optimizer.learningRate).toBeCloseTo(1e-5, 12);
  });
});

describe("nan loss guard", () => {
  it("flags a non-finite loss and stops training", async () => {
    const state = { stopTraining: false };
    const model = {
      get stopTraining() {
        return state.stopTraining;
      },
      set stopTraining(v: boolean) {
        state.stopTraining = v;
      },
    } as unknown as tf.LayersModel;
    const guard = new NanLossGuard();
    guard.setModel(model);
    await guard.onEpochEnd(0, { loss: 1.5 } as tf.Logs);
    expect(guard.failedEpoch).toBe(-1);
    await guard.onEpochEnd(1, { loss: Number.NaN } as tf.Logs);
    expect(guard.failedEpoch).toBe(1);
    expect(state.stopTraining).toBe(true);
  });
});

describe("model persistence", () => {
  it("weights round-trip through the saved artifact", async () => {
    const dims = { maxLen: 5, vocabSize: 6, staticDim: 7 };
    const config = makeConfig({ seed: 9 });
    const model = buildModel(config, dims);
    compileModel(model, config);

    const split = constantSplit(12, dims.maxLen, dims.staticDim, 0.4);
    const before = predictLog(model, split);

    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "predictor-model-"));
    saveModel(dir, model, config, dims);
    const { model: loaded, meta } = loadModel(dir);
    expect(meta.dims).toEqual(dims);

    const after = predictLog(loaded, split);
    expect(after).toEqual(before);
    fs.rmSync(dir, { recursive: true, force: true });
  });
});

describe("deterministic shuffling", () => {
  it("is a permutation and reproducible for a fixed seed", () => {
    const a = shuffledIndices(500, 123);
    const b = shuffledIndices(500, 123);
    const c = shuffledIndices(500, 124);
    expect(a).toEqual(b);
    expect(a).not.toEqual(c);
    expect(new Set(a).size).toBe(500);
  });
});
