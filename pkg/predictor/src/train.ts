/** Training loop over the exported dataset splits. */

import * as tf from "@tensorflow/tfjs";

import { EarlyStoppingRestore, NanLossGuard, ReduceLROnPlateau } from "./callbacks";
import { ModelConfig } from "./config";
import { SplitData } from "./data";

export interface EpochRecord {
  epoch: number;
  loss: number;
  valLoss: number;
  mae: number;
  valMae: number;
  learningRate: number;
}

export interface TrainingHistory {
  epochs: EpochRecord[];
  bestEpoch: number;
  stoppedEpoch: number;
}

export interface SplitTensors {
  seq: tf.Tensor2D;
  dt: tf.Tensor2D;
  staticX: tf.Tensor2D;
  yLog: tf.Tensor2D;
}

/** Deterministic PRNG for the one-time training shuffle. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function shuffledIndices(n: number, seed: number): number[] {
  const indices = Array.from({ length: n }, (_, i) => i);
  const rand = mulberry32(seed);
  for (let i = n - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [indices[i], indices[j]] = [indices[j], indices[i]];
  }
  return indices;
}

function permute<T>(rows: T[], order: number[]): T[] {
  return order.map((i) => rows[i]);
}

export function splitTensors(split: SplitData, order?: number[]): SplitTensors {
  const take = <T>(rows: T[]): T[] => (order ? permute(rows, order) : rows);
  return {
    seq: tf.tensor2d(take(split.seq), undefined, "int32"),
    dt: tf.tensor2d(take(split.dt)),
    staticX: tf.tensor2d(take(split.staticX)),
    yLog: tf.tensor2d(take(split.yLog).map((v) => [v])),
  };
}

export function disposeSplit(tensors: SplitTensors): void {
  tensors.seq.dispose();
  tensors.dt.dispose();
  tensors.staticX.dispose();
  tensors.yLog.dispose();
}

export async function trainModel(
  model: tf.LayersModel,
  train: SplitData,
  val: SplitData,
  config: ModelConfig
): Promise<TrainingHistory> {
  // fit() shuffles with an unseeded RNG, so shuffle once here instead and
  // keep fit deterministic.
  const order = shuffledIndices(train.seq.length, config.seed + 7919);
  const trainT = splitTensors(train, order);
  const valT = splitTensors(val);

  const earlyStop = new EarlyStoppingRestore({ patience: config.earlyStopPatience });
  const reduceLr = new ReduceLROnPlateau({
    initialLr: config.learningRate,
    factor: config.lrReduceFactor,
    patience: config.lrReducePatience,
    minLr: config.minLearningRate,
  });
  const nanGuard = new NanLossGuard();

  try {
    const result = await model.fit(
      [trainT.seq, trainT.dt, trainT.staticX],
      trainT.yLog,
      {
        epochs: config.maxEpochs,
        batchSize: config.batchSize,
        validationData: [[valT.seq, valT.dt, valT.staticX], valT.yLog],
        shuffle: false,
        verbose: 0,
        callbacks: [earlyStop, reduceLr, nanGuard],
      }
    );
    if (nanGuard.failedEpoch >= 0) {
      throw new Error(
        `training aborted: non-finite loss at epoch ${nanGuard.failedEpoch + 1}`
      );
    }
    const losses = result.history.loss as number[];
    const epochs: EpochRecord[] = losses.map((loss, i) => ({
      epoch: i + 1,
      loss,
      valLoss: (result.history.val_loss as number[])[i],
      mae: (result.history.mae as number[])[i],
      valMae: (result.history.val_mae as number[])[i],
      learningRate: reduceLr.lrHistory[i] ?? config.learningRate,
    }));
    return {
      epochs,
      bestEpoch: earlyStop.bestEpoch + 1,
      stoppedEpoch: earlyStop.stoppedEpoch >= 0 ? earlyStop.stoppedEpoch + 1 : epochs.length,
    };
  } finally {
    disposeSplit(trainT);
    disposeSplit(valT);
  }
}
