/** Prediction, regression metrics, and deadline-compliance scoring. */

import * as tf from "@tensorflow/tfjs";

import { SplitData } from "./data";
import { splitTensors, disposeSplit } from "./train";

export interface ConfusionCounts {
  tp: number;
  tn: number;
  fp: number;
  fn: number;
}

export interface DeadlineMetrics {
  accuracy: number;
  f1: number;
  confusion: ConfusionCounts;
  precisionCompliant: number;
  recallCompliant: number;
  specificityNoncompliant: number;
}

export interface RegressionMetrics {
  maeHours: number;
  r2Log: number;
}

export interface SplitEvaluation extends RegressionMetrics, DeadlineMetrics {
  n: number;
}

/** Model output is log1p(seconds); invert and floor at zero. */
export function logToSeconds(yLog: number): number {
  return Math.max(0, Math.expm1(yLog));
}

export function predictLog(model: tf.LayersModel, split: SplitData, batchSize = 256): number[] {
  const tensors = splitTensors(split);
  try {
    const out = model.predict([tensors.seq, tensors.dt, tensors.staticX], {
      batchSize,
    }) as tf.Tensor;
    const values = Array.from(out.dataSync());
    out.dispose();
    return values;
  } finally {
    disposeSplit(tensors);
  }
}

export function predictRemainingSeconds(
  model: tf.LayersModel,
  split: SplitData,
  batchSize = 256
): number[] {
  return predictLog(model, split, batchSize).map(logToSeconds);
}

export function evaluateRegression(
  predictedSeconds: number[],
  truthSeconds: number[]
): RegressionMetrics {
  if (predictedSeconds.length !== truthSeconds.length) {
    throw new Error(
      `length mismatch: ${predictedSeconds.length} predictions vs ${truthSeconds.length} truths`
    );
  }
  if (predictedSeconds.length < 2) {
    throw new Error("need at least 2 observations to evaluate");
  }
  const n = predictedSeconds.length;
  let absSum = 0;
  for (let i = 0; i < n; i++) {
    absSum += Math.abs(predictedSeconds[i] - truthSeconds[i]);
  }
  const maeHours = absSum / n / 3600;

  const logTruth = truthSeconds.map((v) => Math.log1p(v));
  const logPred = predictedSeconds.map((v) => Math.log1p(v));
  const meanLog = logTruth.reduce((a, b) => a + b, 0) / n;
  let sse = 0;
  let sst = 0;
  for (let i = 0; i < n; i++) {
    sse += (logTruth[i] - logPred[i]) ** 2;
    sst += (logTruth[i] - meanLog) ** 2;
  }
  const r2Log = sst === 0 ? (sse === 0 ? 1 : 0) : 1 - sse / sst;
  return { maeHours, r2Log };
}

export function metricsFromConfusion(confusion: ConfusionCounts): DeadlineMetrics {
  const { tp, tn, fp, fn } = confusion;
  const total = tp + tn + fp + fn;
  const precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  const f1 = precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
  return {
    accuracy: total > 0 ? (tp + tn) / total : 0,
    f1,
    confusion,
    precisionCompliant: precision,
    recallCompliant: recall,
    specificityNoncompliant: tn + fp > 0 ? tn / (tn + fp) : 0,
  };
}

/**
 * Compliance scoring with "Compliant" as the positive class.
 *
 * A case is compliant when elapsed + remaining stays within its deadline;
 * the predicted label applies the same rule to the predicted remaining time.
 */
export function evaluateDeadline(
  predictedSeconds: number[],
  elapsedSeconds: number[],
  deadlineSeconds: number[],
  truthSeconds: number[]
): DeadlineMetrics {
  const n = predictedSeconds.length;
  if (
    elapsedSeconds.length !== n ||
    deadlineSeconds.length !== n ||
    truthSeconds.length !== n
  ) {
    throw new Error("evaluateDeadline: input vectors must share one length");
  }
  const confusion: ConfusionCounts = { tp: 0, tn: 0, fp: 0, fn: 0 };
  for (let i = 0; i < n; i++) {
    const predictedCompliant = elapsedSeconds[i] + predictedSeconds[i] <= deadlineSeconds[i];
    const actuallyCompliant = elapsedSeconds[i] + truthSeconds[i] <= deadlineSeconds[i];
    if (predictedCompliant && actuallyCompliant) confusion.tp += 1;
    else if (!predictedCompliant && !actuallyCompliant) confusion.tn += 1;
    else if (predictedCompliant) confusion.fp += 1;
    else confusion.fn += 1;
  }
  return metricsFromConfusion(confusion);
}

export function evaluateSplit(model: tf.LayersModel, split: SplitData): SplitEvaluation {
  const predicted = predictRemainingSeconds(model, split);
  const regression = evaluateRegression(predicted, split.ySeconds);
  const deadline = evaluateDeadline(
    predicted,
    split.elapsedSeconds,
    split.deadlineSeconds,
    split.ySeconds
  );
  return { n: predicted.length, ...regression, ...deadline };
}
