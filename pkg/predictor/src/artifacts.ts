/** Model weights persistence and report files.
 *
 * Weights are stored as a raw float32 blob plus a JSON manifest naming each
 * tensor; the model itself is rebuilt from config at load time, which keeps
 * the format independent of library serialization details.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { ModelConfig, makeConfig } from "./config";
import { SplitEvaluation } from "./evaluate";
import { buildModel, compileModel, ModelDims } from "./model";
import { TrainingHistory } from "./train";

export const MODEL_SCHEMA_VERSION = 1;

interface WeightSpec {
  name: string;
  shape: number[];
  size: number;
}

export interface ModelMeta {
  schema_version: number;
  config: ModelConfig;
  dims: ModelDims;
  weights: WeightSpec[];
}

export function writeJson(filePath: string, payload: unknown): void {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, JSON.stringify(payload, null, 2) + "\n", "utf-8");
}

export function saveModel(dir: string, model: tf.LayersModel, config: ModelConfig, dims: ModelDims): void {
  fs.mkdirSync(dir, { recursive: true });
  const weights = model.getWeights();
  const specs: WeightSpec[] = [];
  const buffers: Buffer[] = [];
  model.weights.forEach((layerWeight, i) => {
    const tensor = weights[i];
    const data = tensor.dataSync() as Float32Array;
    specs.push({ name: layerWeight.name, shape: tensor.shape.slice(), size: data.length });
    buffers.push(Buffer.from(data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength)));
  });
  fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.concat(buffers));
  const meta: ModelMeta = {
    schema_version: MODEL_SCHEMA_VERSION,
    config,
    dims,
    weights: specs,
  };
  writeJson(path.join(dir, "model_meta.json"), meta);
}

export function loadModel(dir: string): { model: tf.LayersModel; meta: ModelMeta } {
  const metaPath = path.join(dir, "model_meta.json");
  const meta: ModelMeta = JSON.parse(fs.readFileSync(metaPath, "utf-8"));
  if (meta.schema_version !== MODEL_SCHEMA_VERSION) {
    throw new Error(`${metaPath}: schema_version ${meta.schema_version}, expected ${MODEL_SCHEMA_VERSION}`);
  }
  const config = makeConfig(meta.config);
  const model = buildModel(config, meta.dims);
  compileModel(model, config);

  const blob = fs.readFileSync(path.join(dir, "weights.bin"));
  const raw = new Float32Array(blob.buffer, blob.byteOffset, blob.byteLength / 4);
  let offset = 0;
  const tensors: tf.Tensor[] = [];
  // The library appends per-process instance counters to name segments
  // (kernel_7, forward_lstm_LSTM3), so compare with counters stripped. The
  // check is positional; collisions after stripping are fine.
  const canonical = (name: string) =>
    name
      .split("/")
      .map((segment) => segment.replace(/_?\d+$/, ""))
      .join("/");
  const names = model.weights.map((w) => canonical(w.name));
  meta.weights.forEach((spec, i) => {
    if (names[i] !== canonical(spec.name)) {
      throw new Error(`weight order mismatch at ${i}: file has ${spec.name}, model has ${names[i]}`);
    }
    tensors.push(tf.tensor(raw.slice(offset, offset + spec.size), spec.shape));
    offset += spec.size;
  });
  model.setWeights(tensors);
  tensors.forEach((t) => t.dispose());
  return { model, meta };
}

export function historyToJson(history: TrainingHistory): Record<string, unknown> {
  return {
    schema_version: 1,
    best_epoch: history.bestEpoch,
    stopped_epoch: history.stoppedEpoch,
    epochs: history.epochs.map((e) => ({
      epoch: e.epoch,
      loss: e.loss,
      val_loss: e.valLoss,
      mae: e.mae,
      val_mae: e.valMae,
      learning_rate: e.learningRate,
    })),
  };
}

export function evaluationToJson(evaluation: SplitEvaluation): Record<string, unknown> {
  return {
    n: evaluation.n,
    mae_hours: evaluation.maeHours,
    r2_log: evaluation.r2Log,
    accuracy: evaluation.accuracy,
    f1: evaluation.f1,
    confusion: {
      tp: evaluation.confusion.tp,
      tn: evaluation.confusion.tn,
      fp: evaluation.confusion.fp,
      fn: evaluation.confusion.fn,
    },
    precision_compliant: evaluation.precisionCompliant,
    recall_compliant: evaluation.recallCompliant,
    specificity_noncompliant: evaluation.specificityNoncompliant,
  };
}

export function evalReportToJson(
  evaluations: Partial<Record<"train" | "val" | "test", SplitEvaluation>>
): Record<string, unknown> {
  const splits: Record<string, unknown> = {};
  for (const name of ["train", "val", "test"] as const) {
    const evaluation = evaluations[name];
    if (evaluation) {
      splits[name] = evaluationToJson(evaluation);
    }
  }
  return { schema_version: 1, splits };
}
