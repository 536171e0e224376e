/** Dual-branch recurrent model.
 *
 * seq_in and dt_in accept any sequence length; padding positions (ID 0) are
 * masked out of the recurrence, so extending a batch with more padding
 * columns leaves predictions unchanged. The transition channel rides along
 * the embedding through a shared mask. The single linear output is the log
 * of the remaining time in seconds.
 */

import * as tf from "@tensorflow/tfjs";

import { ModelConfig } from "./config";
import { OneHotEmbedding } from "./layers";

export interface ModelDims {
  maxLen: number;
  vocabSize: number;
  staticDim: number;
}

export function buildModel(config: ModelConfig, dims: ModelDims): tf.LayersModel {
  if (!(dims.vocabSize >= 2)) {
    throw new Error(`seq_in: vocabSize must include padding ID 0 and at least one activity, got ${dims.vocabSize}`);
  }
  if (!(dims.maxLen >= 1)) {
    throw new Error(`seq_in: maxLen must be >= 1, got ${dims.maxLen}`);
  }
  if (!(dims.staticDim >= 1)) {
    throw new Error(`stat_in: staticDim must be >= 1, got ${dims.staticDim}`);
  }
  const seed = config.seed;
  const dropoutSeed = (offset: number) => (config.deterministic ? seed + offset : undefined);

  const seqIn = tf.input({ shape: [null], dtype: "int32", name: "seq_in" });
  const dtIn = tf.input({ shape: [null], name: "dt_in" });
  const statIn = tf.input({ shape: [dims.staticDim], name: "stat_in" });

  const embedded = new OneHotEmbedding({
    inputDim: dims.vocabSize,
    outputDim: config.embedDim,
    seed: seed + 1,
    name: "activity_embedding",
  }).apply(seqIn) as tf.SymbolicTensor;

  const dtChannel = tf.layers
    .reshape({ targetShape: [-1, 1], name: "dt_channel" })
    .apply(dtIn) as tf.SymbolicTensor;

  const merged = tf.layers
    .concatenate({ name: "seq_dt_concat" })
    .apply([embedded, dtChannel]) as tf.SymbolicTensor;

  const recurrent = tf.layers
    .bidirectional({
      name: "bilstm",
      mergeMode: "concat",
      layer: tf.layers.lstm({
        units: config.recurrentUnits,
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2 }),
        recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 3 }),
      }) as tf.RNN,
    })
    .apply(merged) as tf.SymbolicTensor;

  const recurrentDropped = tf.layers
    .dropout({ rate: config.dropout, seed: dropoutSeed(101), name: "seq_dropout" })
    .apply(recurrent) as tf.SymbolicTensor;

  const seqVector = tf.layers
    .dense({
      units: config.seqDense,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 4 }),
      name: "seq_compress",
    })
    .apply(recurrentDropped) as tf.SymbolicTensor;

  let staticBranch = tf.layers
    .dense({
      units: config.staticDense[0],
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 5 }),
      name: "static_dense_1",
    })
    .apply(statIn) as tf.SymbolicTensor;
  staticBranch = tf.layers
    .dropout({ rate: config.dropout, seed: dropoutSeed(102), name: "static_dropout" })
    .apply(staticBranch) as tf.SymbolicTensor;
  staticBranch = tf.layers
    .dense({
      units: config.staticDense[1],
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 6 }),
      name: "static_dense_2",
    })
    .apply(staticBranch) as tf.SymbolicTensor;

  let fused = tf.layers
    .concatenate({ name: "fusion_concat" })
    .apply([seqVector, staticBranch]) as tf.SymbolicTensor;
  fused = tf.layers
    .dense({
      units: config.fusionDense[0],
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 7 }),
      name: "fusion_dense_1",
    })
    .apply(fused) as tf.SymbolicTensor;
  fused = tf.layers
    .dense({
      units: config.fusionDense[1],
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 8 }),
      name: "fusion_dense_2",
    })
    .apply(fused) as tf.SymbolicTensor;
  fused = tf.layers
    .dropout({ rate: config.dropout, seed: dropoutSeed(103), name: "fusion_dropout" })
    .apply(fused) as tf.SymbolicTensor;

  const output = tf.layers
    .dense({
      units: 1,
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 9 }),
      name: "log_remaining_time",
    })
    .apply(fused) as tf.SymbolicTensor;

  return tf.model({ inputs: [seqIn, dtIn, statIn], outputs: output, name: "remaining_time" });
}

export function compileModel(model: tf.LayersModel, config: ModelConfig): void {
  model.compile({
    optimizer: tf.train.adam(config.learningRate),
    loss: "meanSquaredError",
    metrics: ["mae"],
  });
}
