/** Model and training hyperparameters. */

export interface ModelConfig {
  embedDim: number;
  /** Recurrent units per direction; the bidirectional output is twice this. */
  recurrentUnits: number;
  dropout: number;
  seqDense: number;
  staticDense: [number, number];
  fusionDense: [number, number];
  learningRate: number;
  maxEpochs: number;
  batchSize: number;
  earlyStopPatience: number;
  lrReduceFactor: number;
  lrReducePatience: number;
  minLearningRate: number;
  seed: number;
  /** Seeds dropout masks too; trades mask freshness for bit-reproducible runs. */
  deterministic: boolean;
}

export const DEFAULT_CONFIG: ModelConfig = {
  embedDim: 64,
  recurrentUnits: 64,
  dropout: 0.15,
  seqDense: 64,
  staticDense: [128, 64],
  fusionDense: [128, 64],
  learningRate: 1e-3,
  maxEpochs: 40,
  batchSize: 64,
  earlyStopPatience: 8,
  lrReduceFactor: 0.5,
  lrReducePatience: 3,
  minLearningRate: 1e-5,
  seed: 0,
  deterministic: false,
};

export function makeConfig(overrides: Partial<ModelConfig> = {}): ModelConfig {
  const config = { ...DEFAULT_CONFIG, ...overrides };
  validateConfig(config);
  return config;
}

export function validateConfig(config: ModelConfig): void {
  const dims: Array<[string, number]> = [
    ["embedDim", config.embedDim],
    ["recurrentUnits", config.recurrentUnits],
    ["seqDense", config.seqDense],
    ["staticDense[0]", config.staticDense[0]],
    ["staticDense[1]", config.staticDense[1]],
    ["fusionDense[0]", config.fusionDense[0]],
    ["fusionDense[1]", config.fusionDense[1]],
    ["maxEpochs", config.maxEpochs],
    ["batchSize", config.batchSize],
  ];
  for (const [name, value] of dims) {
    if (!(value > 0)) {
      throw new Error(`config.${name} must be > 0, got ${value}`);
    }
  }
  if (!(config.dropout >= 0 && config.dropout < 1)) {
    throw new Error(`config.dropout must be in [0, 1), got ${config.dropout}`);
  }
}
