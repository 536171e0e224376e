export { initBackend } from "./backend";
export { DEFAULT_CONFIG, makeConfig, validateConfig } from "./config";
export type { ModelConfig } from "./config";
export { loadDataset, SPLIT_NAMES } from "./data";
export type { Dataset, DatasetMeta, SplitData, SplitName } from "./data";
export { OneHotEmbedding } from "./layers";
export { buildModel, compileModel } from "./model";
export type { ModelDims } from "./model";
export { EarlyStoppingRestore, NanLossGuard, ReduceLROnPlateau } from "./callbacks";
export { mulberry32, shuffledIndices, splitTensors, disposeSplit, trainModel } from "./train";
export type { EpochRecord, TrainingHistory } from "./train";
export {
  evaluateDeadline,
  evaluateRegression,
  evaluateSplit,
  logToSeconds,
  metricsFromConfusion,
  predictLog,
  predictRemainingSeconds,
} from "./evaluate";
export type {
  ConfusionCounts,
  DeadlineMetrics,
  RegressionMetrics,
  SplitEvaluation,
} from "./evaluate";
export {
  evalReportToJson,
  evaluationToJson,
  historyToJson,
  loadModel,
  saveModel,
  writeJson,
} from "./artifacts";
