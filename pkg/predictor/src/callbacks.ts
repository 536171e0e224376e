/** Training callbacks: early stopping with best-weight restore, and
 * learning-rate halving on validation plateau.
 *
 * Handlers are passed through the CustomCallback constructor rather than
 * overridden, so the framework resolves log values to plain numbers before
 * they reach us.
 */

import * as tf from "@tensorflow/tfjs";

export class EarlyStoppingRestore extends tf.CustomCallback {
  private trainedModel: tf.LayersModel | null = null;
  private readonly patience: number;
  private readonly monitor: string;
  private best = Number.POSITIVE_INFINITY;
  bestEpoch = -1;
  stoppedEpoch = -1;
  private wait = 0;
  private bestWeights: tf.Tensor[] | null = null;

  constructor(args: { patience: number; monitor?: string }) {
    super({
      onEpochEnd: async (epoch, logs) => this.handleEpochEnd(epoch, logs),
      onTrainEnd: async () => this.handleTrainEnd(),
    });
    this.patience = args.patience;
    this.monitor = args.monitor ?? "val_loss";
  }

  override setModel(model: tf.LayersModel): void {
    this.trainedModel = model;
  }

  private snapshotWeights(): void {
    if (this.bestWeights) {
      this.bestWeights.forEach((w) => w.dispose());
    }
    this.bestWeights = this.trainedModel!.getWeights().map((w) => w.clone());
  }

  private handleEpochEnd(epoch: number, logs?: tf.Logs): void {
    const current = logs?.[this.monitor];
    if (typeof current !== "number" || this.trainedModel === null) {
      return;
    }
    if (current < this.best) {
      this.best = current;
      this.bestEpoch = epoch;
      this.wait = 0;
      this.snapshotWeights();
    } else {
      this.wait += 1;
      if (this.wait >= this.patience) {
        this.stoppedEpoch = epoch;
        this.trainedModel.stopTraining = true;
      }
    }
  }

  private handleTrainEnd(): void {
    if (this.bestWeights && this.trainedModel) {
      this.trainedModel.setWeights(this.bestWeights);
      this.bestWeights.forEach((w) => w.dispose());
      this.bestWeights = null;
    }
  }
}

export class ReduceLROnPlateau extends tf.CustomCallback {
  private trainedModel: tf.LayersModel | null = null;
  private readonly factor: number;
  private readonly patience: number;
  private readonly minLr: number;
  private readonly monitor: string;
  private best = Number.POSITIVE_INFINITY;
  private wait = 0;
  currentLr: number;
  readonly lrHistory: number[] = [];

  constructor(args: {
    initialLr: number;
    factor: number;
    patience: number;
    minLr: number;
    monitor?: string;
  }) {
    super({ onEpochEnd: async (epoch, logs) => this.handleEpochEnd(epoch, logs) });
    this.currentLr = args.initialLr;
    this.factor = args.factor;
    this.patience = args.patience;
    this.minLr = args.minLr;
    this.monitor = args.monitor ?? "val_loss";
  }

  override setModel(model: tf.LayersModel): void {
    this.trainedModel = model;
  }

  private handleEpochEnd(_epoch: number, logs?: tf.Logs): void {
    this.lrHistory.push(this.currentLr);
    const current = logs?.[this.monitor];
    if (typeof current !== "number" || this.trainedModel === null) {
      return;
    }
    if (current < this.best) {
      this.best = current;
      this.wait = 0;
      return;
    }
    this.wait += 1;
    if (this.wait >= this.patience) {
      const next = Math.max(this.currentLr * this.factor, this.minLr);
      if (next < this.currentLr) {
        this.currentLr = next;
        // Mutating the optimizer keeps its moment estimates, unlike recompiling.
        (this.trainedModel.optimizer as unknown as { learningRate: number }).learningRate = next;
      }
      this.wait = 0;
    }
  }
}

export class NanLossGuard extends tf.CustomCallback {
  private trainedModel: tf.LayersModel | null = null;
  failedEpoch = -1;

  constructor() {
    super({
      onEpochEnd: async (epoch, logs) => {
        const loss = logs?.loss;
        if (typeof loss === "number" && !Number.isFinite(loss)) {
          this.failedEpoch = epoch;
          if (this.trainedModel) {
            this.trainedModel.stopTraining = true;
          }
        }
      },
    });
  }

  override setModel(model: tf.LayersModel): void {
    this.trainedModel = model;
  }
}
