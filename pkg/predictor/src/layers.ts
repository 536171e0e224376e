/** Custom layers for the sequential branch. */

import * as tf from "@tensorflow/tfjs";

export interface OneHotEmbeddingArgs {
  /** Vocabulary size including the reserved padding ID 0. */
  inputDim: number;
  outputDim: number;
  seed?: number;
  name?: string;
}

/**
 * Embedding lookup implemented as one-hot x weight matrix.
 *
 * Behaves like an embedding with maskZero (ID 0 rows produce a mask of
 * false), but its gradient is a plain matMul, which every backend provides;
 * the WASM backend lacks the scatter kernel the stock embedding gradient
 * needs.
 */
export class OneHotEmbedding extends tf.layers.Layer {
  static className = "OneHotEmbedding";

  private readonly inputDim: number;
  private readonly outputDim: number;
  private readonly seed?: number;
  private embeddings!: ReturnType<tf.layers.Layer["addWeight"]>;

  constructor(args: OneHotEmbeddingArgs) {
    super({ name: args.name });
    this.inputDim = args.inputDim;
    this.outputDim = args.outputDim;
    this.seed = args.seed;
    this.supportsMasking = true;
  }

  override build(_inputShape: tf.Shape | tf.Shape[]): void {
    this.embeddings = this.addWeight(
      "embeddings",
      [this.inputDim, this.outputDim],
      "float32",
      tf.initializers.glorotUniform({ seed: this.seed })
    );
    this.built = true;
  }

  override computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return [...inputShape, this.outputDim];
  }

  override computeMask(inputs: tf.Tensor | tf.Tensor[], _mask?: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const input = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.notEqual(input, 0);
  }

  override call(inputs: tf.Tensor | tf.Tensor[], _kwargs: {}): tf.Tensor {
    return tf.tidy(() => {
      const input = Array.isArray(inputs) ? inputs[0] : inputs;
      const [batch, steps] = input.shape as [number, number];
      const flat = tf.oneHot(tf.cast(input, "int32").reshape([-1]), this.inputDim);
      const embedded = tf.matMul(flat, this.embeddings.read() as tf.Tensor2D);
      return embedded.reshape([batch, steps, this.outputDim]);
    });
  }

  override getConfig(): tf.serialization.ConfigDict {
    return {
      ...super.getConfig(),
      inputDim: this.inputDim,
      outputDim: this.outputDim,
      seed: this.seed ?? null,
    };
  }
}

tf.serialization.registerClass(OneHotEmbedding);
