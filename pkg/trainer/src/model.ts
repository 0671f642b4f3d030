import * as tf from "@tensorflow/tfjs";

/**
 * Input geometry and seeding for the toy classifier. Channels is 1 for
 * the intensity-only setup and 3 when two feature maps ride along with
 * the pixels. Every initializer and the dropout layer take a seed
 * derived from `seed`, so builds are reproducible.
 */
export interface ToyNetSpec {
  height: number;
  width: number;
  channels: number;
  seed: number;
  /**
   * Optional fixed binary plane (height*width). When present the input
   * is multiplied by it before the first convolution, pinning those
   * pixels to zero influence; gradients there must vanish too.
   */
  mask?: Float32Array;
}

export interface ToyNet {
  /** full network, softmax output, use for training/prediction */
  model: tf.LayersModel;
  /** same weights, pre-softmax class scores, use for saliency */
  logits: tf.LayersModel;
  spec: ToyNetSpec;
}

/**
 * Maps [0, 1] inputs onto [-1, 1]. Zero-centered inputs keep the
 * pooled conv features responsive from the first step; without this
 * the early epochs are dominated by dropout noise and training can
 * settle into a two-class rut.
 */
class CenterInputLayer extends tf.layers.Layer {
  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.sub(tf.mul(x, 2), 1);
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    return (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
  }

  override getClassName(): string {
    return "CenterInput";
  }
}

/**
 * Dropout that draws a fresh mask on every training step. The stock
 * layer feeds one fixed seed to every call, so a single mask is frozen
 * for the whole run: the dropped features never receive gradient and
 * come back untrained at inference time. Advancing the seed from a
 * step counter keeps the masks changing while the whole sequence stays
 * reproducible for a given seed.
 */
class StepDropout extends tf.layers.Layer {
  private rate: number;
  private seed: number;
  private step = 0;

  constructor(rate: number, seed: number) {
    super({ name: "head_dropout" });
    this.rate = rate;
    this.seed = seed;
  }

  override call(
    inputs: tf.Tensor | tf.Tensor[],
    kwargs: { training?: boolean },
  ): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    if (kwargs["training"] !== true) {
      return x;
    }
    this.step += 1;
    return tf.dropout(x, this.rate, undefined, this.seed + this.step);
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    return (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
  }

  override getClassName(): string {
    return "StepDropout";
  }
}

/** Multiplies activations by a constant plane; used by the mask tests. */
class PlaneMaskLayer extends tf.layers.Layer {
  private plane: tf.Tensor3D;

  constructor(plane: Float32Array, height: number, width: number) {
    super({ name: "plane_mask" });
    this.plane = tf.tensor3d(plane, [height, width, 1]);
    this.trainable = false;
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.mul(x, this.plane);
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    return (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
  }

  override getClassName(): string {
    return "PlaneMask";
  }
}

/**
 * Small from-scratch CNN: two conv/pool stages, flatten, dropout 0.5
 * in front of the dense head, then a 3-way softmax. Returns both the
 * trainable softmax model and a logits view sharing its weights.
 */
export function buildToyNet(spec: ToyNetSpec): ToyNet {
  const { height, width, channels, seed } = spec;
  const glorot = (k: number) => tf.initializers.glorotUniform({ seed: seed + k });

  const input = tf.input({ shape: [height, width, channels] });
  let x: tf.SymbolicTensor = input;
  x = new CenterInputLayer({ name: "center_input" }).apply(x) as tf.SymbolicTensor;
  if (spec.mask) {
    if (spec.mask.length !== height * width) {
      throw new Error("mask size does not match input plane");
    }
    x = new PlaneMaskLayer(spec.mask, height, width).apply(x) as tf.SymbolicTensor;
  }
  x = tf.layers
    .conv2d({
      filters: 8,
      kernelSize: 3,
      padding: "same",
      activation: "relu",
      kernelInitializer: glorot(1),
    })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .conv2d({
      filters: 32,
      kernelSize: 3,
      padding: "same",
      activation: "relu",
      kernelInitializer: glorot(2),
    })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor;
  // averaging out the spatial axes keeps the head looking at texture
  // statistics instead of memorizing where things sat in the frame
  x = tf.layers.globalAveragePooling2d({}).apply(x) as tf.SymbolicTensor;
  x = new StepDropout(0.5, seed + 3).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .dense({ units: 32, activation: "relu", kernelInitializer: glorot(4) })
    .apply(x) as tf.SymbolicTensor;
  const logitsOut = tf.layers
    .dense({ units: 3, kernelInitializer: glorot(5), name: "class_scores" })
    .apply(x) as tf.SymbolicTensor;
  const probsOut = tf.layers
    .activation({ activation: "softmax" })
    .apply(logitsOut) as tf.SymbolicTensor;

  return {
    model: tf.model({ inputs: input, outputs: probsOut }),
    logits: tf.model({ inputs: input, outputs: logitsOut }),
    spec,
  };
}
