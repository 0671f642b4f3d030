import * as tf from "@tensorflow/tfjs";
import { Sample } from "./data.js";
import { FloatMap } from "./fmap.js";
import { ToyNet } from "./model.js";

/**
 * Gradient saliency: absolute gradient of the target class's
 * pre-softmax score with respect to the input pixels, collapsed over
 * channels by taking the maximum. Output is one nonnegative plane with
 * the input's spatial dims.
 */
export function saliencyMap(
  net: ToyNet,
  channels: readonly Float32Array[],
  target: number,
): Float32Array {
  const { height: h, width: w, channels: c } = net.spec;
  if (channels.length !== c) {
    throw new Error(`expected ${c} channel planes, got ${channels.length}`);
  }
  if (!Number.isInteger(target) || target < 0 || target > 2) {
    throw new Error(`target class must be 0..2, got ${target}`);
  }
  const xs = new Float32Array(h * w * c);
  for (let p = 0; p < h * w; p++) {
    for (let k = 0; k < c; k++) {
      xs[p * c + k] = channels[k][p];
    }
  }
  return tf.tidy(() => {
    const score = (x: tf.Tensor) =>
      (net.logits.apply(x) as tf.Tensor).slice([0, target], [1, 1]).sum();
    const g = tf.grad(score)(tf.tensor4d(xs, [1, h, w, c]));
    const plane = g.abs().max(3).squeeze([0]);
    return plane.dataSync() as Float32Array;
  });
}

/** Saliency for one sample as a named float map, ready to write out. */
export function saliencyFmap(
  net: ToyNet,
  sample: Sample,
  target: number,
  name?: string,
): FloatMap {
  return {
    name: name ?? `saliency_${sample.id}`,
    width: sample.width,
    height: sample.height,
    values: saliencyMap(net, sample.channels, target),
  };
}
