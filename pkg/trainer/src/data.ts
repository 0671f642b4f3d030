import { Rng, gaussian, mulberry32, randInt, shuffled } from "./rng.js";
import { GrayImage } from "./png.js";

/** Class names in score-column order, matching the evaluation CSV. */
export const LABELS = ["healthy", "pneumonia", "covid"] as const;
export type Label = (typeof LABELS)[number];

export interface Split {
  train: string[];
  validation: string[];
}

/**
 * Deterministic 7:1 train/validation split. The validation share is
 * floor(n/8) so 8 ids give 7/1 and 16 give 14/2; everything else goes
 * to training. Same ids + same seed always produce the same split.
 */
export function splitDataset(ids: readonly string[], seed: number): Split {
  if (ids.length < 8) {
    throw new Error(`need at least 8 samples to split, got ${ids.length}`);
  }
  const order = shuffled(ids, mulberry32(seed));
  const nval = Math.floor(order.length / 8);
  return {
    validation: order.slice(0, nval),
    train: order.slice(nval),
  };
}

/**
 * One training example: an id, its class index, and channel planes that
 * all share the image grid (pixel plane first, optional feature maps
 * after it).
 */
export interface Sample {
  id: string;
  label: number;
  width: number;
  height: number;
  channels: Float32Array[];
}

/** Min-max normalize a plane into [0, 1]; constant planes become 0. */
export function normalizePlane(values: ArrayLike<number>): Float32Array {
  const out = new Float32Array(values.length);
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo;
  if (span > 0) {
    for (let i = 0; i < values.length; i++) {
      out[i] = (values[i] - lo) / span;
    }
  }
  return out;
}

/**
 * Flatten samples into one contiguous [n, h, w, c] float buffer plus
 * one-hot targets, in the given id order. Keeping the copy explicit
 * makes tensor construction deterministic.
 */
export function packSamples(samples: readonly Sample[]): {
  xs: Float32Array;
  ys: Float32Array;
  shape: [number, number, number, number];
} {
  const n = samples.length;
  if (n === 0) throw new Error("no samples to pack");
  const { width: w, height: h } = samples[0];
  const c = samples[0].channels.length;
  const xs = new Float32Array(n * h * w * c);
  const ys = new Float32Array(n * LABELS.length);
  for (let s = 0; s < n; s++) {
    const smp = samples[s];
    if (smp.width !== w || smp.height !== h || smp.channels.length !== c) {
      throw new Error(`sample ${smp.id} has mismatched shape`);
    }
    for (let p = 0; p < h * w; p++) {
      for (let k = 0; k < c; k++) {
        xs[s * h * w * c + p * c + k] = smp.channels[k][p];
      }
    }
    ys[s * LABELS.length + smp.label] = 1;
  }
  return { xs, ys, shape: [n, h, w, c] };
}

/**
 * Tiny synthetic set for unit tests: a central gaussian blob over a
 * noisy background, with the class coded on two independent axes so a
 * small net never has to carve a middle band out of one statistic:
 * dim smooth, bright smooth, medium with a checker texture on top.
 * Linearly separable by construction, which the training test checks
 * with an independent least-squares classifier before trusting the
 * network.
 */
export function makeBlobs(
  nPerClass: number,
  size: number,
  seed: number,
): Sample[] {
  const rng = mulberry32(seed);
  const sigma = size * 0.22;
  const amps = [0.35, 0.95, 0.65];
  const out: Sample[] = [];
  for (let c = 0; c < 3; c++) {
    for (let k = 0; k < nPerClass; k++) {
      const plane = new Float32Array(size * size);
      const cx = size / 2 + gaussian(rng) * size * 0.04;
      const cy = size / 2 + gaussian(rng) * size * 0.04;
      for (let y = 0; y < size; y++) {
        for (let x = 0; x < size; x++) {
          const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          let v = amps[c] * Math.exp(-d2 / (2 * sigma * sigma));
          if (c === 2) v += ((x + y) % 2 === 0 ? 1 : -1) * 0.18;
          v += 0.06 * gaussian(rng);
          plane[y * size + x] = Math.min(1, Math.max(0, v));
        }
      }
      out.push({
        id: `${LABELS[c]}_${k}`,
        label: c,
        width: size,
        height: size,
        channels: [plane],
      });
    }
  }
  return out;
}

/**
 * Synthetic chest-film stand-ins for the demo. The three classes carry
 * different local texture on a shared vignette so the texture features
 * (and a small CNN) have something real to pick up:
 *   healthy   - smooth lung fields, mild noise
 *   pneumonia - patchy blotches of raised intensity
 *   covid     - fine high-frequency mottling across both fields
 */
export function makeChestImage(
  label: Label,
  size: number,
  rng: Rng,
): GrayImage {
  const px = new Uint8Array(size * size);
  const patches: [number, number, number][] = [];
  if (label === "pneumonia") {
    for (let i = 0; i < 8; i++) {
      patches.push([
        randInt(rng, size),
        randInt(rng, size),
        size * (0.1 + 0.08 * rng()),
      ]);
    }
  }
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const nx = (x / size) * 2 - 1;
      const ny = (y / size) * 2 - 1;
      // dark spine band in the middle, brighter lung fields either side
      const lung = Math.exp(-((Math.abs(nx) - 0.5) ** 2) / 0.08);
      let v = 60 + 130 * lung * (1 - 0.4 * ny * ny);
      if (label === "healthy") {
        v += 6 * gaussian(rng);
      } else if (label === "pneumonia") {
        for (const [pcx, pcy, pr] of patches) {
          const d2 = (x - pcx) ** 2 + (y - pcy) ** 2;
          v += 75 * Math.exp(-d2 / (2 * pr * pr));
        }
        v += 8 * gaussian(rng);
      } else {
        // coarse mottle (period chosen to survive 3x downsampling) plus
        // noise: strong local contrast everywhere
        const cell = (Math.floor(x / 6) + Math.floor(y / 6)) % 2;
        v += (cell === 0 ? 1 : -1) * 26 + 15 * gaussian(rng);
      }
      px[y * size + x] = Math.min(255, Math.max(0, Math.round(v)));
    }
  }
  return { width: size, height: size, pixels: px };
}
