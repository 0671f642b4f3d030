import * as tf from "@tensorflow/tfjs";
import { LABELS, Sample, packSamples } from "./data.js";
import { PredictionRow, writePredictionsCsv } from "./csv.js";
import { ToyNet, ToyNetSpec, buildToyNet } from "./model.js";
import { mulberry32, shuffled } from "./rng.js";

let backendReady = false;

/**
 * Pin the pure-JS CPU backend once per process. Single-threaded and
 * free of platform kernels, it is what makes same-seed runs reproduce
 * bit for bit.
 */
export async function ensureCpuBackend(): Promise<void> {
  if (!backendReady) {
    tf.setBackend("cpu");
    await tf.ready();
    backendReady = true;
  }
}

export interface TrainOptions {
  seed: number;
  /** upper bound on epochs, default 50 */
  epochs?: number;
  batchSize?: number;
  learningRate?: number;
  /** stop early once inference accuracy on the training set reaches this */
  stopAtAccuracy?: number;
  /** when set, predictions for evalSamples (or the training set) land here */
  csvPath?: string;
  evalSamples?: readonly Sample[];
}

export interface TrainOutcome {
  net: ToyNet;
  /** epochs actually run */
  epochs: number;
  finalLoss: number;
  /** inference accuracy on the training set after the last epoch */
  finalAccuracy: number;
}

/**
 * Fit the toy classifier on the given samples. Presentation order is a
 * seeded shuffle fixed up front and `fit` runs with shuffle off, so the
 * whole optimization is a pure function of (samples, options).
 */
export async function trainToy(
  samples: readonly Sample[],
  opts: TrainOptions,
): Promise<TrainOutcome> {
  await ensureCpuBackend();
  const counts = [0, 0, 0];
  for (const s of samples) {
    if (s.label < 0 || s.label >= LABELS.length) {
      throw new Error(`sample ${s.id}: bad label ${s.label}`);
    }
    counts[s.label]++;
  }
  for (let c = 0; c < LABELS.length; c++) {
    if (counts[c] < 2) {
      throw new Error(
        `class '${LABELS[c]}' has ${counts[c]} training sample(s), need at least 2`,
      );
    }
  }

  const order = shuffled(samples, mulberry32(opts.seed));
  const { xs, ys, shape } = packSamples(order);
  const spec: ToyNetSpec = {
    height: shape[1],
    width: shape[2],
    channels: shape[3],
    seed: opts.seed,
  };
  const net = buildToyNet(spec);
  net.model.compile({
    optimizer: tf.train.adam(opts.learningRate ?? 1e-3),
    loss: "categoricalCrossentropy",
    metrics: ["accuracy"],
  });

  const xt = tf.tensor4d(xs, shape);
  const yt = tf.tensor2d(ys, [shape[0], LABELS.length]);
  const labels = order.map((s) => s.label);
  // dropout makes the fit-time accuracy metric optimistic, so progress
  // is measured the way the predictions csv will be: inference mode
  const inferAccuracy = () =>
    tf.tidy(() => {
      const out = net.model.predict(xt, { batchSize: shape[0] }) as tf.Tensor;
      const pred = out.argMax(1).dataSync();
      let hit = 0;
      for (let i = 0; i < labels.length; i++) {
        if (pred[i] === labels[i]) hit++;
      }
      return hit / labels.length;
    });
  let lastLoss = NaN;
  let lastAcc = 0;
  let ran = 0;
  const stopAt = opts.stopAtAccuracy;
  try {
    await net.model.fit(xt, yt, {
      epochs: opts.epochs ?? 50,
      batchSize: opts.batchSize ?? 8,
      shuffle: false,
      verbose: 0,
      callbacks: {
        onEpochEnd: async (epoch, logs) => {
          ran = epoch + 1;
          lastLoss = logs?.loss ?? NaN;
          lastAcc = inferAccuracy();
          if (stopAt !== undefined && lastAcc >= stopAt) {
            net.model.stopTraining = true;
          }
        },
      },
    });
  } finally {
    xt.dispose();
    yt.dispose();
  }

  if (opts.csvPath) {
    writeToyPredictions(net, opts.evalSamples ?? samples, opts.csvPath);
  }
  return { net, epochs: ran, finalLoss: lastLoss, finalAccuracy: lastAcc };
}

/** Softmax scores for each sample, rows in LABELS column order. */
export function predictScores(
  net: ToyNet,
  samples: readonly Sample[],
): number[][] {
  const { xs, shape } = packSamples(samples);
  const flat = tf.tidy(() => {
    const xt = tf.tensor4d(xs, shape);
    const out = net.model.predict(xt, { batchSize: shape[0] }) as tf.Tensor;
    return out.dataSync();
  });
  const rows: number[][] = [];
  for (let i = 0; i < samples.length; i++) {
    rows.push(Array.from(flat.slice(i * LABELS.length, (i + 1) * LABELS.length)));
  }
  return rows;
}

/** Fraction of samples whose top score matches the true label. */
export function accuracyOn(net: ToyNet, samples: readonly Sample[]): number {
  const scores = predictScores(net, samples);
  let hit = 0;
  for (let i = 0; i < samples.length; i++) {
    let best = 0;
    for (let c = 1; c < LABELS.length; c++) {
      if (scores[i][c] > scores[i][best]) best = c;
    }
    if (best === samples[i].label) hit++;
  }
  return hit / samples.length;
}

export function writeToyPredictions(
  net: ToyNet,
  samples: readonly Sample[],
  path: string,
): void {
  const scores = predictScores(net, samples);
  const rows: PredictionRow[] = samples.map((s, i) => ({
    id: s.id,
    label: s.label,
    scores: scores[i],
  }));
  writePredictionsCsv(path, rows);
}
