import { execFileSync } from "child_process";
import * as fs from "fs";
import * as path from "path";
import { LABELS, Label, Sample, makeChestImage, normalizePlane, splitDataset } from "./data.js";
import { readFmap, writeFmap } from "./fmap.js";
import { readGrayPng, writeGrayPng } from "./png.js";
import { saliencyFmap } from "./saliency.js";
import { accuracyOn, trainToy } from "./train.js";
import { mulberry32 } from "./rng.js";

/**
 * End-to-end walkthrough against the real feature-map CLI: synthesize a
 * small three-cohort image set, preprocess and extract feature maps
 * with the `rfmap` tool, train five versions of the toy classifier in
 * both channel setups (intensity only, intensity + two feature maps),
 * derive gradient saliency for the held-out images, rank the feature
 * maps against those saliency maps, and aggregate the five prediction
 * sets into metrics and ROC bands. Budgeted to finish well inside ten
 * minutes on one CPU.
 */

const RAW_SIZE = 96;
const NET_SIZE = 32;
const PER_CLASS = 8;
const VERSIONS = 5;
const MAX_EPOCHS = 25;
const RFMAP = process.env.RFMAP_BIN ?? "rfmap";

function run(args: string[]): string {
  return execFileSync(RFMAP, args, { encoding: "utf-8" });
}

function loadChannelPlanes(mapDir: string, wanted: string[]): Float32Array[] {
  const byName = new Map<string, Float32Array>();
  for (const f of fs.readdirSync(mapDir)) {
    if (!f.endsWith(".fmap")) continue;
    const fm = readFmap(path.join(mapDir, f));
    byName.set(fm.name, fm.values);
  }
  return wanted.map((name) => {
    const v = byName.get(name);
    if (!v) throw new Error(`${mapDir}: no map named ${name}`);
    return normalizePlane(v);
  });
}

async function main(): Promise<void> {
  const t0 = Date.now();
  const out = path.resolve(process.argv[2] ?? "demo_out");
  const dirs = {
    raw: path.join(out, "raw"),
    pre: path.join(out, "pre"),
    maps: path.join(out, "maps"),
    pred: path.join(out, "pred"),
    sal1: path.join(out, "sal_c1"),
    sal3: path.join(out, "sal_c3"),
  };
  fs.rmSync(out, { recursive: true, force: true });
  for (const d of Object.values(dirs)) fs.mkdirSync(d, { recursive: true });

  const step = (msg: string) =>
    console.log(`[${((Date.now() - t0) / 1000).toFixed(1)}s] ${msg}`);

  // --- synthetic three-cohort image set -------------------------------
  const ids: string[] = [];
  LABELS.forEach((label, c) => {
    for (let k = 0; k < PER_CLASS; k++) {
      const id = `${label}_${k}`;
      const img = makeChestImage(label as Label, RAW_SIZE, mulberry32(7000 + 100 * c + k));
      writeGrayPng(path.join(dirs.raw, `${id}.png`), img);
      ids.push(id);
    }
  });
  step(`wrote ${ids.length} synthetic images (${RAW_SIZE}x${RAW_SIZE})`);

  // --- preprocess + per-image feature map extraction ------------------
  const cfgPath = path.join(out, "demo.cfg");
  fs.writeFileSync(
    cfgPath,
    `resize_w=${NET_SIZE}\nresize_h=${NET_SIZE}\nkernel=13\nng=32\n`,
  );
  run([
    "preprocess",
    ...ids.map((id) => path.join(dirs.raw, `${id}.png`)),
    "--out",
    dirs.pre,
    "--config",
    cfgPath,
  ]);
  step(`preprocessed to ${NET_SIZE}x${NET_SIZE}`);
  for (const id of ids) {
    run([
      "extract",
      path.join(dirs.pre, `${id}.png`),
      "--out",
      path.join(dirs.maps, id),
      "--config",
      cfgPath,
    ]);
  }
  step("extracted 37 feature maps per image");

  // --- datasets: intensity only, and intensity + two feature maps -----
  const samplesC1: Sample[] = [];
  const samplesC3: Sample[] = [];
  for (const id of ids) {
    const label = LABELS.findIndex((l) => id.startsWith(l));
    const img = readGrayPng(path.join(dirs.pre, `${id}.png`));
    const pix = normalizePlane(img.pixels);
    const base = { id, label, width: img.width, height: img.height };
    samplesC1.push({ ...base, channels: [pix] });
    const extras = loadChannelPlanes(path.join(dirs.maps, id), [
      "Contrast",
      "ShortRunEmphasis",
    ]);
    samplesC3.push({ ...base, channels: [pix, ...extras] });
  }
  const split = splitDataset(ids, 0);
  step(
    `split ${ids.length} samples into ${split.train.length} train / ` +
      `${split.validation.length} validation`,
  );

  // --- five training versions per channel setup -----------------------
  const byId = (pool: Sample[], want: string[]) =>
    want.map((id) => pool.find((s) => s.id === id)!);
  const setups: [string, Sample[], number][] = [
    ["c1", samplesC1, 100],
    ["c3", samplesC3, 200],
  ];
  const vZero: Record<string, Awaited<ReturnType<typeof trainToy>>> = {};
  for (const [tag, pool, seedBase] of setups) {
    const train = byId(pool, split.train);
    const val = byId(pool, split.validation);
    for (let v = 0; v < VERSIONS; v++) {
      const outcome = await trainToy(train, {
        seed: seedBase + v,
        epochs: MAX_EPOCHS,
        batchSize: 4,
        stopAtAccuracy: 0.95,
        csvPath: path.join(dirs.pred, `${tag}_v${v}.csv`),
        evalSamples: pool,
      });
      if (v === 0) vZero[tag] = outcome;
      step(
        `${tag} version ${v}: ${outcome.epochs} epochs, ` +
          `train acc ${outcome.finalAccuracy.toFixed(3)}, ` +
          `val acc ${accuracyOn(outcome.net, val).toFixed(3)}`,
      );
    }
  }

  // --- saliency for held-out images, then feature-map ranking ---------
  for (const [tag, pool] of [
    ["c1", samplesC1],
    ["c3", samplesC3],
  ] as [string, Sample[]][]) {
    const salDir = tag === "c1" ? dirs.sal1 : dirs.sal3;
    for (const s of byId(pool, split.validation)) {
      const fm = saliencyFmap(vZero[tag].net, s, s.label);
      writeFmap(path.join(salDir, `${s.id}.fmap`), fm);
    }
    run([
      "rank",
      "--maps",
      dirs.maps,
      "--sms",
      salDir,
      "--out",
      path.join(out, `rank_${tag}.csv`),
      "--config",
      cfgPath,
    ]);
    const picked = fs
      .readFileSync(path.join(out, `rank_${tag}.csv`), "utf-8")
      .trim()
      .split("\n")
      .filter((l) => l.endsWith(",1"))
      .map((l) => l.split(",")[0]);
    step(`${tag}: selected feature maps vs saliency: ${picked.join(", ")}`);
  }

  // --- aggregate the five versions into metrics and ROC bands ---------
  for (const tag of ["c1", "c3"]) {
    const preds: string[] = [];
    for (let v = 0; v < VERSIONS; v++) {
      preds.push("--pred", path.join(dirs.pred, `${tag}_v${v}.csv`));
    }
    run(["metrics", ...preds, "--out", path.join(out, `metrics_${tag}.csv`)]);
    run(["roc", ...preds, "--out", path.join(out, `roc_${tag}.csv`)]);
    console.log(`\n${tag} metrics over ${VERSIONS} versions:`);
    console.log(fs.readFileSync(path.join(out, `metrics_${tag}.csv`), "utf-8"));
  }

  const elapsed = (Date.now() - t0) / 1000;
  console.log(`done in ${elapsed.toFixed(1)}s (budget 600s)`);
  if (elapsed > 600) {
    console.error("demo exceeded its ten minute budget");
    process.exit(1);
  }
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
