import * as fs from "fs";
import { LABELS } from "./data.js";

/**
 * Predictions CSV in the exact layout the evaluation CLI consumes:
 * id,true_label,score_healthy,score_pneumonia,score_covid.
 */

export interface PredictionRow {
  id: string;
  /** class index into LABELS */
  label: number;
  /** softmax scores in LABELS column order */
  scores: readonly number[];
}

export function writePredictionsCsv(
  path: string,
  rows: readonly PredictionRow[],
): void {
  const lines = ["id,true_label," + LABELS.map((l) => `score_${l}`).join(",")];
  for (const r of rows) {
    if (r.scores.length !== LABELS.length) {
      throw new Error(`row ${r.id}: expected ${LABELS.length} scores`);
    }
    lines.push(
      `${r.id},${LABELS[r.label]},` + r.scores.map((v) => String(v)).join(","),
    );
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}
