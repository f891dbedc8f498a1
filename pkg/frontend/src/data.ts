// Readers and writers for the core package's file formats: plan datasets
// (one JSON object per line, header first) and reward-curve CSVs. The
// prediction writer emits the same dataset shape, which is what the core
// eval command's file predictor expects.

import fs from "node:fs";
import path from "node:path";

export interface DatasetHeader {
  kind: string;
  cfg_hash: string;
  n: number; // swarm size
  t: number; // scored slots per episode
  rule: string;
}

export interface PlanRecord {
  features: number[]; // [jammer x, jammer y, then initial xy pairs]
  label: number[][]; // (n*t) rows of [x, y]; row u*t+s is slot s+1 of UAV u
  fitness: number;
  rule: string;
  seed: number;
  generator: string;
}

export interface Dataset {
  header: DatasetHeader;
  records: PlanRecord[];
}

export function readDataset(filePath: string): Dataset {
  const lines = fs
    .readFileSync(filePath, "utf8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error(`empty dataset file: ${filePath}`);
  const header = JSON.parse(lines[0]) as DatasetHeader;
  if (header.kind !== "dataset") {
    throw new Error(`not a dataset file (kind=${header.kind}): ${filePath}`);
  }
  const records = lines.slice(1).map((l) => JSON.parse(l) as PlanRecord);
  for (const r of records) {
    if (r.label.length !== header.n * header.t) {
      throw new Error(`label has ${r.label.length} rows, expected ${header.n * header.t}`);
    }
    if (r.features.length !== 2 + 2 * header.n) {
      throw new Error(`features have ${r.features.length} values, expected ${2 + 2 * header.n}`);
    }
  }
  return { header, records };
}

export function writeDataset(filePath: string, data: Dataset): void {
  const lines = [JSON.stringify(data.header)];
  for (const r of data.records) {
    lines.push(
      JSON.stringify({
        features: r.features,
        label: r.label,
        fitness: r.fitness,
        rule: r.rule,
        seed: r.seed,
        generator: r.generator,
      }),
    );
  }
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}

export function jammerOf(rec: PlanRecord): [number, number] {
  return [rec.features[0], rec.features[1]];
}

export function initialPositionsOf(rec: PlanRecord): number[][] {
  const out: number[][] = [];
  for (let i = 2; i < rec.features.length; i += 2) {
    out.push([rec.features[i], rec.features[i + 1]]);
  }
  return out;
}

/** Label rows regrouped per UAV: result[u][s] is slot s+1 of UAV u. */
export function labelByUav(rec: PlanRecord, n: number, t: number): number[][][] {
  const out: number[][][] = [];
  for (let u = 0; u < n; u++) out.push(rec.label.slice(u * t, (u + 1) * t));
  return out;
}

/** Flatten a record's label to one target vector of length 2*n*t. */
export function labelVector(rec: PlanRecord): Float64Array {
  const out = new Float64Array(rec.label.length * 2);
  for (let i = 0; i < rec.label.length; i++) {
    out[2 * i] = rec.label[i][0];
    out[2 * i + 1] = rec.label[i][1];
  }
  return out;
}

/** Inverse of labelVector: reshape a flat prediction into label rows. */
export function vectorToLabel(vec: ArrayLike<number>): number[][] {
  if (vec.length % 2 !== 0) throw new Error("label vector length must be even");
  const rows: number[][] = [];
  for (let i = 0; i < vec.length; i += 2) rows.push([vec[i], vec[i + 1]]);
  return rows;
}

/**
 * Write model predictions for an eval set as a dataset-format file. The
 * features are copied from the eval records untouched, which is how the
 * core eval command pairs predictions with its own ground truth. Fitness
 * is written as 0: scoring is the core's job, not the harness's.
 */
export function writePredictions(
  filePath: string,
  evalSet: Dataset,
  predicted: number[][][], // one label row-set per eval record
  generator: string,
): void {
  if (predicted.length !== evalSet.records.length) {
    throw new Error(`${predicted.length} predictions for ${evalSet.records.length} eval records`);
  }
  writeDataset(filePath, {
    header: evalSet.header,
    records: evalSet.records.map((rec, i) => ({
      features: rec.features,
      label: predicted[i],
      fitness: 0,
      rule: rec.rule,
      seed: rec.seed,
      generator,
    })),
  });
}

export interface RewardRowOut {
  episode: number;
  meanReward: number;
}

export function writeRewardCsv(filePath: string, rows: RewardRowOut[]): void {
  const lines = ["episode,mean_reward"];
  for (const r of rows) lines.push(`${r.episode},${r.meanReward}`);
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}

export function readRewardCsv(filePath: string): RewardRowOut[] {
  const lines = fs
    .readFileSync(filePath, "utf8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines[0] !== "episode,mean_reward") {
    throw new Error(`unexpected reward CSV header: ${lines[0]}`);
  }
  return lines.slice(1).map((l) => {
    const [e, r] = l.split(",");
    return { episode: Number(e), meanReward: Number(r) };
  });
}

/** Parse the metrics CSV the core eval command writes, one row per object. */
export function readMetricsCsv(filePath: string): Record<string, string>[] {
  const lines = fs
    .readFileSync(filePath, "utf8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  const cols = lines[0].split(",");
  return lines.slice(1).map((l) => {
    const vals = l.split(",");
    const row: Record<string, string> = {};
    cols.forEach((c, i) => (row[c] = vals[i] ?? ""));
    return row;
  });
}
