/**
 * Cluster-quality report: how well the flood months (June..October)
 * separate from the rest in the 3-D embedding of the feature vectors.
 *
 * The embedding itself comes from the forecasting package, invoked via
 * file exchange (`floodcast weights --features ... --out ...`); this module
 * then scores the labelled embedding with the mean silhouette coefficient.
 */

import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { readEmbeddingCsv } from "./csv";

const FLOOD_MONTHS = new Set([6, 7, 8, 9, 10]);

export function monthNumber(label: string): number {
  return Number(label.split("-")[1]);
}

export function silhouette(points: number[][], labels: number[]): number {
  const n = points.length;
  const uniq = [...new Set(labels)];
  if (uniq.length < 2) {
    throw new Error("silhouette needs at least two groups");
  }
  const dist = (a: number[], b: number[]) =>
    Math.sqrt(a.reduce((acc, v, i) => acc + (v - b[i]) ** 2, 0));
  let total = 0;
  for (let i = 0; i < n; i++) {
    const same: number[] = [];
    const others = new Map<number, number[]>();
    for (let j = 0; j < n; j++) {
      if (j === i) continue;
      const d = dist(points[i], points[j]);
      if (labels[j] === labels[i]) same.push(d);
      else {
        const bucket = others.get(labels[j]) ?? [];
        bucket.push(d);
        others.set(labels[j], bucket);
      }
    }
    if (same.length === 0) continue; // singleton group contributes 0
    const a = same.reduce((x, y) => x + y, 0) / same.length;
    let b = Infinity;
    for (const bucket of others.values()) {
      b = Math.min(b, bucket.reduce((x, y) => x + y, 0) / bucket.length);
    }
    const denom = Math.max(a, b);
    total += denom === 0 ? 0 : (b - a) / denom;
  }
  return total / n;
}

export interface ClusterReport {
  silhouette: number;
  floodMonths: number;
  otherMonths: number;
}

/** Run the forecasting package's weight pipeline to get the embedding. */
export function embedViaPrimary(featureCsv: string, workDir?: string): Map<string, [number, number, number]> {
  const out = workDir ?? fs.mkdtempSync(path.join(os.tmpdir(), "sst-embed-"));
  const res = spawnSync(
    "floodcast",
    ["weights", "--features", featureCsv, "--out", out],
    { encoding: "utf-8" },
  );
  if (res.error) {
    throw new Error(`cannot run the forecasting CLI: ${res.error.message}`);
  }
  if (res.status !== 0) {
    throw new Error(`weight pipeline failed: ${res.stderr || res.stdout}`);
  }
  return readEmbeddingCsv(path.join(out, "embedding.csv"));
}

export function clusterReport(featureCsv: string, workDir?: string): ClusterReport {
  const embedding = embedViaPrimary(featureCsv, workDir);
  const points: number[][] = [];
  const labels: number[] = [];
  for (const [month, vec] of embedding) {
    points.push([...vec]);
    labels.push(FLOOD_MONTHS.has(monthNumber(month)) ? 1 : 0);
  }
  const flood = labels.filter((l) => l === 1).length;
  const other = labels.length - flood;
  if (flood < 2 || other < 2) {
    throw new Error(`need at least 2 months per group, got ${flood} flood / ${other} other`);
  }
  return {
    silhouette: silhouette(points, labels),
    floodMonths: flood,
    otherMonths: other,
  };
}
