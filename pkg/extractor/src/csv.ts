/**
 * The monthly feature CSV the forecasting package ingests:
 * header `month,z0,...,z{K-1}`, one row per month, months as YYYY-MM.
 */

import * as fs from "fs";
import * as path from "path";

export interface FeatureRow {
  month: string;
  vector: Float64Array;
}

const MONTH_RE = /^\d{4}-(0[1-9]|1[0-2])$/;

export function isMonthLabel(label: string): boolean {
  return MONTH_RE.test(label);
}

/** Shortest round-trip decimal form, matching the Python writer. */
export function fnum(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`non-finite feature value ${x}`);
  }
  return String(x);
}

export function writeFeatureCsv(outPath: string, rows: FeatureRow[]): void {
  if (rows.length === 0) {
    throw new Error("no feature rows to write");
  }
  const width = rows[0].vector.length;
  for (const row of rows) {
    if (!isMonthLabel(row.month)) {
      throw new Error(`bad month id ${JSON.stringify(row.month)} (want YYYY-MM)`);
    }
    if (row.vector.length !== width) {
      throw new Error(
        `inconsistent feature widths: ${row.vector.length} vs ${width} (${row.month})`,
      );
    }
  }
  const header = ["month"];
  for (let i = 0; i < width; i++) header.push(`z${i}`);
  const lines = [header.join(",")];
  for (const row of rows) {
    const cells = [row.month];
    for (let i = 0; i < width; i++) cells.push(fnum(row.vector[i]));
    lines.push(cells.join(","));
  }
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, lines.join("\n") + "\n");
}

export function readEmbeddingCsv(csvPath: string): Map<string, [number, number, number]> {
  const text = fs.readFileSync(csvPath, "utf-8").trim();
  const lines = text.split("\n");
  if (lines[0] !== "month,v1,v2,v3") {
    throw new Error(`unexpected embedding header ${JSON.stringify(lines[0])}`);
  }
  const out = new Map<string, [number, number, number]>();
  for (const line of lines.slice(1)) {
    const [month, a, b, c] = line.split(",");
    out.set(month, [Number(a), Number(b), Number(c)]);
  }
  return out;
}
