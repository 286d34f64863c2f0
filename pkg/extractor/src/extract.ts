/**
 * Extraction pipeline: image directory -> monthly feature CSV.
 *
 * Images are PNG files named `YYYY-MM.png`; every image is cropped to the
 * configured rectangle, resized to the network's native input edge and fed
 * through the feature backend. All images must share their dimensions.
 */

import * as fs from "fs";
import * as path from "path";

import { createBackend, FeatureBackend } from "./backend";
import { crop, CropRect, loadPng, resize } from "./image";
import { networkSpec } from "./networks";
import { FeatureRow, isMonthLabel, writeFeatureCsv } from "./csv";

export interface ExtractConfig {
  imageDir: string;
  cropRect: CropRect;
  network: string;
  outPath: string;
  backend?: string;
}

export function listMonthImages(imageDir: string): Array<{ month: string; file: string }> {
  let entries: string[];
  try {
    entries = fs.readdirSync(imageDir);
  } catch (err) {
    throw new Error(`cannot list image directory ${imageDir}: ${(err as Error).message}`);
  }
  const out: Array<{ month: string; file: string }> = [];
  for (const entry of entries.sort()) {
    if (!entry.toLowerCase().endsWith(".png")) continue;
    const month = entry.slice(0, -4);
    if (!isMonthLabel(month)) {
      throw new Error(`image file ${entry} is not named YYYY-MM.png`);
    }
    out.push({ month, file: path.join(imageDir, entry) });
  }
  if (out.length === 0) {
    throw new Error(`no YYYY-MM.png images in ${imageDir}`);
  }
  return out;
}

export function extractFeatures(config: ExtractConfig): FeatureRow[] {
  const spec = networkSpec(config.network);
  const backend: FeatureBackend = createBackend(config.backend ?? "projection");
  const images = listMonthImages(config.imageDir);

  let dims: [number, number] | null = null;
  const rows: FeatureRow[] = [];
  for (const { month, file } of images) {
    const image = loadPng(file);
    if (dims === null) {
      dims = [image.width, image.height];
    } else if (image.width !== dims[0] || image.height !== dims[1]) {
      throw new Error(
        `image ${file} is ${image.width}x${image.height}, expected ${dims[0]}x${dims[1]}`,
      );
    }
    const prepared = resize(crop(image, config.cropRect), spec.inputSize);
    const vector = backend.extract(prepared, spec);
    if (vector.length !== spec.width) {
      throw new Error(
        `backend emitted width ${vector.length}, network table says ${spec.width}`,
      );
    }
    rows.push({ month, vector });
  }
  return rows;
}

export function runExtraction(config: ExtractConfig): number {
  const rows = extractFeatures(config);
  writeFeatureCsv(config.outPath, rows);
  return rows.length;
}
