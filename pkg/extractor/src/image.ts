/**
 * PNG decoding, rectangular cropping and bilinear resizing.
 *
 * Images are carried as planar RGB float arrays in [0, 1]; the alpha
 * channel is dropped on decode.
 */

import * as fs from "fs";
import { PNG } from "pngjs";

export interface RgbImage {
  width: number;
  height: number;
  /** length 3 * width * height, channel-major (r plane, g plane, b plane) */
  data: Float64Array;
}

export interface CropRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export function loadPng(path: string): RgbImage {
  let buffer: Buffer;
  try {
    buffer = fs.readFileSync(path);
  } catch (err) {
    throw new Error(`cannot read image file ${path}: ${(err as Error).message}`);
  }
  let png: PNG;
  try {
    png = PNG.sync.read(buffer);
  } catch (err) {
    throw new Error(`cannot decode PNG ${path}: ${(err as Error).message}`);
  }
  const { width, height } = png;
  const plane = width * height;
  const data = new Float64Array(3 * plane);
  for (let i = 0; i < plane; i++) {
    data[i] = png.data[4 * i] / 255;
    data[plane + i] = png.data[4 * i + 1] / 255;
    data[2 * plane + i] = png.data[4 * i + 2] / 255;
  }
  return { width, height, data };
}

export function crop(image: RgbImage, rect: CropRect): RgbImage {
  const { x, y, width, height } = rect;
  if (
    !Number.isInteger(x) || !Number.isInteger(y) ||
    !Number.isInteger(width) || !Number.isInteger(height) ||
    width <= 0 || height <= 0
  ) {
    throw new Error(`crop rectangle must have positive integer fields, got ${JSON.stringify(rect)}`);
  }
  if (x < 0 || y < 0 || x + width > image.width || y + height > image.height) {
    throw new Error(
      `crop ${JSON.stringify(rect)} exceeds image bounds ${image.width}x${image.height}`,
    );
  }
  const srcPlane = image.width * image.height;
  const plane = width * height;
  const data = new Float64Array(3 * plane);
  for (let c = 0; c < 3; c++) {
    for (let row = 0; row < height; row++) {
      const srcOff = c * srcPlane + (y + row) * image.width + x;
      const dstOff = c * plane + row * width;
      for (let col = 0; col < width; col++) {
        data[dstOff + col] = image.data[srcOff + col];
      }
    }
  }
  return { width, height, data };
}

/** Bilinear resampling to a square edge x edge target. */
export function resize(image: RgbImage, edge: number): RgbImage {
  const srcPlane = image.width * image.height;
  const plane = edge * edge;
  const data = new Float64Array(3 * plane);
  const sx = image.width / edge;
  const sy = image.height / edge;
  for (let row = 0; row < edge; row++) {
    const fy = Math.min((row + 0.5) * sy - 0.5, image.height - 1);
    const y0 = Math.max(Math.floor(fy), 0);
    const y1 = Math.min(y0 + 1, image.height - 1);
    const wy = Math.max(fy - y0, 0);
    for (let col = 0; col < edge; col++) {
      const fx = Math.min((col + 0.5) * sx - 0.5, image.width - 1);
      const x0 = Math.max(Math.floor(fx), 0);
      const x1 = Math.min(x0 + 1, image.width - 1);
      const wx = Math.max(fx - x0, 0);
      for (let c = 0; c < 3; c++) {
        const base = c * srcPlane;
        const top =
          image.data[base + y0 * image.width + x0] * (1 - wx) +
          image.data[base + y0 * image.width + x1] * wx;
        const bottom =
          image.data[base + y1 * image.width + x0] * (1 - wx) +
          image.data[base + y1 * image.width + x1] * wx;
        data[c * plane + row * edge + col] = top * (1 - wy) + bottom * wy;
      }
    }
  }
  return { width: edge, height: edge, data };
}
