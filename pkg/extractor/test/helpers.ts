import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";

/** Deterministic little PRNG for test fixtures. */
export function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 4294967296;
  };
}

export function writeTestPng(
  file: string,
  width: number,
  height: number,
  pixel: (x: number, y: number) => [number, number, number],
): void {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = 4 * (y * width + x);
      const [r, g, b] = pixel(x, y);
      png.data[i] = r;
      png.data[i + 1] = g;
      png.data[i + 2] = b;
      png.data[i + 3] = 255;
    }
  }
  fs.mkdirSync(path.dirname(path.resolve(file)), { recursive: true });
  fs.writeFileSync(file, PNG.sync.write(png));
}

/** Three-month smoke corpus with distinct seeded textures. */
export function writeSmokeCorpus(dir: string, months: string[] = ["2019-06", "2019-07", "2019-08"]): string {
  months.forEach((month, i) => {
    const rand = lcg(100 + i);
    writeTestPng(path.join(dir, `${month}.png`), 64, 48, (x, y) => {
      const v = Math.floor(rand() * 200);
      return [v, (v + x) % 256, (v + y) % 256];
    });
  });
  return dir;
}
