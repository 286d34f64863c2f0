/**
 * Feature backends.
 *
 * A backend turns a preprocessed square RGB image into a feature vector of
 * the width its network table entry promises. The default backend is a
 * seeded random-projection map: inference-only, fully deterministic and
 * sensitive to image content, so the whole extraction pipeline (and the
 * downstream CSV contract) runs without the multi-hundred-megabyte
 * pretrained weights, which this environment cannot download. A real
 * pretrained backbone slots in behind the same interface.
 */

import { RgbImage } from "./image";
import { NetworkSpec } from "./networks";

export interface FeatureBackend {
  name: string;
  extract(image: RgbImage, spec: NetworkSpec): Float64Array;
}

/** splitmix32: small, seedable, deterministic across platforms. */
function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z ^= z >>> 16;
    z = Math.imul(z, 0x21f0aaad);
    z ^= z >>> 15;
    z = Math.imul(z, 0x735a2d97);
    z ^= z >>> 15;
    return (z >>> 0) / 4294967296;
  };
}

function hashName(name: string): number {
  let h = 2166136261;
  for (let i = 0; i < name.length; i++) {
    h ^= name.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

const TAPS = 48;

export class ProjectionBackend implements FeatureBackend {
  readonly name = "projection";

  extract(image: RgbImage, spec: NetworkSpec): Float64Array {
    if (image.width !== spec.inputSize || image.height !== spec.inputSize) {
      throw new Error(
        `backend expects a ${spec.inputSize}x${spec.inputSize} input, ` +
        `got ${image.width}x${image.height}`,
      );
    }
    const n = image.data.length;
    const out = new Float64Array(spec.width);
    const base = hashName(`${spec.layer}:${spec.width}`);
    for (let k = 0; k < spec.width; k++) {
      const rng = splitmix32(base + k * 0x01000193);
      let acc = 0;
      for (let t = 0; t < TAPS; t++) {
        const idx = Math.floor(rng() * n);
        acc += (rng() * 2 - 1) * image.data[idx];
      }
      const phase = rng() * Math.PI * 2;
      out[k] = Math.cos(acc * 1.7 + phase);
    }
    return out;
  }
}

const REGISTRY: Record<string, () => FeatureBackend> = {
  projection: () => new ProjectionBackend(),
};

export function createBackend(name: string): FeatureBackend {
  const make = REGISTRY[name];
  if (!make) {
    throw new Error(
      `unknown backend ${JSON.stringify(name)} (known: ${Object.keys(REGISTRY).join(", ")})`,
    );
  }
  return make();
}

export function registerBackend(name: string, factory: () => FeatureBackend): void {
  REGISTRY[name] = factory;
}
