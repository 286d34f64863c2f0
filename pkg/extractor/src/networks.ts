/**
 * Feature-extraction backbone table: each named choice maps to a fixed
 * (feature width, native input size, layer label) triple. The width is the
 * contract the downstream forecasting package relies on.
 */

export interface NetworkSpec {
  /** feature vector length emitted per image */
  width: number;
  /** square input edge the preprocessed image is resized to */
  inputSize: number;
  /** human label of the tapped layer */
  layer: string;
}

export const NETWORKS: Record<string, NetworkSpec> = {
  vgg16: { width: 4096, inputSize: 224, layer: "fc6" },
  resnet101: { width: 2048, inputSize: 224, layer: "pool5" },
  inception_v3: { width: 2048, inputSize: 299, layer: "avgpool" },
  inception_resnet_v2: { width: 1536, inputSize: 299, layer: "avgpool" },
};

export function networkSpec(name: string): NetworkSpec {
  const spec = NETWORKS[name];
  if (!spec) {
    const known = Object.keys(NETWORKS).join(", ");
    throw new Error(`unknown network ${JSON.stringify(name)} (known: ${known})`);
  }
  return spec;
}
