export { createBackend, FeatureBackend, ProjectionBackend, registerBackend } from "./backend";
export { clusterReport, embedViaPrimary, silhouette } from "./cluster";
export { fnum, isMonthLabel, readEmbeddingCsv, writeFeatureCsv } from "./csv";
export { extractFeatures, listMonthImages, runExtraction } from "./extract";
export { crop, loadPng, resize } from "./image";
export { NETWORKS, networkSpec } from "./networks";
