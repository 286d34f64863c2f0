#!/usr/bin/env node
/**
 * sst-extract: monthly sea-surface images -> feature CSV, plus a
 * cluster-quality report of the derived embedding.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { clusterReport } from "./cluster";
import { runExtraction } from "./extract";
import { NETWORKS } from "./networks";

function parseCrop(text: string): { x: number; y: number; width: number; height: number } {
  const parts = text.split(",").map((p) => Number(p.trim()));
  if (parts.length !== 4 || parts.some((p) => !Number.isFinite(p))) {
    throw new Error(`crop must be x,y,w,h integers, got ${JSON.stringify(text)}`);
  }
  const [x, y, width, height] = parts;
  return { x, y, width, height };
}

yargs(hideBin(process.argv))
  .command(
    "$0",
    "extract per-month feature vectors from YYYY-MM.png images",
    (args) =>
      args
        .option("images", { type: "string", demandOption: true, describe: "image directory" })
        .option("crop", { type: "string", demandOption: true, describe: "x,y,w,h in pixels" })
        .option("net", {
          type: "string",
          default: "vgg16",
          choices: Object.keys(NETWORKS),
          describe: "backbone choice (fixes the feature width)",
        })
        .option("out", { type: "string", demandOption: true, describe: "feature CSV path" })
        .option("backend", { type: "string", default: "projection" }),
    (argv) => {
      const n = runExtraction({
        imageDir: argv.images,
        cropRect: parseCrop(argv.crop),
        network: argv.net,
        outPath: argv.out,
        backend: argv.backend,
      });
      const width = NETWORKS[argv.net].width;
      console.log(`${n} months x ${width} features -> ${argv.out}`);
    },
  )
  .command(
    "cluster-report",
    "silhouette of flood vs non-flood months in the derived embedding",
    (args) =>
      args
        .option("features", { type: "string", demandOption: true, describe: "feature CSV" })
        .option("workdir", { type: "string", describe: "where the embedding run lands" }),
    (argv) => {
      const report = clusterReport(argv.features, argv.workdir);
      console.log(JSON.stringify(report, null, 2));
    },
  )
  .strict()
  .fail((msg, err) => {
    console.error(`error: ${msg ?? err.message}`);
    process.exit(2);
  })
  .parse();
