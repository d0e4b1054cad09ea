#!/usr/bin/env node
/** figgen CLI: `figgen <kind> <inputs...> --out figure.svg`.
 *
 * Kinds: heatmap | thresholds | augmentation | umap | qstats |
 * topology | sensitivity. Inputs are bundle CSVs, or a single bundle
 * directory to use its default file for the kind. Output extension
 * selects the format (.svg vector, .png raster).
 */

import { parseArgs } from "node:util";

import { FIGURE_KINDS, FigureKind, FigureRequest, render } from "./index.js";

function usage(): string {
  return [
    "usage: figgen <kind> <inputs...> --out <file.svg|file.png>",
    `  kinds: ${FIGURE_KINDS.join(", ")}`,
    "  options:",
    "    --out <path>       output image (.svg or .png) [required]",
    "    --runs <path>      runs.csv for umap silhouette annotations",
    "    --labels a,b,c     per-input labels (sensitivity, umap)",
    "    --title <text>     figure title",
    "    --seed <int>       projection seed (umap; default 42)",
    "    --d-r-min <float>  tested-range lower edge (thresholds; default 0.10)",
    "    --d-r-max <float>  tested-range upper edge (thresholds; default 0.40)",
  ].join("\n");
}

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        runs: { type: "string" },
        labels: { type: "string" },
        title: { type: "string" },
        seed: { type: "string" },
        "d-r-min": { type: "string" },
        "d-r-max": { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
  } catch (err) {
    console.error(`figgen: ${(err as Error).message}`);
    console.error(usage());
    return 1;
  }
  if (parsed.values.help) {
    console.log(usage());
    return 0;
  }
  const [kind, ...inputs] = parsed.positionals;
  if (!kind || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    console.error(`figgen: unknown or missing figure kind "${kind ?? ""}"`);
    console.error(usage());
    return 1;
  }
  if (inputs.length === 0 || !parsed.values.out) {
    console.error("figgen: need at least one input and --out");
    console.error(usage());
    return 1;
  }
  const request: FigureRequest = {
    kind: kind as FigureKind,
    inputs,
    output: parsed.values.out,
    runsCsv: parsed.values.runs,
    labels: parsed.values.labels?.split(","),
    title: parsed.values.title,
    seed: parsed.values.seed ? Number(parsed.values.seed) : undefined,
    dRMin: parsed.values["d-r-min"]
      ? Number(parsed.values["d-r-min"])
      : undefined,
    dRMax: parsed.values["d-r-max"]
      ? Number(parsed.values["d-r-max"])
      : undefined,
  };
  try {
    const out = await render(request);
    console.error(`figgen: wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(`figgen: ${(err as Error).message}`);
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (isDirectRun) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
