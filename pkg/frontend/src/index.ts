/** figgen: renders figure families from a simulator output bundle.
 *
 * Inputs are the bundle's CSV files only; nothing is recomputed beyond
 * seed aggregation, which mirrors the simulator's own aggregation.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { createRequire } from "node:module";

import { Table, num, readCsv, requireColumns } from "./csv.js";
import { curvesByCategory, renderCurveFigure, Curve } from "./figures/curves.js";
import { renderHeatmap } from "./figures/heatmap.js";
import { renderQStats } from "./figures/qstats.js";
import { renderThresholds } from "./figures/thresholds.js";
import { renderUmapPanels, UmapPanel } from "./figures/umap.js";

export { aggregateSeeds } from "./aggregate.js";
export { parseCsv, readCsv } from "./csv.js";
export { renderHeatmap } from "./figures/heatmap.js";
export { renderThresholds } from "./figures/thresholds.js";
export { renderQStats } from "./figures/qstats.js";
export { renderUmapPanels, projectActivations, seededRandom } from "./figures/umap.js";
export { curvesByCategory, renderCurveFigure } from "./figures/curves.js";

export const FIGURE_KINDS = [
  "heatmap",
  "thresholds",
  "augmentation",
  "umap",
  "qstats",
  "topology",
  "sensitivity",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureRequest {
  kind: FigureKind;
  /** CSV paths; a single directory resolves to the kind's default file */
  inputs: string[];
  output: string;
  labels?: string[];
  title?: string;
  seed?: number;
  dRMin?: number;
  dRMax?: number;
  /** runs.csv path for UMAP silhouette annotations */
  runsCsv?: string;
}

function resolveInputs(req: FigureRequest): string[] {
  if (req.inputs.length === 1 && fs.existsSync(req.inputs[0]) &&
      fs.statSync(req.inputs[0]).isDirectory()) {
    const dir = req.inputs[0];
    if (req.kind === "thresholds") {
      return [path.join(dir, "thresholds.csv")];
    }
    if (req.kind === "umap") {
      const files = fs
        .readdirSync(dir)
        .filter((f) => f.startsWith("activations-") && f.endsWith(".csv"))
        .sort()
        .map((f) => path.join(dir, f));
      if (files.length === 0) {
        throw new Error(`${dir}: no activations-*.csv files found`);
      }
      return files;
    }
    return [path.join(dir, "runs.csv")];
  }
  return req.inputs;
}

function curveRows(table: Table, category: string, metric: string) {
  requireColumns(table, ["B", metric, "seed", category], "runs table");
  return table.rows.map((r) => ({
    [category]: r[category],
    B: num(r, "B"),
    [metric]: num(r, metric),
  }));
}

function runIdFromActivationPath(file: string): string {
  const base = path.basename(file);
  return base.replace(/^activations-/, "").replace(/\.csv$/, "");
}

function buildSvg(req: FigureRequest): string {
  const inputs = resolveInputs(req);
  if (inputs.length === 0) {
    throw new Error("no input files given");
  }
  switch (req.kind) {
    case "heatmap":
      return renderHeatmap(readCsv(inputs[0]), { title: req.title });
    case "thresholds":
      return renderThresholds(readCsv(inputs[0]), {
        title: req.title,
        dRMin: req.dRMin,
        dRMax: req.dRMax,
      });
    case "qstats":
      return renderQStats(readCsv(inputs[0]), { title: req.title });
    case "augmentation": {
      const table = readCsv(inputs[0]);
      const curves = curvesByCategory(
        curveRows(table, "augmentation", "coop_mean"),
        "augmentation",
        "coop_mean"
      );
      return renderCurveFigure(curves, {
        title: req.title ?? "state augmentation and cooperation",
        yLabel: "mean cooperation",
        yDomain: [0, 1],
      });
    }
    case "topology": {
      const table = readCsv(inputs[0]);
      const curves = curvesByCategory(
        curveRows(table, "topology", "coop_mean"),
        "topology",
        "coop_mean"
      );
      return renderCurveFigure(curves, {
        title: req.title ?? "interaction topology and cooperation",
        yLabel: "mean cooperation",
        yDomain: [0, 1],
      });
    }
    case "sensitivity": {
      const curves: Curve[] = inputs.map((file, i) => {
        const table = readCsv(file);
        requireColumns(table, ["B", "coop_mean", "seed"], file);
        const rows = table.rows.map((r) => ({
          all: "all",
          B: num(r, "B"),
          coop_mean: num(r, "coop_mean"),
        }));
        const [curve] = curvesByCategory(rows, "all", "coop_mean");
        const label =
          req.labels?.[i] ?? path.basename(file).replace(/\.csv$/, "");
        return { label, points: curve.points };
      });
      return renderCurveFigure(curves, {
        title: req.title ?? "sensitivity comparison",
        yLabel: "mean cooperation",
        yDomain: [0, 1],
      });
    }
    case "umap": {
      const silhouettes = new Map<string, number>();
      if (req.runsCsv) {
        const runs = readCsv(req.runsCsv);
        requireColumns(runs, ["run_id", "silhouette"], req.runsCsv);
        for (const row of runs.rows) {
          silhouettes.set(row.run_id, num(row, "silhouette"));
        }
      }
      const panels: UmapPanel[] = inputs.map((file, i) => {
        const runId = runIdFromActivationPath(file);
        return {
          label: req.labels?.[i] ?? runId,
          table: readCsv(file),
          silhouette: silhouettes.get(runId),
        };
      });
      return renderUmapPanels(panels, { title: req.title, seed: req.seed });
    }
    default:
      throw new Error(`unknown figure kind "${req.kind}"`);
  }
}

let wasmReady = false;

async function rasterize(svg: string): Promise<Uint8Array> {
  const { Resvg, initWasm } = await import("@resvg/resvg-wasm");
  if (!wasmReady) {
    const require = createRequire(import.meta.url);
    const wasmPath = path.join(
      path.dirname(require.resolve("@resvg/resvg-wasm")),
      "index_bg.wasm"
    );
    await initWasm(fs.readFileSync(wasmPath));
    wasmReady = true;
  }
  const renderer = new Resvg(svg, {
    fitTo: { mode: "zoom", value: 2 },
  });
  return renderer.render().asPng();
}

/** Render a figure request to its output path (.svg or .png). */
export async function render(req: FigureRequest): Promise<string> {
  const svg = buildSvg(req);
  fs.mkdirSync(path.dirname(path.resolve(req.output)), { recursive: true });
  if (req.output.endsWith(".png")) {
    fs.writeFileSync(req.output, await rasterize(svg));
  } else {
    fs.writeFileSync(req.output, svg, "utf-8");
  }
  return req.output;
}

/** Synchronous SVG-only variant, used by the tests. */
export function renderSvg(req: FigureRequest): string {
  return buildSvg(req);
}
