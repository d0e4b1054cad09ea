/** Two-dimensional projections of dumped hidden activations, one panel
 * per activation file, points colored by the action taken. The
 * projection itself is delegated to umap-js with a seeded PRNG so that
 * identical inputs give identical figures. */

import { UMAP } from "umap-js";

import { Table, num } from "../csv.js";
import { PALETTE, Svg, linearScale } from "../svg.js";

export interface UmapPanel {
  label: string;
  table: Table;
  /** silhouette annotation, e.g. looked up from runs.csv */
  silhouette?: number;
}

export interface UmapOptions {
  title?: string;
  seed?: number;
  nNeighbors?: number;
  minDist?: number;
  panelSize?: number;
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function activationMatrix(table: Table): { data: number[][]; actions: number[] } {
  const hiddenCols = table.columns.filter((c) => /^h\d+$/.test(c));
  if (hiddenCols.length === 0 || !table.columns.includes("action")) {
    throw new Error("activation table needs h0..hN and action columns");
  }
  const data = table.rows.map((row) => hiddenCols.map((c) => num(row, c)));
  const actions = table.rows.map((row) => num(row, "action"));
  return { data, actions };
}

export function projectActivations(
  table: Table,
  opts: UmapOptions = {}
): { points: number[][]; actions: number[] } {
  const { data, actions } = activationMatrix(table);
  if (data.length < 4) {
    throw new Error(`need at least 4 activation rows, got ${data.length}`);
  }
  const nNeighbors = Math.min(opts.nNeighbors ?? 15, data.length - 2);
  const umap = new UMAP({
    nComponents: 2,
    nNeighbors: Math.max(2, nNeighbors),
    minDist: opts.minDist ?? 0.1,
    random: seededRandom(opts.seed ?? 42),
  });
  return { points: umap.fit(data), actions };
}

export function renderUmapPanels(
  panels: UmapPanel[],
  opts: UmapOptions = {}
): string {
  if (panels.length === 0) {
    throw new Error("no activation files given");
  }
  const size = opts.panelSize ?? 320;
  const margin = 34;
  const headroom = 46;
  const width = panels.length * (size + margin) + margin;
  const height = size + headroom + 64;
  const svg = new Svg(width, height);
  svg.text(width / 2, 24, opts.title ?? "hidden-activation projections", {
    "text-anchor": "middle",
    "font-size": 14,
  });

  panels.forEach((panel, pi) => {
    const { points, actions } = projectActivations(panel.table, opts);
    const left = margin + pi * (size + margin);
    const top = headroom;
    const xs = points.map((p) => p[0]);
    const ys = points.map((p) => p[1]);
    const xScale = linearScale(
      [Math.min(...xs), Math.max(...xs)],
      [left + 8, left + size - 8]
    );
    const yScale = linearScale(
      [Math.min(...ys), Math.max(...ys)],
      [top + size - 8, top + 8]
    );
    svg.rect(left, top, size, size, { fill: "#fafafa", stroke: "#555" });
    points.forEach((p, i) => {
      svg.circle(xScale(p[0]), yScale(p[1]), 2.4, {
        fill: actions[i] === 0 ? PALETTE[0] : PALETTE[1],
        "fill-opacity": 0.75,
        class: actions[i] === 0 ? "pt-cooperate" : "pt-defect",
      });
    });
    svg.text(left + size / 2, top + size + 18, panel.label, {
      "text-anchor": "middle",
      "font-size": 12,
    });
    if (panel.silhouette !== undefined && !Number.isNaN(panel.silhouette)) {
      svg.text(
        left + size / 2,
        top + size + 34,
        `silhouette ${panel.silhouette.toFixed(3)}`,
        { "text-anchor": "middle", "font-size": 11, class: "silhouette" }
      );
    }
  });

  const legendY = 36;
  svg.circle(margin + 6, legendY, 4, { fill: PALETTE[0] });
  svg.text(margin + 14, legendY + 4, "cooperate", { "font-size": 11 });
  svg.circle(margin + 92, legendY, 4, { fill: PALETTE[1] });
  svg.text(margin + 100, legendY + 4, "defect", { "font-size": 11 });
  return svg.toString();
}
