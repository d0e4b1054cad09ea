/** Cooperation heatmap over (exploration strength, payoff harshness). */

import { Table, num, requireColumns } from "../csv.js";
import { aggregateSeeds } from "../aggregate.js";
import {
  Svg,
  colormap,
  drawColorbar,
  fmtTick,
} from "../svg.js";

export interface HeatmapOptions {
  title?: string;
  metric?: string;
  width?: number;
  height?: number;
}

export function renderHeatmap(runs: Table, opts: HeatmapOptions = {}): string {
  const metric = opts.metric ?? "coop_mean";
  requireColumns(runs, ["B", "d_r", metric, "seed"], "runs table");
  const rows = runs.rows.map((r) => ({
    B: num(r, "B"),
    d_r: num(r, "d_r"),
    [metric]: num(r, metric),
  }));
  const cells = aggregateSeeds(rows, ["B", "d_r"], [metric]);
  if (cells.length === 0) {
    throw new Error("runs table is empty");
  }
  const bValues = [...new Set(cells.map((c) => Number(c.key.B)))].sort(
    (a, b) => a - b
  );
  const dValues = [...new Set(cells.map((c) => Number(c.key.d_r)))].sort(
    (a, b) => a - b
  );

  const width = opts.width ?? 680;
  const height = opts.height ?? 520;
  const margin = { left: 80, right: 110, top: 48, bottom: 64 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const cellW = plotW / dValues.length;
  const cellH = plotH / bValues.length;
  const svg = new Svg(width, height);

  const lookup = new Map<string, number>();
  for (const cell of cells) {
    lookup.set(`${cell.key.B}|${cell.key.d_r}`, cell.mean[metric]);
  }
  for (let yi = 0; yi < bValues.length; yi++) {
    for (let xi = 0; xi < dValues.length; xi++) {
      const value = lookup.get(`${bValues[yi]}|${dValues[xi]}`);
      // rows are laid out with B increasing upward
      const y = margin.top + plotH - (yi + 1) * cellH;
      svg.rect(margin.left + xi * cellW, y, cellW, cellH, {
        fill: value === undefined ? "#eeeeee" : colormap(value),
        stroke: "#ffffff",
        "stroke-width": 1,
        class: "cell",
      });
    }
  }

  for (let xi = 0; xi < dValues.length; xi++) {
    svg.text(
      margin.left + (xi + 0.5) * cellW,
      height - margin.bottom + 16,
      fmtTick(dValues[xi]),
      { "text-anchor": "middle", "font-size": 11 }
    );
  }
  for (let yi = 0; yi < bValues.length; yi++) {
    svg.text(
      margin.left - 8,
      margin.top + plotH - (yi + 0.5) * cellH + 4,
      fmtTick(bValues[yi]),
      { "text-anchor": "end", "font-size": 11 }
    );
  }
  svg.text(margin.left + plotW / 2, height - margin.bottom + 40,
    "payoff harshness d_r", { "text-anchor": "middle" });
  svg.text(16, margin.top + plotH / 2, "exploration strength B", {
    "text-anchor": "middle",
    transform: `rotate(-90 16 ${margin.top + plotH / 2})`,
  });
  svg.text(width / 2, 24, opts.title ?? "mean cooperation (seed average)", {
    "text-anchor": "middle",
    "font-size": 14,
  });
  drawColorbar(
    svg,
    { left: width - margin.right + 28, top: margin.top, width: 16, height: plotH },
    [0, 1],
    metric
  );
  return svg.toString();
}
