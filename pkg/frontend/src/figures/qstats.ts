/** Value-landscape statistics against exploration strength: mean
 * absolute action value and mean absolute action-value gap, side by
 * side, seed-aggregated. */

import { Table, num, requireColumns } from "../csv.js";
import { aggregateSeeds } from "../aggregate.js";
import {
  PALETTE,
  Svg,
  drawXAxis,
  drawYAxis,
  linearScale,
} from "../svg.js";

export interface QStatsOptions {
  title?: string;
  width?: number;
  height?: number;
}

export function renderQStats(runs: Table, opts: QStatsOptions = {}): string {
  requireColumns(runs, ["B", "q_mean", "q_gap", "seed"], "runs table");
  if (runs.rows.length === 0) {
    throw new Error("runs table is empty");
  }
  const rows = runs.rows.map((r) => ({
    B: num(r, "B"),
    q_mean: num(r, "q_mean"),
    q_gap: num(r, "q_gap"),
  }));
  const cells = aggregateSeeds(rows, ["B"], ["q_mean", "q_gap"]);
  const width = opts.width ?? 860;
  const height = opts.height ?? 420;
  const panelW = (width - 3 * 70) / 2;
  const svg = new Svg(width, height);
  svg.text(width / 2, 22, opts.title ?? "value-landscape statistics", {
    "text-anchor": "middle",
    "font-size": 14,
  });

  (["q_mean", "q_gap"] as const).forEach((metric, pi) => {
    const left = 70 + pi * (panelW + 70);
    const bs = cells.map((c) => Number(c.key.B));
    const means = cells.map((c) => c.mean[metric]);
    const sds = cells.map((c) => c.sd[metric]);
    const xScale = linearScale(
      [Math.min(...bs), Math.max(...bs)],
      [left, left + panelW]
    );
    const top = Math.max(...means.map((m, i) => m + sds[i]));
    const yScale = linearScale([0, top * 1.08 || 1], [height - 64, 48]);
    drawXAxis(svg, xScale, height - 64, {
      label: "exploration strength B",
      tickCount: 5,
    });
    drawYAxis(svg, yScale, left, { tickCount: 5 });
    svg.text(left + panelW / 2, 40, metric === "q_mean"
      ? "mean |Q| (q_mean)" : "mean |Q(s,C) - Q(s,D)| (q_gap)", {
      "text-anchor": "middle",
      "font-size": 12,
    });
    const color = PALETTE[pi];
    const pts = bs.map(
      (b, i) => [xScale(b), yScale(means[i])] as [number, number]
    );
    svg.polyline(pts, { stroke: color, "stroke-width": 2 });
    pts.forEach(([x, y], i) => {
      if (sds[i] > 0) {
        svg.line(x, yScale(means[i] - sds[i]), x, yScale(means[i] + sds[i]), {
          stroke: color,
        });
      }
      svg.circle(x, y, 3.5, { fill: color });
    });
  });
  return svg.toString();
}
