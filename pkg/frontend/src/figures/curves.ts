/** Shared line-plot machinery: a metric against exploration strength,
 * one seed-aggregated curve per category, error bars of one sample sd. */

import { aggregateSeeds } from "../aggregate.js";
import {
  PALETTE,
  Svg,
  drawXAxis,
  drawYAxis,
  linearScale,
} from "../svg.js";

export interface CurvePoint {
  x: number;
  y: number;
  sd: number;
}

export interface Curve {
  label: string;
  points: CurvePoint[];
}

export function curvesByCategory(
  rows: Record<string, string | number>[],
  category: string,
  metric: string
): Curve[] {
  const cells = aggregateSeeds(
    rows,
    [category, "B"],
    [metric]
  );
  const byLabel = new Map<string, CurvePoint[]>();
  for (const cell of cells) {
    const label = String(cell.key[category]);
    if (!byLabel.has(label)) byLabel.set(label, []);
    byLabel.get(label)!.push({
      x: Number(cell.key.B),
      y: cell.mean[metric],
      sd: cell.sd[metric],
    });
  }
  return [...byLabel.entries()]
    .sort((a, b) => (a[0] < b[0] ? -1 : 1))
    .map(([label, points]) => ({
      label,
      points: points.sort((p, q) => p.x - q.x),
    }));
}

export interface CurveFigureOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  yDomain?: [number, number];
  width?: number;
  height?: number;
}

export function renderCurveFigure(
  curves: Curve[],
  opts: CurveFigureOptions = {}
): string {
  if (curves.length === 0 || curves.every((c) => c.points.length === 0)) {
    throw new Error("no curve data to plot");
  }
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const margin = { left: 64, right: 160, top: 42, bottom: 56 };
  const svg = new Svg(width, height);

  const xs = curves.flatMap((c) => c.points.map((p) => p.x));
  const ysLow = curves.flatMap((c) => c.points.map((p) => p.y - p.sd));
  const ysHigh = curves.flatMap((c) => c.points.map((p) => p.y + p.sd));
  const xDomain: [number, number] = [Math.min(...xs), Math.max(...xs)];
  const yDomain =
    opts.yDomain ??
    ([Math.min(0, ...ysLow), Math.max(...ysHigh) * 1.05 || 1] as [number, number]);

  const xScale = linearScale(xDomain, [margin.left, width - margin.right]);
  const yScale = linearScale(yDomain, [height - margin.bottom, margin.top]);

  drawXAxis(svg, xScale, height - margin.bottom, {
    label: opts.xLabel ?? "exploration strength B",
  });
  drawYAxis(svg, yScale, margin.left, { label: opts.yLabel ?? "" });
  if (opts.title) {
    svg.text(width / 2, 22, opts.title, {
      "text-anchor": "middle",
      "font-size": 14,
    });
  }

  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = curve.points.map(
      (p) => [xScale(p.x), yScale(p.y)] as [number, number]
    );
    svg.polyline(pts, { stroke: color, "stroke-width": 2 });
    curve.points.forEach((p, j) => {
      if (p.sd > 0) {
        svg.line(pts[j][0], yScale(p.y - p.sd), pts[j][0], yScale(p.y + p.sd), {
          stroke: color,
          "stroke-width": 1,
        });
      }
      svg.circle(pts[j][0], pts[j][1], 3.5, { fill: color });
    });
    const ly = margin.top + 18 * i;
    svg.line(width - margin.right + 12, ly, width - margin.right + 34, ly, {
      stroke: color,
      "stroke-width": 2,
    });
    svg.text(width - margin.right + 40, ly + 4, curve.label, {
      "font-size": 12,
    });
  });
  return svg.toString();
}
