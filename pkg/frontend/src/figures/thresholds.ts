/** Collapse-threshold curves d_r*(B), one per architecture.
 *
 * Rows whose status marks the threshold outside the tested range render
 * as hollow markers pinned to the corresponding range edge.
 */

import { Table, num, requireColumns } from "../csv.js";
import {
  PALETTE,
  Svg,
  drawXAxis,
  drawYAxis,
  linearScale,
} from "../svg.js";

export interface ThresholdOptions {
  title?: string;
  dRMin?: number;
  dRMax?: number;
  width?: number;
  height?: number;
}

export function renderThresholds(
  thresholds: Table,
  opts: ThresholdOptions = {}
): string {
  requireColumns(
    thresholds,
    ["B", "architecture", "criterion", "d_r_star", "status"],
    "thresholds table"
  );
  if (thresholds.rows.length === 0) {
    throw new Error("thresholds table is empty");
  }
  const dRMin = opts.dRMin ?? 0.1;
  const dRMax = opts.dRMax ?? 0.4;
  const width = opts.width ?? 720;
  const height = opts.height ?? 460;
  const margin = { left: 70, right: 170, top: 44, bottom: 56 };
  const svg = new Svg(width, height);

  const bs = thresholds.rows.map((r) => num(r, "B"));
  const xScale = linearScale(
    [Math.min(...bs), Math.max(...bs)],
    [margin.left, width - margin.right]
  );
  const pad = (dRMax - dRMin) * 0.08;
  const yScale = linearScale(
    [dRMin - pad, dRMax + pad],
    [height - margin.bottom, margin.top]
  );

  drawXAxis(svg, xScale, height - margin.bottom, {
    label: "exploration strength B",
  });
  drawYAxis(svg, yScale, margin.left, { label: "collapse threshold d_r*" });
  for (const edge of [dRMin, dRMax]) {
    svg.line(margin.left, yScale(edge), width - margin.right, yScale(edge), {
      stroke: "#888",
      "stroke-dasharray": "5 4",
    });
  }
  svg.text(width / 2, 22, opts.title ?? "cooperation collapse thresholds", {
    "text-anchor": "middle",
    "font-size": 14,
  });

  const archs = [...new Set(thresholds.rows.map((r) => r.architecture))].sort();
  archs.forEach((arch, i) => {
    const color = PALETTE[i % PALETTE.length];
    const rows = thresholds.rows
      .filter((r) => r.architecture === arch)
      .sort((a, b) => num(a, "B") - num(b, "B"));
    const solid: [number, number][] = [];
    for (const row of rows) {
      const x = xScale(num(row, "B"));
      if (row.status === "in_range") {
        const y = yScale(num(row, "d_r_star"));
        solid.push([x, y]);
        svg.circle(x, y, 4.5, { fill: color, class: "marker-solid" });
      } else {
        // threshold outside the tested range: hollow marker at the edge
        const edge = row.status === "above_range" ? dRMax : dRMin;
        svg.circle(x, yScale(edge), 4.5, {
          fill: "none",
          stroke: color,
          "stroke-width": 2,
          class: "marker-hollow",
        });
      }
    }
    if (solid.length > 1) {
      svg.polyline(solid, { stroke: color, "stroke-width": 2 });
    }
    const criterion = num(rows[0], "criterion");
    const ly = margin.top + 18 * i;
    svg.circle(width - margin.right + 18, ly, 4.5, { fill: color });
    svg.text(
      width - margin.right + 30,
      ly + 4,
      `${arch} (criterion ${criterion})`,
      { "font-size": 12 }
    );
  });
  return svg.toString();
}
