/** Minimal SVG scene assembly: scales, axes, markers, colormaps.
 * Output is a plain string, so identical inputs give identical bytes. */

export interface Rect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / Math.max(1, count);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * power);
  const step = candidates.find((s) => (hi - lo) / s <= count) ?? candidates[4];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function fmtTick(value: number): string {
  if (value === 0) return "0";
  if (Math.abs(value) >= 1000 || Math.abs(value) < 0.001) {
    return value.toExponential(1);
  }
  return String(Number(value.toPrecision(4)));
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}" ` +
        `font-family="Helvetica, Arial, sans-serif">`
    );
    this.rect(0, 0, width, height, { fill: "#ffffff" });
  }

  private attrs(extra: Record<string, string | number | undefined>): string {
    return Object.entries(extra)
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => ` ${k}="${v}"`)
      .join("");
  }

  rect(x: number, y: number, w: number, h: number, style: Record<string, string | number> = {}): void {
    this.parts.push(
      `<rect x="${r2(x)}" y="${r2(y)}" width="${r2(w)}" height="${r2(h)}"${this.attrs(style)}/>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, style: Record<string, string | number> = {}): void {
    this.parts.push(
      `<line x1="${r2(x1)}" y1="${r2(y1)}" x2="${r2(x2)}" y2="${r2(y2)}"${this.attrs({ stroke: "#000", ...style })}/>`
    );
  }

  circle(cx: number, cy: number, r: number, style: Record<string, string | number> = {}): void {
    this.parts.push(
      `<circle cx="${r2(cx)}" cy="${r2(cy)}" r="${r2(r)}"${this.attrs(style)}/>`
    );
  }

  polyline(points: [number, number][], style: Record<string, string | number> = {}): void {
    const joined = points.map(([x, y]) => `${r2(x)},${r2(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${joined}"${this.attrs({ fill: "none", stroke: "#000", ...style })}/>`
    );
  }

  text(x: number, y: number, content: string, style: Record<string, string | number> = {}): void {
    this.parts.push(
      `<text x="${r2(x)}" y="${r2(y)}"${this.attrs({ "font-size": 12, fill: "#1a1a1a", ...style })}>${esc(content)}</text>`
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

const r2 = (v: number) => Math.round(v * 100) / 100;

export interface AxisOptions {
  label?: string;
  tickCount?: number;
  tickValues?: number[];
  tickFormat?: (v: number) => string;
}

export function drawXAxis(svg: Svg, scale: Scale, y: number, opts: AxisOptions = {}): void {
  const fmt = opts.tickFormat ?? fmtTick;
  svg.line(scale.range[0], y, scale.range[1], y);
  for (const v of opts.tickValues ?? ticks(scale.domain, opts.tickCount ?? 6)) {
    const x = scale(v);
    svg.line(x, y, x, y + 5);
    svg.text(x, y + 18, fmt(v), { "text-anchor": "middle", "font-size": 11 });
  }
  if (opts.label) {
    const mid = (scale.range[0] + scale.range[1]) / 2;
    svg.text(mid, y + 36, opts.label, { "text-anchor": "middle" });
  }
}

export function drawYAxis(svg: Svg, scale: Scale, x: number, opts: AxisOptions = {}): void {
  const fmt = opts.tickFormat ?? fmtTick;
  svg.line(x, scale.range[0], x, scale.range[1]);
  for (const v of opts.tickValues ?? ticks(scale.domain, opts.tickCount ?? 6)) {
    const y = scale(v);
    svg.line(x - 5, y, x, y);
    svg.text(x - 8, y + 4, fmt(v), { "text-anchor": "end", "font-size": 11 });
  }
  if (opts.label) {
    const mid = (scale.range[0] + scale.range[1]) / 2;
    svg.text(14, mid, opts.label, {
      "text-anchor": "middle",
      transform: `rotate(-90 14 ${Math.round(mid * 100) / 100})`,
    });
  }
}

/** Categorical palette (colorblind-safe Okabe-Ito order). */
export const PALETTE = [
  "#0072b2",
  "#d55e00",
  "#009e73",
  "#cc79a7",
  "#e69f00",
  "#56b4e9",
  "#f0e442",
  "#000000",
];

const VIRIDIS_STOPS: [number, number, number][] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0,1] onto a viridis-like gradient. */
export function colormap(t: number): string {
  if (Number.isNaN(t)) return "#cccccc";
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (VIRIDIS_STOPS.length - 1);
  const i = Math.min(VIRIDIS_STOPS.length - 2, Math.floor(pos));
  const frac = pos - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * frac);
  const [r, g, b] = [0, 1, 2].map((c) =>
    mix(VIRIDIS_STOPS[i][c], VIRIDIS_STOPS[i + 1][c])
  );
  return `rgb(${r},${g},${b})`;
}

export function drawColorbar(
  svg: Svg,
  box: Rect,
  domain: [number, number],
  label: string
): void {
  const steps = 64;
  for (let i = 0; i < steps; i++) {
    const t = i / (steps - 1);
    svg.rect(
      box.left,
      box.top + box.height * (1 - (i + 1) / steps),
      box.width,
      box.height / steps + 0.5,
      { fill: colormap(t) }
    );
  }
  svg.rect(box.left, box.top, box.width, box.height, {
    fill: "none",
    stroke: "#333",
  });
  svg.text(box.left + box.width / 2, box.top - 6, fmtTick(domain[1]), {
    "text-anchor": "middle",
    "font-size": 10,
  });
  svg.text(
    box.left + box.width / 2,
    box.top + box.height + 12,
    fmtTick(domain[0]),
    { "text-anchor": "middle", "font-size": 10 }
  );
  svg.text(box.left + box.width + 6, box.top + box.height / 2 + 4, label, {
    "font-size": 11,
  });
}
