/**
 * Log-log SVG rendering of sweep curves with reference slope guides.
 *
 * The renderer never mutates its inputs and emits no timestamps unless asked,
 * so identical inputs produce byte-identical images.
 */

import { FitRecord, SweepData, series } from "./csv.js";
import { decadeTicks, logScale, padRange, tickLabel } from "./scale.js";

export interface GuideSpec {
  slope: number;
  /** Curve whose fit window anchors the guide; defaults to methods in order. */
  method?: string;
}

export interface MethodStyle {
  color?: string;
  label?: string;
}

export interface PlotSpec {
  inputs: string[];
  /** Methods to draw, in order; defaults to every method found. */
  methods?: string[];
  styles?: Record<string, MethodStyle>;
  guides?: Array<GuideSpec | number>;
  xlabel?: string;
  ylabel?: string;
  title?: string;
  output: string;
  width?: number;
  height?: number;
  /** Off by default so identical inputs give identical bytes. */
  timestamp?: boolean;
}

export class RenderError extends Error {}

const PALETTE = ["#1f77b4", "#d62728", "#2c2c2c", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#e377c2"];

const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };

function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

interface Curve {
  method: string;
  color: string;
  label: string;
  points: Array<[number, number]>;
}

function guideAnchor(
  curve: Curve,
  fits: FitRecord[],
): [number, number, number, number] {
  // geometric midpoint of the curve's fit window (fall back to its x extent)
  const fit = fits.find((f) => f.method === curve.method);
  const xs = curve.points.map((p) => p[0]);
  const lo = fit ? fit.window[0] : Math.min(...xs);
  const hi = fit ? fit.window[1] : Math.max(...xs);
  const xMid = Math.sqrt(lo * hi);
  // interpolate the curve at xMid in log-log space
  const pts = curve.points;
  let yMid = pts[0][1];
  for (let i = 0; i + 1 < pts.length; i += 1) {
    const [x0, y0] = pts[i];
    const [x1, y1] = pts[i + 1];
    if (xMid >= x0 && xMid <= x1) {
      const t = (Math.log10(xMid) - Math.log10(x0)) / (Math.log10(x1) - Math.log10(x0));
      yMid = 10 ** (Math.log10(y0) + t * (Math.log10(y1) - Math.log10(y0)));
      break;
    }
    yMid = y1;
  }
  return [lo, hi, xMid, yMid];
}

export function renderSvg(data: SweepData, spec: PlotSpec): string {
  const byMethod = series(data.rows);
  const available = [...byMethod.keys()];
  const selected = spec.methods ?? available;
  if (selected.length === 0) {
    throw new RenderError("empty selection: no methods to draw");
  }
  for (const m of selected) {
    if (!byMethod.has(m)) {
      throw new RenderError(
        `method ${m} not present in the CSV (available: ${available.join(", ")})`,
      );
    }
  }

  const curves: Curve[] = selected.map((method, i) => {
    const style = spec.styles?.[method] ?? {};
    const points = byMethod.get(method)!.filter(([, e]) => e > 0);
    if (points.length === 0) {
      throw new RenderError(`method ${method} has no positive errors to plot`);
    }
    return {
      method,
      color: style.color ?? PALETTE[i % PALETTE.length],
      label: style.label ?? method,
      points,
    };
  });

  const allX = curves.flatMap((c) => c.points.map((p) => p[0]));
  const allY = curves.flatMap((c) => c.points.map((p) => p[1]));
  const [xLo, xHi] = padRange(Math.min(...allX), Math.max(...allX), 1.2);
  const [yLo, yHi] = padRange(Math.min(...allY), Math.max(...allY), 2.0);

  const width = spec.width ?? 640;
  const height = spec.height ?? 480;
  const sx = logScale(xLo, xHi, MARGIN.left, width - MARGIN.right);
  const sy = logScale(yLo, yHi, height - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  if (spec.timestamp) {
    parts.push(`<!-- rendered ${new Date().toISOString()} -->`);
  }
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  // frame
  const frame = `M ${MARGIN.left} ${MARGIN.top} H ${width - MARGIN.right} ` +
    `V ${height - MARGIN.bottom} H ${MARGIN.left} Z`;
  parts.push(`<path d="${frame}" fill="none" stroke="#444" stroke-width="1"/>`);

  // ticks and grid
  for (const tx of decadeTicks(xLo, xHi)) {
    const px = fmt(sx.toPixel(tx));
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${height - MARGIN.bottom}" ` +
      `stroke="#ddd" stroke-width="0.5"/>`,
      `<text x="${px}" y="${height - MARGIN.bottom + 16}" text-anchor="middle">` +
      `${tickLabel(tx)}</text>`,
    );
  }
  for (const ty of decadeTicks(yLo, yHi)) {
    const py = fmt(sy.toPixel(ty));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${width - MARGIN.right}" y2="${py}" ` +
      `stroke="#ddd" stroke-width="0.5"/>`,
      `<text x="${MARGIN.left - 6}" y="${py}" text-anchor="end" ` +
      `dominant-baseline="middle">${tickLabel(ty)}</text>`,
    );
  }

  // curves
  for (const curve of curves) {
    const coords = curve.points
      .map(([x, y]) => `${fmt(sx.toPixel(x))},${fmt(sy.toPixel(y))}`)
      .join(" ");
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${curve.color}" ` +
      `stroke-width="1.5" class="curve" data-method="${curve.method}"/>`,
    );
    for (const [x, y] of curve.points) {
      parts.push(
        `<circle cx="${fmt(sx.toPixel(x))}" cy="${fmt(sy.toPixel(y))}" r="2.5" ` +
        `fill="${curve.color}"/>`,
      );
    }
  }

  // slope guides, dashed, anchored to each curve's fit-window midpoint
  const guides = (spec.guides ?? []).map((g, i) =>
    typeof g === "number" ? { slope: g, method: selected[i % selected.length] } : g,
  );
  for (const guide of guides) {
    const method = guide.method ?? selected[0];
    const curve = curves.find((c) => c.method === method);
    if (!curve) {
      throw new RenderError(`guide references unknown method ${method}`);
    }
    const [lo, hi, xMid, yMid] = guideAnchor(curve, data.fits);
    const y = (x: number) => yMid * (x / xMid) ** guide.slope;
    parts.push(
      `<line x1="${fmt(sx.toPixel(lo))}" y1="${fmt(sy.toPixel(y(lo)))}" ` +
      `x2="${fmt(sx.toPixel(hi))}" y2="${fmt(sy.toPixel(y(hi)))}" ` +
      `stroke="#666" stroke-width="1" stroke-dasharray="6 4" class="guide" ` +
      `data-slope="${guide.slope}"/>`,
      `<text x="${fmt(sx.toPixel(hi))}" y="${fmt(sy.toPixel(y(hi)) - 6)}" ` +
      `fill="#666" text-anchor="end">slope ${guide.slope}</text>`,
    );
  }

  // legend
  let ly = MARGIN.top + 14;
  for (const curve of curves) {
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${ly - 4}" x2="${MARGIN.left + 34}" ` +
      `y2="${ly - 4}" stroke="${curve.color}" stroke-width="2"/>`,
      `<text x="${MARGIN.left + 40}" y="${ly}">${curve.label}</text>`,
    );
    ly += 16;
  }

  // axis labels and title
  if (spec.xlabel) {
    parts.push(
      `<text x="${(MARGIN.left + width - MARGIN.right) / 2}" y="${height - 12}" ` +
      `text-anchor="middle">${spec.xlabel}</text>`,
    );
  }
  if (spec.ylabel) {
    const x = 18;
    const y = (MARGIN.top + height - MARGIN.bottom) / 2;
    parts.push(
      `<text x="${x}" y="${y}" text-anchor="middle" ` +
      `transform="rotate(-90 ${x} ${y})">${spec.ylabel}</text>`,
    );
  }
  if (spec.title) {
    parts.push(
      `<text x="${width / 2}" y="22" text-anchor="middle" font-size="14">` +
      `${spec.title}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
