/**
 * Reader for the sweep CSV schema: header `x,method,error,meta`, one row per
 * sweep point, with an optional JSON sidecar at `<file>.meta.json` carrying
 * the per-method fit windows.
 */

import { readFileSync, existsSync } from "node:fs";

export interface SweepRow {
  x: number;
  method: string;
  error: number;
  meta: string;
}

export interface FitRecord {
  method: string;
  window: [number, number];
  slope: number;
  intercept: number;
  r2: number;
}

export interface SweepData {
  rows: SweepRow[];
  fits: FitRecord[];
}

export class CsvError extends Error {}

/** Minimal CSV field splitter; sweep files never quote commas. */
function splitLine(line: string): string[] {
  return line.split(",");
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV");
  }
  const header = splitLine(lines[0]).map((h) => h.trim());
  if (header[0] !== "x" || header[1] !== "method" || header[2] !== "error") {
    throw new CsvError(
      `missing columns: expected header x,method,error[,meta], got ${lines[0]}`,
    );
  }
  const rows: SweepRow[] = [];
  for (const line of lines.slice(1)) {
    const parts = splitLine(line);
    const x = Number(parts[0]);
    const error = Number(parts[2]);
    if (!Number.isFinite(x) || !Number.isFinite(error)) {
      throw new CsvError(`unparseable row: ${line}`);
    }
    rows.push({ x, method: parts[1], error, meta: parts.slice(3).join(",") });
  }
  return rows;
}

export function loadSweep(path: string): SweepData {
  const rows = parseSweepCsv(readFileSync(path, "utf8"));
  const fits: FitRecord[] = [];
  const sidecar = `${path}.meta.json`;
  if (existsSync(sidecar)) {
    const meta = JSON.parse(readFileSync(sidecar, "utf8"));
    for (const fit of meta.fits ?? []) {
      fits.push({
        method: fit.method,
        window: [fit.window[0], fit.window[1]],
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
      });
    }
  }
  return { rows, fits };
}

/** Group rows into per-method series sorted by x. */
export function series(rows: SweepRow[]): Map<string, Array<[number, number]>> {
  const out = new Map<string, Array<[number, number]>>();
  for (const row of rows) {
    if (!out.has(row.method)) {
      out.set(row.method, []);
    }
    out.get(row.method)!.push([row.x, row.error]);
  }
  for (const pts of out.values()) {
    pts.sort((a, b) => a[0] - b[0]);
  }
  return out;
}
