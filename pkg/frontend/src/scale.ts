/** Log-scale mapping and decade ticks for the plot axes. */

export interface LogScale {
  min: number;
  max: number;
  toPixel(value: number): number;
}

export function logScale(min: number, max: number, pixelLo: number, pixelHi: number): LogScale {
  if (!(min > 0) || !(max > min)) {
    throw new Error(`log scale needs 0 < min < max, got [${min}, ${max}]`);
  }
  const lmin = Math.log10(min);
  const lmax = Math.log10(max);
  return {
    min,
    max,
    toPixel(value: number): number {
      const t = (Math.log10(value) - lmin) / (lmax - lmin);
      return pixelLo + t * (pixelHi - pixelLo);
    },
  };
}

/** Powers of ten inside [min, max], thinned to at most `limit` ticks. */
export function decadeTicks(min: number, max: number, limit = 12): number[] {
  const lo = Math.ceil(Math.log10(min) - 1e-9);
  const hi = Math.floor(Math.log10(max) + 1e-9);
  const ticks: number[] = [];
  for (let k = lo; k <= hi; k += 1) {
    ticks.push(k);
  }
  const stride = Math.max(1, Math.ceil(ticks.length / limit));
  return ticks.filter((_, i) => i % stride === 0).map((k) => 10 ** k);
}

export function tickLabel(value: number): string {
  const k = Math.round(Math.log10(value));
  return `1e${k}`;
}

/** Pad a [lo, hi] range multiplicatively (log-space margins). */
export function padRange(lo: number, hi: number, factor = 1.5): [number, number] {
  return [lo / factor, hi * factor];
}
