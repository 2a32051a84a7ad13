#!/usr/bin/env node
/**
 * plotkit: render a sweep CSV as a log-log SVG with slope guides.
 *
 *     plotkit --spec fig3.spec.json
 *     plotkit fig3.csv --out fig3.svg --guides 2,4,6
 */

import { readFileSync, writeFileSync } from "node:fs";

import { CsvError, SweepData, loadSweep } from "./csv.js";
import { PlotSpec, RenderError, renderSvg } from "./render.js";

function usage(): string {
  return "usage: plotkit --spec <spec.json> | plotkit <sweep.csv> " +
    "[--out file.svg] [--guides 2,4,6] [--methods a,b] [--title t]";
}

export function specFromArgs(argv: string[]): PlotSpec {
  const args = [...argv];
  const positional: string[] = [];
  const flags = new Map<string, string>();
  while (args.length > 0) {
    const a = args.shift()!;
    if (a.startsWith("--")) {
      const value = args.shift();
      if (value === undefined) {
        throw new RenderError(`flag ${a} needs a value\n${usage()}`);
      }
      flags.set(a.slice(2), value);
    } else {
      positional.push(a);
    }
  }
  if (flags.has("spec")) {
    const spec = JSON.parse(readFileSync(flags.get("spec")!, "utf8")) as PlotSpec;
    if (!spec.inputs || !spec.output) {
      throw new RenderError("spec file needs inputs and output fields");
    }
    return spec;
  }
  if (positional.length === 0) {
    throw new RenderError(usage());
  }
  return {
    inputs: positional,
    output: flags.get("out") ?? positional[0].replace(/\.csv$/, "") + ".svg",
    guides: flags.get("guides")?.split(",").map(Number),
    methods: flags.get("methods")?.split(","),
    title: flags.get("title"),
    xlabel: flags.get("xlabel") ?? "x",
    ylabel: flags.get("ylabel") ?? "error",
  };
}

export function run(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = specFromArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const data: SweepData = { rows: [], fits: [] };
    for (const input of spec.inputs) {
      const part = loadSweep(input);
      data.rows.push(...part.rows);
      data.fits.push(...part.fits);
    }
    const svg = renderSvg(data, spec);
    writeFileSync(spec.output, svg);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvError || err instanceof RenderError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plotkit")) {
  process.exit(run(process.argv.slice(2)));
}
