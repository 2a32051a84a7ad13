#!/usr/bin/env python3
"""Reproduce the benchmark figures: run presets, write CSVs + fit tables.

Usage:
    python scripts/reproduce.py                 # all figures into ./results
    python scripts/reproduce.py fig3 fig5       # a subset
    python scripts/reproduce.py --out /tmp/r    # different output directory
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[0] / ".." / "src"))

from pulsekit.sweeps import preset, run_sweep, write_csv  # noqa: E402

ALL = ("fig3", "fig5", "fig6", "fig8", "fig9")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("figures", nargs="*", default=list(ALL))
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for figure in args.figures or ALL:
        cfg = preset(figure, seed=args.seed)
        result = run_sweep(cfg)
        path = outdir / f"{figure}.csv"
        write_csv(path, result)
        print(f"{figure}: {len(result.rows)} rows in {result.elapsed:.1f}s -> {path}")
        for f in result.fits:
            print(f"    {f.method:>18s}: slope {f.slope:+.3f} over "
                  f"[{f.window[0]:.3g}, {f.window[1]:.3g}]  r2 = {f.r2:.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
