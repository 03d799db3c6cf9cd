"""Emit the range-curve, region and scatter datasets for every preset.

Usage: python3 scripts/figure_datasets.py [--out-dir DIR] [--count N] [--seed S]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from qtradeoff.correlation import (
    PRESETS,
    coefficient_range_curves,
    gamma_boundary,
    preset,
    scatter_dataset,
    sigma_for,
)
from qtradeoff.geometry import angle_set


def write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--count", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--d", type=int, default=4)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for pair in ("gf", "gr"):
        rows = [(c.family, g, c_pp) for c in coefficient_range_curves(args.d, pair)
                for g, c_pp in zip(c.g, c.c)]
        write_rows(args.out_dir / f"range_{pair}.csv", ["family", "G", "C_pp"], rows)

    for name in sorted(PRESETS):
        pair, m = preset(name)
        a = angle_set(m)
        pts = scatter_dataset(m, pair, args.count, seed=args.seed)
        write_rows(args.out_dir / f"scatter_{name}.csv", ["dG", "dD"], pts)
        gb = gamma_boundary(m, pair, angles=a)
        rows = [(k, *p) for k, arc in enumerate(gb.arcs) for p in arc.points]
        rows += [("Sigma", *p) for p in sigma_for(m, pair, angles=a).points]
        write_rows(args.out_dir / f"region_{name}.csv", ["segment", "x", "y"], rows)
        quad = np.round(a.quadruple(pair), 2)
        print(f"{name:14s} lambda {np.round(m.lambdas, 4)}  C++,-C-+,C--,-C+- = {quad}")


if __name__ == "__main__":
    main()
