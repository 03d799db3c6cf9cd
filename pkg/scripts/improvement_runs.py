"""Run the two reference improvement trajectories and write them as CSV.

Usage: python3 scripts/improvement_runs.py [--out-dir DIR]
"""

import argparse
import csv
from pathlib import Path

from qtradeoff.improver import improve
from qtradeoff.measurement import Measurement, canonicalize, outcome_probability

START = [0.8, 0.7, 0.4, 0.0]
RUNS = (("gf", 0.05), ("gr", 0.01))


def write_run(path: Path, traj) -> None:
    d = traj[0].lambdas.size
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", *[f"lambda{i + 1}" for i in range(d)],
                    "G", "D", "improvability", "nd", "events"])
        for r in traj:
            w.writerow([r.iteration, *r.lambdas, r.metric_g, r.metric_d,
                        r.improvability, r.nd, ";".join(sorted(r.events))])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    m0 = canonicalize(START)
    for pair, eps in RUNS:
        traj = improve(m0, pair, eps)
        write_run(args.out_dir / f"improve_{pair}.csv", traj)
        last = traj[-1]
        landed = [r.iteration for r in traj if "boundary_landed" in r.events]
        renorm = [r.iteration for r in traj if "renormalized" in r.events]
        print(f"{pair}: {len(traj) - 1} steps, final lambda {last.lambdas.round(4)}, "
              f"G {last.metric_g:.4f}, D {last.metric_d:.4f}, "
              f"p {outcome_probability(m0):.4f} -> "
              f"{outcome_probability(Measurement(last.lambdas)):.4f}, "
              f"landings {landed}, first renormalization {renorm[0] if renorm else None}")


if __name__ == "__main__":
    main()
