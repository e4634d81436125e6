#!/usr/bin/env python3
"""
05 - Shape on the grid

Disperses n particles from the origin of Z^2 and reports the disk density,
anisotropy and the axis extents across trials. Exploratory: there is no
target value.

Usage:
    python experiments/05-shape2d.py
    python experiments/05-shape2d.py --n 2000 --trials 8 --out results/05-shape2d
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from harness import ExperimentPlan, run_experiment  # noqa: E402
from process.lattice import Topology  # noqa: E402
from shape2d import isotropy_report  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Shape on the grid")
    parser.add_argument("--n", type=int, default=10_000, help="Number of particles")
    parser.add_argument("--trials", type=int, default=5, help="Number of trials")
    parser.add_argument("--seed", type=int, default=5, help="Base seed")
    parser.add_argument("--jobs", type=int, default=0, help="Worker processes (0 = all CPUs)")
    parser.add_argument("--out", default="results/05-shape2d", help="Output directory (snapshots)")
    args = parser.parse_args()

    plan = ExperimentPlan(
        n_values=[args.n],
        trials_per_n=args.trials,
        base_seed=args.seed,
        topology=Topology.GRID2D,
        out_dir=args.out,
    )
    print(f"🎲 Grid runs: n={args.n}, {args.trials} trials...\n")
    result = run_experiment(plan, jobs=args.jobs)

    metrics = [m for m in result.shapes if m is not None]
    for m in metrics:
        print(f"  r_max={m.r_max:.2f} r_inf={m.r_inf} density={m.disk_density:.4f} "
              f"anisotropy={m.anisotropy:.3f}")
    if len(metrics) > 1:
        iso = isotropy_report(metrics)
        for axis, stats in iso["axes"].items():
            print(f"  {axis}: {stats['mean']:.2f} [{stats['low']:.2f}, {stats['high']:.2f}]")
        print(f"\n{'✅' if iso['consistent'] else '⚠️ '} axis extents consistent")


if __name__ == "__main__":
    main()
