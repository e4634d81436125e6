#!/usr/bin/env python3
"""
01 - Span and density at n = 1000

Runs the headline experiment: 1000 particles from the origin on the line,
20 seeded trials. The settled configuration should use less than 1.2n
sites, i.e. density (n - 1) / span of at least 0.82.

Usage:
    python experiments/01-span-n1000.py
    python experiments/01-span-n1000.py --trials 40 --jobs 8 --out results/n1000
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from harness import ExperimentPlan, run_experiment  # noqa: E402

# =============================================================================
# CONFIGURATION
# =============================================================================

N = 1000
SPAN_RANGE = (1.0, 1.2)
DENSITY_RANGE = (0.82, 1.0)


def main():
    parser = argparse.ArgumentParser(description="Span and density at n = 1000")
    parser.add_argument("--trials", type=int, default=20, help="Number of trials")
    parser.add_argument("--seed", type=int, default=42, help="Base seed")
    parser.add_argument("--jobs", type=int, default=0, help="Worker processes (0 = all CPUs)")
    parser.add_argument("--out", default="results/01-span-n1000", help="Output directory")
    args = parser.parse_args()

    plan = ExperimentPlan(n_values=[N], trials_per_n=args.trials, base_seed=args.seed, out_dir=args.out)
    print(f"🎲 Running {args.trials} trials at n={N} (plan {plan.plan_id})...\n")
    result = run_experiment(plan, jobs=args.jobs)

    part = result.summary.by_n[N]
    data = part.to_dict()
    span_ratio = data["span_over_n"]
    density = data["density"]["mean"]
    print(f"\n  span/n:  {span_ratio:.4f}")
    print(f"  density: {density:.4f}")
    print(f"  T:       {data['T']['mean']:.0f} ± {data['T']['ci95']:.0f}")

    ok = (
        part.capped == 0
        and SPAN_RANGE[0] <= span_ratio <= SPAN_RANGE[1]
        and DENSITY_RANGE[0] <= density <= DENSITY_RANGE[1]
    )
    print(f"\n{'✅' if ok else '❌'} span/n in {SPAN_RANGE}, density in {DENSITY_RANGE}")
    sys.exit(0 if ok else 2)


if __name__ == "__main__":
    main()
