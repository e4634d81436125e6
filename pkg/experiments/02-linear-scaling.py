#!/usr/bin/env python3
"""
02 - Linear span growth

Runs n = 125, 250, 500, 1000 and fits the spans: span/n should be flat,
span/(n ln n) strictly decreasing and the log-log slope close to 1.

Usage:
    python experiments/02-linear-scaling.py
    python experiments/02-linear-scaling.py --trials 40 --jobs 8
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from harness import ExperimentPlan, fit_scaling, run_experiment, stopping_time_trend  # noqa: E402

# =============================================================================
# CONFIGURATION
# =============================================================================

N_VALUES = [125, 250, 500, 1000]


def main():
    parser = argparse.ArgumentParser(description="Linear span growth")
    parser.add_argument("--trials", type=int, default=20, help="Trials per n")
    parser.add_argument("--seed", type=int, default=2024, help="Base seed")
    parser.add_argument("--jobs", type=int, default=0, help="Worker processes (0 = all CPUs)")
    parser.add_argument("--out", default="results/02-linear-scaling", help="Output directory")
    args = parser.parse_args()

    plan = ExperimentPlan(n_values=N_VALUES, trials_per_n=args.trials, base_seed=args.seed, out_dir=args.out)
    print(f"🎲 Running {args.trials} trials for n in {N_VALUES} (plan {plan.plan_id})...\n")
    result = run_experiment(plan, jobs=args.jobs)

    report = fit_scaling(result.summary.mean_spans())
    print(report.to_table())
    print("\nT / (n^2 ln n):")
    for n, ratio in stopping_time_trend(result.summary.mean_stopping_times()).items():
        print(f"  n={n:<5} {ratio:.4f}")

    ok = report.looks_linear and result.summary.capped == 0
    print(f"\n{'✅' if ok else '❌'} linear growth")
    sys.exit(0 if ok else 2)


if __name__ == "__main__":
    main()
