#!/usr/bin/env python3
"""
03 - Coupling domination

Runs the instrumented line process at n = 200 over 10 seeds and checks,
at every step, that each ordered gap is dominated by its coupled copy and
moves by at most 2. Also reports the delta_hat case statistics and the
geometric tail fit.

Usage:
    python experiments/03-coupling-domination.py
    python experiments/03-coupling-domination.py --n 500 --trials 20
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from harness import ExperimentPlan, gap_tail_check, run_experiment  # noqa: E402
from process.trial import Instrumentation  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Coupling domination")
    parser.add_argument("--n", type=int, default=200, help="Number of particles")
    parser.add_argument("--trials", type=int, default=10, help="Number of seeds")
    parser.add_argument("--seed", type=int, default=7, help="Base seed")
    parser.add_argument("--jobs", type=int, default=0, help="Worker processes (0 = all CPUs)")
    args = parser.parse_args()

    plan = ExperimentPlan(
        n_values=[args.n],
        trials_per_n=args.trials,
        base_seed=args.seed,
        instrument=Instrumentation.COUPLING,
    )
    print(f"🎲 Coupled runs: n={args.n}, {args.trials} seeds...\n")
    result = run_experiment(plan, jobs=args.jobs)
    part = result.summary.by_n[args.n]
    data = part.to_dict()

    print(f"\n  violations: {part.violations}")
    print(f"  e_events:   {part.e_events}")
    for case, stats in data["delta_hat"].items():
        print(f"  case {case}: count={stats['count']} mean={stats['mean']:.4f} "
              f"positive={stats['positive_freq']:.4f} (exact {stats['expected_positive']:.4f})")
    if data["rho_hat"]:
        print(f"  rho_hat:    {data['rho_hat']['rho']:.4f} (R^2 {data['rho_hat']['r_squared']:.4f})")
    tail = gap_tail_check(result.records)
    print(f"  gap tail:   {len(tail['flagged'])} trial(s) flagged")

    ok = part.violations == 0 and part.capped == 0
    print(f"\n{'✅' if ok else '❌'} violations: {part.violations}")
    sys.exit(0 if ok else 2)


if __name__ == "__main__":
    main()
