#!/usr/bin/env python3
"""
04 - Concentration certificates

Checks the concentration bound for sums of geometric-tailed variables
against the exact convolution tail over a small grid of parameters.

Usage:
    python experiments/04-lemma-certification.py
    python experiments/04-lemma-certification.py --m 10,30,100
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from concentration import certify  # noqa: E402
from process.errors import DispersionError  # noqa: E402

# =============================================================================
# CONFIGURATION
# =============================================================================

CASES = [
    # (C, rho, eps)
    (1.0, 0.5, 0.5),
    (1.0, 0.5, 1.0),
    (2.0, 0.3, 0.5),
    (1.0, 0.8, 0.5),
]


def main():
    parser = argparse.ArgumentParser(description="Concentration certificates")
    parser.add_argument("--m", default="10,30,100", help="Comma-separated sample counts")
    args = parser.parse_args()
    ms = [int(m) for m in args.m.split(",")]

    failures = 0
    print(f"{'C':>5} {'rho':>5} {'eps':>5} {'m':>5} {'exact':>12} {'chernoff':>12} {'bound':>12}")
    for C, rho, eps in CASES:
        for m in ms:
            try:
                report = certify(C, rho, m, eps)
            except DispersionError as e:
                print(f"⚠️  C={C} rho={rho} eps={eps} m={m}: {e}")
                continue
            mark = "✓" if report.passed else "❌"
            failures += not report.passed
            print(f"{C:5g} {rho:5g} {eps:5g} {m:5d} {report.exact_tail:12.4e} "
                  f"{report.chernoff:12.4e} {report.bound:12.4e} {mark}")

    print(f"\n{'✅' if not failures else '❌'} {failures} failing certificate(s)")
    sys.exit(0 if not failures else 2)


if __name__ == "__main__":
    main()
