#!/usr/bin/env python
"""Command-line interface for dispersion-lab.

Usage:
    python cli.py run --n 100 --seed 3 --trace --out results/
    python cli.py mc --n 1000 --trials 20 --seed 42 --out results/
    python cli.py mc --n-list 125,250,500,1000 --trials 20 --out results/scaling
    python cli.py couple --n 200 --seed 7
    python cli.py lemma --C 1 --rho 0.5 --m 30 --eps 0.5
    python cli.py shape2d --n 2000 --trials 8 --out results/grid

Exit status: 0 success, 1 usage or I/O error, 2 invariant violation.
"""

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from concentration import certify
from config import config
from harness import (
    ExperimentPlan,
    drift_check,
    fit_scaling,
    gap_tail_check,
    run_experiment,
    stopping_time_trend,
    to_jsonable,
)
from harness.output import write_trace_tsv
from observability import setup_tracing
from process.errors import DispersionError, NoEstimateError
from process.lattice import Topology
from process.trial import Instrumentation, run_instrumented_trial
from shape2d import isotropy_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _n_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dispersion", description="Synchronous dispersion process experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def plan_flags(p, graph=True, instrument=True, default_n=None):
        p.add_argument("--n", type=int, default=default_n, help="number of particles")
        p.add_argument("--n-list", type=_n_list, help="comma-separated n values")
        p.add_argument("--trials", type=int, default=1, help="trials per n")
        p.add_argument("--seed", type=int, default=0, help="base seed")
        p.add_argument("--max-steps", type=int, default=None, help="step cap per trial")
        if graph:
            p.add_argument("--graph", choices=[t.value for t in Topology], default=Topology.LINE.value)
        if instrument:
            p.add_argument("--instrument", choices=[i.value for i in Instrumentation],
                           default=Instrumentation.NONE.value)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=config.jobs, help="worker processes (0 = all CPUs)")

    run = sub.add_parser("run", help="single trial")
    run.add_argument("--n", type=int, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--graph", choices=[t.value for t in Topology], default=Topology.LINE.value)
    run.add_argument("--instrument", choices=[i.value for i in Instrumentation],
                     default=Instrumentation.NONE.value)
    run.add_argument("--trace", action="store_true", help="write the per-step trace as TSV")
    run.add_argument("--out", default=None)

    plan_flags(sub.add_parser("mc", help="Monte Carlo experiment"))
    plan_flags(sub.add_parser("couple", help="coupling run with domination checks"),
               graph=False, instrument=False, default_n=200)
    plan_flags(sub.add_parser("shape2d", help="2D grid batch with shape metrics"),
               graph=False, instrument=False)

    lemma = sub.add_parser("lemma", help="concentration certificate")
    lemma.add_argument("--C", type=float, required=True)
    lemma.add_argument("--rho", type=float, required=True)
    lemma.add_argument("--m", type=int, required=True)
    lemma.add_argument("--eps", type=float, required=True)
    lemma.add_argument("--json", action="store_true", help="print the report as JSON")
    return parser


def _plan(args, topology: Topology, instrument: Instrumentation) -> ExperimentPlan:
    if args.n_list:
        n_values = args.n_list
    elif args.n is not None:
        n_values = [args.n]
    else:
        raise UsageError("one of --n or --n-list is required")
    return ExperimentPlan(
        n_values=n_values,
        trials_per_n=args.trials,
        base_seed=args.seed,
        topology=topology,
        instrument=instrument,
        max_steps=args.max_steps,
        out_dir=args.out,
    )


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args) -> int:
    outcome = run_instrumented_trial(
        args.n,
        Topology(args.graph),
        args.seed,
        args.max_steps,
        Instrumentation(args.instrument),
        trace=args.trace,
    )
    record = outcome.record
    print(json.dumps(record.to_dict(), sort_keys=True))

    if args.trace:
        resolved = {"command": "run", **{k: v for k, v in vars(args).items() if k not in ("command", "out")}}
        out = Path(args.out or config.results_dir)
        path = write_trace_tsv(out / f"trace_n{args.n}_s{args.seed}.tsv", outcome.trace, record.topology, resolved)
        print(f"✓ Trace: {path}")

    if record.capped:
        print(f"⚠️  Trial hit max_steps={record.T} before settling")
    violations = record.domination_violations + record.lipschitz_violations
    if violations or not record.conserved:
        print(f"❌ violations: {violations}, conserved: {record.conserved}")
        return EXIT_VIOLATION
    return EXIT_OK


def _print_summary(summary):
    for n in summary.n_values:
        part = summary.by_n[n]
        line = f"n={n:<6} trials={part.trials:<4} settled={part.trials - part.capped:<4}"
        if part.spans:
            data = part.to_dict()
            span, T, density = data["span"], data["T"], data["density"]
            line += (f" span={span['mean']:.1f}±{span['ci95']:.1f}"
                     f" span/n={data['span_over_n']:.4f}"
                     f" T={T['mean']:.0f}±{T['ci95']:.0f}")
            if density.get("count"):
                line += f" density={density['mean']:.4f}"
        print(line)


def _violation_status(summary) -> int:
    if summary.violations or any(part.non_conserved for part in summary.by_n.values()):
        print(f"❌ violations: {summary.violations}")
        return EXIT_VIOLATION
    if summary.capped:
        print(f"❌ {summary.capped} trial(s) capped")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_mc(args) -> int:
    plan = _plan(args, Topology(args.graph), Instrumentation(args.instrument))
    print(f"🚀 plan {plan.plan_id}: n={plan.n_values} x {plan.trials_per_n} trials")
    result = run_experiment(plan, jobs=args.jobs)
    summary = result.summary
    _print_summary(summary)

    if plan.topology is Topology.LINE and len(plan.n_values) >= 3:
        try:
            report = fit_scaling(summary.mean_spans())
            print(report.to_table())
            for n, ratio in stopping_time_trend(summary.mean_stopping_times()).items():
                print(f"T/(n^2 ln n) n={n}: {ratio:.4f}")
        except DispersionError as e:
            print(f"⚠️  Scaling fit skipped: {e}")

    if plan.instrument >= Instrumentation.STATS:
        try:
            drift = drift_check(result.outcomes)
            mark = "✓" if drift.passed else "❌"
            print(f"{mark} drift: {drift.frequency:.4f} (expected {drift.expected:.4f}, "
                  f"{drift.steps} steps, singleton changes {drift.singleton_changes})")
        except NoEstimateError as e:
            print(f"⚠️  Drift check: {e}")
    if plan.instrument is Instrumentation.COUPLING:
        tail = gap_tail_check(result.records)
        print(f"{'✓' if tail['passed'] else '⚠️ '} gap tail: {len(tail['flagged'])} trial(s) at or above (ln n)^2")

    for path in result.files:
        print(f"✓ {path}")
    return _violation_status(summary)


def cmd_couple(args) -> int:
    plan = _plan(args, Topology.LINE, Instrumentation.COUPLING)
    result = run_experiment(plan, jobs=args.jobs, progress=plan.trials_per_n * len(plan.n_values) > 1)
    summary = result.summary
    for n in summary.n_values:
        part = summary.by_n[n]
        rho = part.rho_hat()
        rho_text = f"{rho.rho:.3f}" if rho else "n/a"
        print(f"n={n} trials={part.trials} max_gap={max(part.max_gaps, default=0)} "
              f"e_events={part.e_events} rho_hat={rho_text}")
    print(f"violations: {summary.violations}")
    for path in result.files:
        print(f"✓ {path}")
    return _violation_status(summary)


def cmd_lemma(args) -> int:
    report = certify(args.C, args.rho, args.m, args.eps)
    if args.json:
        print(json.dumps(to_jsonable(report.to_dict()), indent=2, sort_keys=True))
    else:
        print(report.to_table())
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_shape2d(args) -> int:
    plan = _plan(args, Topology.GRID2D, Instrumentation.NONE)
    print(f"🚀 plan {plan.plan_id}: grid n={plan.n_values} x {plan.trials_per_n} trials")
    result = run_experiment(plan, jobs=args.jobs)
    _print_summary(result.summary)
    for n in result.summary.n_values:
        part = result.summary.by_n[n]
        shape = part.to_dict().get("shape")
        if shape:
            print(f"n={n} " + " ".join(f"{k}={v:.4f}" for k, v in shape.items()))
    metrics = [m for m in result.shapes if m is not None]
    if len(metrics) > 1:
        iso = isotropy_report(metrics)
        axes = " ".join(f"{k}={v['mean']:.2f}" for k, v in iso["axes"].items())
        print(f"{'✓' if iso['consistent'] else '⚠️ '} isotropy: {axes}")
    for path in result.files:
        print(f"✓ {path}")
    return _violation_status(result.summary)


COMMANDS = {
    "run": cmd_run,
    "mc": cmd_mc,
    "couple": cmd_couple,
    "lemma": cmd_lemma,
    "shape2d": cmd_shape2d,
}


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and run the subcommand. Returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as e:
        return int(e.code or 0)

    setup_tracing()
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR
    except ValidationError as e:
        print(f"❌ Invalid plan: {e.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_ERROR
    except (DispersionError, OSError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(parse_and_dispatch())
