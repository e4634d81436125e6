"""Run an ExperimentPlan, in parallel, and write its result files.

Trials are independent: each worker gets (n, index, seed) and returns a
TrialOutcome. Outcomes are sorted by (n, index) before aggregation, so the
summary and files do not depend on completion order or on the job count.
"""

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from tqdm import tqdm

from observability import tracer
from process.lattice import Topology
from process.trial import Instrumentation, TrialOutcome, run_instrumented_trial
from shape2d.metrics import ShapeMetrics, shape_metrics, write_snapshot

from .output import (
    header_lines,
    write_manifest,
    write_records,
    write_scaling_tsv,
    write_summary_csv,
    write_summary_json,
    write_survival_tsv,
)
from .plan import ExperimentPlan
from .summary import Summary


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    summary: Summary
    outcomes: list[TrialOutcome]
    shapes: list[ShapeMetrics | None] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    @property
    def records(self):
        return [o.record for o in self.outcomes]


def _run_task(task: tuple) -> tuple[int, int, TrialOutcome]:
    n, index, seed, topology, max_steps, instrument = task
    outcome = run_instrumented_trial(
        n,
        Topology(topology),
        seed,
        max_steps,
        Instrumentation(instrument),
        keep_final=topology == Topology.GRID2D.value,
    )
    return n, index, outcome


def _resolve_jobs(jobs: int | None) -> int:
    if jobs is None or jobs <= 0:
        return os.cpu_count() or 1
    return jobs


def _execute(tasks: list[tuple], jobs: int, progress: bool) -> dict[tuple[int, int], TrialOutcome]:
    done = {}
    bar = tqdm(total=len(tasks), desc="trials", unit="trial", disable=not progress)
    try:
        if jobs == 1 or len(tasks) == 1:
            for task in tasks:
                n, index, outcome = _run_task(task)
                done[(n, index)] = outcome
                bar.update()
        else:
            with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as executor:
                futures = [executor.submit(_run_task, task) for task in tasks]
                for future in as_completed(futures):
                    n, index, outcome = future.result()
                    done[(n, index)] = outcome
                    bar.update()
    finally:
        bar.close()
    return done


def _write_files(result: ExperimentResult, out_dir: Path, shapes_final: list) -> list[Path]:
    plan = result.plan
    resolved = plan.resolved()
    files: list[Path] = []
    grid = plan.topology is Topology.GRID2D
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        files.append(write_records(out_dir / "records.jsonl", result.records, plan.plan_id, resolved))
        files.append(write_summary_csv(out_dir / "summary.csv", result.summary, resolved, grid=grid))
        files.append(write_summary_json(out_dir / "summary.json", result.summary, resolved))
        if not grid:
            files.append(write_scaling_tsv(out_dir / "scaling.tsv", result.summary, resolved))
        if plan.instrument is Instrumentation.COUPLING:
            files.append(write_survival_tsv(out_dir / "survival.tsv", result.summary, resolved))
        header = header_lines(resolved)[0][2:]
        for path, config in shapes_final:
            files.append(write_snapshot(config, path, header=header))
    except OSError as exc:
        try:
            manifest = write_manifest(out_dir, files, str(exc))
            print(f"❌ Writing results failed: {exc} (partial manifest: {manifest})")
        except OSError as manifest_exc:
            print(f"❌ Writing results failed: {exc} (no manifest: {manifest_exc})")
        raise exc
    return files


def run_experiment(
    plan: ExperimentPlan,
    out_dir: str | Path | None = None,
    jobs: int | None = None,
    progress: bool = True,
) -> ExperimentResult:
    """Execute every trial of ``plan`` and aggregate.

    Files are written only when ``out_dir`` (or ``plan.out_dir``) is set.
    """
    target = out_dir or plan.out_dir
    target = Path(target) if target else None
    tasks = [
        (n, index, seed, plan.topology.value, plan.max_steps, plan.instrument.value)
        for n, index, seed in plan.trials()
    ]

    with tracer.start_as_current_span("run_experiment") as span:
        span.set_attribute("plan_id", plan.plan_id)
        span.set_attribute("trials", len(tasks))
        span.set_attribute("topology", plan.topology.value)

        done = _execute(tasks, _resolve_jobs(jobs), progress)
        keys = sorted(done)
        outcomes = [done[key] for key in keys]

        shapes: list[ShapeMetrics | None] = []
        snapshots = []
        for (n, index), outcome in zip(keys, outcomes):
            final = outcome.final
            if final is None or outcome.record.capped:
                shapes.append(None)
                continue
            path = target / "snapshots" / f"n{n}_t{index}.txt" if target else None
            shapes.append(shape_metrics(final, str(path) if path else None))
            if path:
                snapshots.append((path, final))
            outcome.final = None

        summary = Summary.from_outcomes(outcomes, shapes)
        result = ExperimentResult(plan=plan, summary=summary, outcomes=outcomes, shapes=shapes)
        if target:
            result.files = _write_files(result, target, snapshots)

        span.set_attribute("violations", summary.violations)
        span.set_attribute("capped", summary.capped)

    if summary.capped:
        print(f"⚠️  {summary.capped} trial(s) hit max_steps and are excluded from statistics")
    return result


__all__ = ["ExperimentResult", "run_experiment"]
