"""Result files.

Every file starts with two comment lines:

    # {"base_seed": 42, "n_values": [1000], ...}
    # created_at 2026-01-01T00:00:00+00:00

The first records the resolved configuration; the second is the only line
that differs between two runs of the same configuration.
"""

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from coupling.diagnostics import survival
from process.trial import GRID_TRACE_COLUMNS, LINE_TRACE_COLUMNS, TrialRecord

from .summary import CSV_COLUMNS, GRID_COLUMNS, Summary


def header_lines(resolved: dict) -> list[str]:
    return [
        "# " + json.dumps(resolved, sort_keys=True, separators=(",", ":")),
        "# created_at " + datetime.now(timezone.utc).isoformat(timespec="seconds"),
    ]


def _open(path: Path, resolved: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    f = path.open("w", newline="")
    for line in header_lines(resolved):
        f.write(line + "\n")
    return f


def to_jsonable(value):
    """Plain JSON types: numpy scalars unwrapped, inf as "inf", nan as None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def write_records(path: Path, records: list[TrialRecord], plan_id: str, resolved: dict) -> Path:
    """One JSON object per TrialRecord, with the plan id."""
    with _open(path, resolved) as f:
        for record in records:
            row = {**record.to_dict(), "plan_id": plan_id}
            f.write(json.dumps(row, sort_keys=True) + "\n")
    return path


def write_summary_csv(path: Path, summary: Summary, resolved: dict, grid: bool = False) -> Path:
    columns = CSV_COLUMNS + (GRID_COLUMNS if grid else ())
    with _open(path, resolved) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for n in summary.n_values:
            writer.writerow(summary.by_n[n].csv_row(grid=grid))
    return path


def write_summary_json(path: Path, summary: Summary, resolved: dict) -> Path:
    with _open(path, resolved) as f:
        json.dump(to_jsonable(summary.to_dict()), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_scaling_tsv(path: Path, summary: Summary, resolved: dict) -> Path:
    """Gnuplot-ready ``n  mean_span/n``."""
    with _open(path, resolved) as f:
        f.write("n\tspan_over_n\n")
        for n, mean in summary.mean_spans().items():
            f.write(f"{n}\t{mean / n:.6f}\n")
    return path


def write_survival_tsv(path: Path, summary: Summary, resolved: dict) -> Path:
    """Pooled Pr(g_hat - 3 >= k) per n, one block per n (gnuplot ``index``)."""
    with _open(path, resolved) as f:
        for n in summary.n_values:
            curve = survival(summary.by_n[n].diagnostics.tail_histogram)
            if curve.size == 0 or curve[0] == 0:
                continue
            f.write(f"# n={n}\nk\tsurvival\n")
            for k, value in enumerate(curve):
                if value > 0:
                    f.write(f"{k}\t{value:.8g}\n")
            f.write("\n\n")
    return path


def write_trace_tsv(path: Path, rows: list[tuple], topology: str, resolved: dict) -> Path:
    columns = LINE_TRACE_COLUMNS if topology == "line" else GRID_TRACE_COLUMNS
    with _open(path, resolved) as f:
        f.write("\t".join(columns) + "\n")
        for row in rows:
            f.write("\t".join("" if v is None else str(v) for v in row) + "\n")
    return path


def write_manifest(directory: Path, files: list[Path], error: str) -> Path:
    """List of files completed before an I/O failure."""
    path = Path(directory) / "manifest.json"
    payload = {"complete": False, "error": error, "files": [str(p) for p in files]}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


__all__ = [
    "header_lines",
    "to_jsonable",
    "write_records",
    "write_summary_csv",
    "write_summary_json",
    "write_scaling_tsv",
    "write_survival_tsv",
    "write_trace_tsv",
    "write_manifest",
]
