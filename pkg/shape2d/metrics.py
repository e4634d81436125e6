"""Shape of a settled grid configuration.

Density is measured against the origin-centred disk through the farthest
occupied site. Directional extents are taken along the eight compass rays:
the farthest occupied site whose angle lies within 22.5 degrees of the ray.
"""

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from process.errors import InvalidArgumentError
from process.lattice import Configuration, Topology, is_settled

COMPASS = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")
HALF_SECTOR = math.pi / 8
ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class ShapeMetrics:
    occupied_count: int
    r_max: float
    r_inf: int
    disk_density: float
    disk_density_raw: float
    anisotropy: float
    extents: tuple[float, ...]
    snapshot_path: str | None = None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["extents"] = dict(zip(COMPASS, self.extents))
        return data


def _coordinates(config: Configuration) -> np.ndarray:
    if config.topology is not Topology.GRID2D:
        raise InvalidArgumentError("shape metrics are defined on the grid")
    return np.array(sorted(config.occupancy), dtype=np.int64).reshape(-1, 2)


def directional_extents(config: Configuration) -> tuple[float, ...]:
    """Farthest occupied distance within +-22.5 degrees of each compass ray."""
    xy = _coordinates(config)
    radii = np.hypot(xy[:, 0], xy[:, 1])
    away = radii > 0
    angles = np.arctan2(xy[away, 1], xy[away, 0])
    radii = radii[away]

    extents = []
    for k in range(len(COMPASS)):
        ray = k * math.pi / 4
        offset = np.abs((angles - ray + math.pi) % (2 * math.pi) - math.pi)
        inside = offset <= HALF_SECTOR + ANGLE_SLACK
        extents.append(float(radii[inside].max()) if inside.any() else 0.0)
    return tuple(extents)


def anisotropy_of(extents: tuple[float, ...]) -> float:
    """max/min directional extent; 1 when every extent is 0."""
    longest, shortest = max(extents), min(extents)
    if longest == 0:
        return 1.0
    if shortest == 0:
        return math.inf
    return longest / shortest


def shape_metrics(config: Configuration, snapshot_path: str | None = None) -> ShapeMetrics:
    """Metrics of a settled grid configuration."""
    if not is_settled(config):
        raise InvalidArgumentError("shape metrics need a settled configuration")
    xy = _coordinates(config)
    r_max = float(np.hypot(xy[:, 0], xy[:, 1]).max())
    r_inf = int(np.abs(xy).max())
    raw = config.n / (math.pi * r_max ** 2) if r_max > 0 else 1.0
    extents = directional_extents(config)
    return ShapeMetrics(
        occupied_count=len(config.occupancy),
        r_max=r_max,
        r_inf=r_inf,
        disk_density=min(raw, 1.0),
        disk_density_raw=raw,
        anisotropy=anisotropy_of(extents),
        extents=extents,
        snapshot_path=snapshot_path,
    )


def write_snapshot(config: Configuration, path: str | Path, header: str | None = None) -> Path:
    """One ``x y`` line per occupied site, sorted lexicographically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    xy = _coordinates(config)
    with path.open("w") as f:
        if header:
            f.write(f"# {header}\n")
        for x, y in xy.tolist():
            f.write(f"{x} {y}\n")
    return path


def isotropy_report(metrics: list[ShapeMetrics]) -> dict:
    """Mean extents along +x, -x, +y, -y across trials with 95% intervals.

    ``consistent`` is True when every pair of intervals overlaps.
    """
    axes = {"+x": 0, "+y": 2, "-x": 4, "-y": 6}
    report = {}
    for name, index in axes.items():
        values = np.array([m.extents[index] for m in metrics], dtype=np.float64)
        mean = float(values.mean()) if values.size else math.nan
        half = 1.96 * float(values.std(ddof=1)) / math.sqrt(values.size) if values.size > 1 else math.inf
        report[name] = {"mean": mean, "low": mean - half, "high": mean + half}
    intervals = list(report.values())
    consistent = all(
        a["low"] <= b["high"] and b["low"] <= a["high"] for a in intervals for b in intervals
    )
    return {"axes": report, "consistent": consistent}


__all__ = [
    "COMPASS",
    "ShapeMetrics",
    "directional_extents",
    "anisotropy_of",
    "shape_metrics",
    "write_snapshot",
    "isotropy_report",
]
