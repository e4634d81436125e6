"""Exploratory shape metrics for the grid variant of the process."""

from .metrics import (
    COMPASS,
    ShapeMetrics,
    anisotropy_of,
    directional_extents,
    isotropy_report,
    shape_metrics,
    write_snapshot,
)

__all__ = [
    "COMPASS",
    "ShapeMetrics",
    "directional_extents",
    "anisotropy_of",
    "shape_metrics",
    "write_snapshot",
    "isotropy_report",
]
