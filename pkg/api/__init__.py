"""API routes for dispersion-lab."""

from __future__ import annotations
