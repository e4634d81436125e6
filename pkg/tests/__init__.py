"""Tests for dispersion-lab."""
