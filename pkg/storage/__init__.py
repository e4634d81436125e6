"""Result storage for the dispersion-lab service."""

from .result_store import FileResultStore, InMemoryResultStore, create_result_store

__all__ = ["FileResultStore", "InMemoryResultStore", "create_result_store"]
