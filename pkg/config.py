"""Configuration management for dispersion-lab.

Only plumbing lives here: where files go, how many worker processes run,
telemetry and the HTTP service. Nothing read from the environment changes
a simulation result; experiment parameters come from CLI flags or request
bodies.
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass
class Config:
    """Application configuration from environment variables."""

    # Output
    results_dir: str = os.environ.get("DISPERSION_RESULTS_DIR", "results")
    result_store: str = os.environ.get("DISPERSION_RESULT_STORE", "memory")

    # Parallelism (0 = one worker per CPU)
    jobs: int = int(os.environ.get("DISPERSION_JOBS", "0"))

    # Observability
    trace_export: str = os.environ.get("DISPERSION_TRACE_EXPORT", "none")

    # Server
    host: str = os.environ.get("HOST", "0.0.0.0")
    port: int = int(os.environ.get("PORT", "8000"))
    api_max_n: int = int(os.environ.get("DISPERSION_API_MAX_N", "2000"))

    def validate(self) -> list[str]:
        """Check settings are usable. Returns a list of problems."""
        problems = []

        if self.jobs < 0:
            problems.append("DISPERSION_JOBS must be >= 0")

        if self.result_store not in ("memory", "files"):
            problems.append("DISPERSION_RESULT_STORE must be 'memory' or 'files'")

        if self.trace_export not in ("none", "console"):
            problems.append("DISPERSION_TRACE_EXPORT must be 'none' or 'console'")

        if self.api_max_n < 1:
            problems.append("DISPERSION_API_MAX_N must be >= 1")

        return problems


# Global config instance
config = Config()
