"""Experiment plans: which trials to run and how their seeds are derived.

Trial seeds are ``base_seed XOR h(n, trial_index)`` with h a 64-bit BLAKE2b
digest, so every (n, index) gets its own stream and a plan re-runs
bit-identically.
"""

import hashlib
import json

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from process.lattice import Topology
from process.rng import MASK64
from process.trial import Instrumentation


def trial_seed(base_seed: int, n: int, index: int) -> int:
    digest = hashlib.blake2b(f"{n}:{index}".encode(), digest_size=8).digest()
    return (base_seed ^ int.from_bytes(digest, "little")) & MASK64


class ExperimentPlan(BaseModel):
    """Batch of seeded trials over a list of n values."""
    model_config = ConfigDict(frozen=True, use_enum_values=False)

    n_values: list[PositiveInt] = Field(min_length=1)
    trials_per_n: PositiveInt = 1
    base_seed: int = Field(default=0, ge=0, le=MASK64)
    topology: Topology = Topology.LINE
    instrument: Instrumentation = Instrumentation.NONE
    max_steps: PositiveInt | None = None
    out_dir: str | None = None

    @model_validator(mode="after")
    def _check(self) -> "ExperimentPlan":
        if len(set(self.n_values)) != len(self.n_values):
            raise ValueError("n_values must be distinct")
        if self.instrument != Instrumentation.NONE and self.topology != Topology.LINE:
            raise ValueError("stats and coupling instrumentation are defined on the line")
        seeds = [seed for _, _, seed in self.trials()]
        if len(set(seeds)) != len(seeds):
            raise ValueError("derived trial seeds collide; choose another base_seed")
        return self

    def resolved(self) -> dict:
        """Everything that affects results (output location excluded)."""
        return self.model_dump(mode="json", exclude={"out_dir"})

    @property
    def plan_id(self) -> str:
        canonical = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    def trials(self) -> list[tuple[int, int, int]]:
        """(n, trial_index, seed) in canonical order."""
        return [
            (n, index, trial_seed(self.base_seed, n, index))
            for n in self.n_values
            for index in range(self.trials_per_n)
        ]


__all__ = ["ExperimentPlan", "trial_seed"]
