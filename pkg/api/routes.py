"""FastAPI routes for the dispersion-lab API.

Provides:
- Single trials
- Experiments (run, list, fetch, delete)
- Concentration certificates

Simulation work runs in the threadpool so the event loop stays responsive.
Summaries are kept in the result store (files or in-memory).
"""

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, Field, PositiveInt

from concentration import certify
from config import config
from harness import ExperimentPlan, run_experiment, to_jsonable
from observability import tracer
from process.errors import InvalidArgumentError
from process.lattice import Topology
from process.rng import MASK64
from process.trial import Instrumentation, run_trial
from storage import create_result_store


router = APIRouter()


# =============================================================================
# Request Models
# =============================================================================

class TrialRequest(BaseModel):
    """Request body for a single trial."""
    n: PositiveInt
    graph: Topology = Topology.LINE
    seed: int = Field(default=0, ge=0, le=MASK64)
    max_steps: PositiveInt | None = None
    instrument: Instrumentation = Instrumentation.NONE


class LemmaRequest(BaseModel):
    """Request body for a concentration certificate."""
    C: float = Field(gt=0)
    rho: float = Field(gt=0, lt=1)
    m: PositiveInt
    eps: float = Field(gt=0, le=1)


# =============================================================================
# Singleton Instances
# =============================================================================

_store = None


async def get_store():
    """Get or create the result store singleton."""
    global _store
    if _store is None:
        _store = await create_result_store()
    return _store


async def close_store():
    global _store
    if _store:
        await _store.close()
        _store = None


def _check_size(n_values: list[int]):
    too_large = [n for n in n_values if n > config.api_max_n]
    if too_large:
        raise InvalidArgumentError(
            f"n={too_large[0]} exceeds DISPERSION_API_MAX_N={config.api_max_n}"
        )


# =============================================================================
# Trial Routes
# =============================================================================

@router.post("/trials")
async def run_trial_endpoint(request: TrialRequest):
    """Run one trial and return its record."""
    _check_size([request.n])
    with tracer.start_as_current_span("api.trials"):
        record = await run_in_threadpool(
            run_trial,
            request.n,
            request.graph,
            request.seed,
            request.max_steps,
            request.instrument,
        )
    return record.to_dict()


# =============================================================================
# Experiment Routes
# =============================================================================

@router.post("/experiments")
async def run_experiment_endpoint(plan: ExperimentPlan):
    """Run a plan, store its summary under the plan id and return it.

    Results go to the store only; a posted ``out_dir`` is ignored.
    """
    _check_size(plan.n_values)
    plan = plan.model_copy(update={"out_dir": None})
    with tracer.start_as_current_span("api.experiments"):
        result = await run_in_threadpool(run_experiment, plan, None, config.jobs, False)
    summary = to_jsonable(result.summary.to_dict())
    store = await get_store()
    await store.put(plan.plan_id, summary, plan.resolved())
    return {"plan_id": plan.plan_id, "summary": summary}


@router.get("/experiments")
async def list_experiments():
    """List stored experiments (most recent first)."""
    store = await get_store()
    return {"experiments": await store.list(limit=50)}


@router.get("/experiments/{plan_id}")
async def get_experiment(plan_id: str):
    """Get a stored summary."""
    store = await get_store()
    entry = await store.get(plan_id)
    return entry if entry else {"status": "not_found"}


@router.delete("/experiments/{plan_id}")
async def delete_experiment(plan_id: str):
    """Delete a stored summary."""
    store = await get_store()
    deleted = await store.delete(plan_id)
    return {"status": "deleted" if deleted else "not_found"}


# =============================================================================
# Concentration Routes
# =============================================================================

@router.post("/lemma")
async def lemma_endpoint(request: LemmaRequest):
    """Certify the concentration bound against the exact convolution tail."""
    report = await run_in_threadpool(certify, request.C, request.rho, request.m, request.eps)
    return to_jsonable(report.to_dict())
