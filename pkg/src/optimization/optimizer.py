# src/optimization/optimizer.py
"""Per-class VM type selection and assembly of the cluster solution.

Classes share no constraint, so each one is solved on its own: every
candidate VM type gets an analytic starting size, is refined by hill
climbing against the evaluator, and is priced with the cheapest
reserved/spot mix. The cheapest feasible candidate wins.
"""

from __future__ import annotations

import logging
import math
from decimal import Decimal
from typing import Iterable, List, Optional

from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict

from src import __version__
from src.analytic.bounds import demand, initial_containers
from src.analytic.pricing import hourly_cost, pricing_split
from src.models.costing import require_valid, with_cost
from src.models.objects import ApplicationClass, ClassSolution, Problem, Solution, VmType
from src.optimization.evaluator import EvaluationCache, EvaluationRecord, Evaluator, OptimizerConfig
from src.optimization.hill_climbing import ProgressCallback, hill_climb

logger = logging.getLogger(__name__)


class CandidateAttempt(BaseModel):
    """Outcome of the search on one candidate VM type."""

    model_config = ConfigDict(frozen=True)

    vm_type: str
    start_vms: int
    record: EvaluationRecord
    reserved: int
    spot: int
    hourly_cost: Decimal

    @property
    def feasible(self) -> bool:
        return self.record.feasible and self.record.converged

    def describe(self) -> str:
        estimate = self.record.estimate
        state = "feasible" if self.feasible else "infeasible"
        return (
            f"{self.vm_type}: {state} with {self.record.vms} VMs "
            f"(T={estimate.mean_response:.2f} ms +/- {estimate.half_width:.2f} ms, "
            f"cost {self.hourly_cost}/h)"
        )


def start_vms(app_class: ApplicationClass, vm_type: VmType, config: OptimizerConfig) -> int:
    """Analytic starting fleet size; 1 VM when the bound deems the deadline unreachable."""
    profile = app_class.profiles[vm_type.id]
    allocation = initial_containers(
        demand(profile),
        app_class.h_users,
        app_class.think_time,
        app_class.deadline,
        max_containers=config.max_containers,
    )
    if not allocation.feasible:
        logger.info(
            f"[{app_class.id}/{vm_type.id}] analytic bound finds no feasible size; "
            "starting the climb from 1 VM"
        )
        return 1
    return max(1, math.ceil(allocation.containers / vm_type.containers))


def _attempt(
    app_class: ApplicationClass,
    vm_type: VmType,
    config: OptimizerConfig,
    evaluator: Evaluator,
    progress: Optional[ProgressCallback],
) -> CandidateAttempt:
    first = start_vms(app_class, vm_type, config)
    record = hill_climb(app_class, vm_type, first, config, evaluator=evaluator, progress=progress)
    mix = pricing_split(record.vms, app_class.spot_fraction_cap, vm_type.sigma, vm_type.pi)
    attempt = CandidateAttempt(
        vm_type=vm_type.id,
        start_vms=first,
        record=record,
        reserved=mix.reserved,
        spot=mix.spot,
        hourly_cost=hourly_cost(mix, vm_type.sigma, vm_type.pi),
    )
    logger.info(f"[{app_class.id}] start {first} -> {attempt.describe()}")
    return attempt


def _to_class_solution(
    app_class: ApplicationClass, chosen: CandidateAttempt, attempts: List[CandidateAttempt]
) -> ClassSolution:
    estimate = chosen.record.estimate
    diagnostics = tuple(a.describe() for a in attempts) if not chosen.feasible else ()
    return ClassSolution(
        class_id=app_class.id,
        vm_type=chosen.vm_type,
        vms=chosen.record.vms,
        reserved=chosen.reserved,
        spot=chosen.spot,
        predicted_time=estimate.mean_response,
        ci_half_width=estimate.half_width,
        feasible=chosen.feasible,
        hourly_cost=chosen.hourly_cost,
        diagnostics=diagnostics,
    )


def select_vm_type(
    app_class: ApplicationClass,
    catalog: Iterable[VmType],
    config: OptimizerConfig,
    evaluator: Optional[Evaluator] = None,
    progress: Optional[ProgressCallback] = None,
) -> ClassSolution:
    """Cheapest feasible (type, size, mix) for one class.

    Ties go to fewer VMs, then to the lexicographically smaller type id.
    When no type reaches feasibility the attempt closest to the deadline is
    returned as infeasible, with every attempt listed in its diagnostics.
    """
    evaluator = evaluator or Evaluator(config)
    candidates = sorted(
        (vm for vm in catalog if vm.id in app_class.profiles), key=lambda vm: vm.id
    )
    if not candidates:
        raise ValueError(f"class '{app_class.id}' has no candidate VM type in the catalog")

    attempts = [_attempt(app_class, vm, config, evaluator, progress) for vm in candidates]
    feasible = [a for a in attempts if a.feasible]
    if feasible:
        chosen = min(feasible, key=lambda a: (a.hourly_cost, a.record.vms, a.vm_type))
        logger.info(f"[{app_class.id}] selected {chosen.describe()}")
    else:
        chosen = min(
            attempts,
            key=lambda a: (a.record.estimate.mean_response - app_class.deadline, a.vm_type),
        )
        logger.warning(f"[{app_class.id}] no candidate VM type meets the deadline")
    return _to_class_solution(app_class, chosen, attempts)


def optimize(
    problem: Problem,
    config: OptimizerConfig,
    progress: Optional[ProgressCallback] = None,
) -> Solution:
    """Solves every class independently and prices the assembled cluster."""
    require_valid(problem)
    evaluator = Evaluator(config, EvaluationCache())

    logger.info(
        f"Optimizing {len(problem.classes)} classes over {len(problem.catalog)} VM types "
        f"(evaluator={config.evaluator}, seed={config.master_seed}, n_jobs={config.n_jobs})"
    )
    per_class = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(select_vm_type)(app_class, problem.catalog, config, evaluator, progress)
        for app_class in problem.classes
    )
    status = "complete" if all(c.feasible for c in per_class) else "partial"
    solution = Solution(
        per_class=list(per_class),
        status=status,
        seed=config.master_seed,
        tool_version=__version__,
        currency=problem.currency,
    )
    logger.info(
        f"Evaluation cache: {len(evaluator.cache)} entries, "
        f"{evaluator.cache.hits} hits, {evaluator.cache.misses} misses"
    )
    return with_cost(solution, problem.catalog)
