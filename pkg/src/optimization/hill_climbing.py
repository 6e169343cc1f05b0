# src/optimization/hill_climbing.py

from __future__ import annotations

import logging
from decimal import Decimal
from typing import Callable, Optional

from src.analytic.pricing import hourly_cost, pricing_split
from src.errors import DomainError
from src.models.objects import ApplicationClass, VmType
from src.optimization.evaluator import EvaluationRecord, Evaluator, OptimizerConfig

logger = logging.getLogger(__name__)

# (class_id, vm_type, vms, feasible, hourly cost of the cheapest mix at that size)
ProgressCallback = Callable[[str, str, int, bool, Decimal], None]


def hill_climb(
    app_class: ApplicationClass,
    vm_type: VmType,
    start_vms: int,
    config: OptimizerConfig,
    evaluator: Optional[Evaluator] = None,
    progress: Optional[ProgressCallback] = None,
) -> EvaluationRecord:
    """Unit-step search for the smallest feasible fleet of ``vm_type``.

    An infeasible start grows one VM at a time until feasible. A feasible
    start shrinks while feasible; below the first infeasible size, up to
    ``config.nonmonotone_lookahead`` smaller sizes are probed and the descent
    resumes from any feasible one. Exhausting ``config.max_hc_steps`` returns
    the last record with ``converged=False``.
    """
    if start_vms < 1:
        raise DomainError(f"start_vms must be >= 1, got {start_vms}")
    evaluator = evaluator or Evaluator(config)
    steps = 0

    def look(vms: int) -> EvaluationRecord:
        record = evaluator.evaluate(app_class, vm_type, vms)
        mix = pricing_split(vms, app_class.spot_fraction_cap, vm_type.sigma, vm_type.pi)
        if progress is not None:
            progress(app_class.id, vm_type.id, vms, record.feasible,
                     hourly_cost(mix, vm_type.sigma, vm_type.pi))
        return record

    def give_up(record: EvaluationRecord) -> EvaluationRecord:
        logger.warning(
            f"[{app_class.id}/{vm_type.id}] hill climbing stopped after {steps} steps "
            f"at {record.vms} VMs without converging"
        )
        return record.model_copy(update={"converged": False})

    current = look(start_vms)

    if not current.feasible:
        # pursuit of feasibility
        while not current.feasible:
            if steps >= config.max_hc_steps:
                return give_up(current)
            current = look(current.vms + 1)
            steps += 1
        return current

    # cost optimization
    best = current
    while True:
        while best.vms > 1:
            if steps >= config.max_hc_steps:
                return give_up(best)
            below = look(best.vms - 1)
            steps += 1
            if not below.feasible:
                break
            best = below
        if best.vms == 1:
            return best

        resumed = None
        lowest_probe = max(best.vms - 2 - config.nonmonotone_lookahead, 0)
        for probe in range(best.vms - 2, lowest_probe, -1):
            record = look(probe)
            if record.feasible:
                resumed = record
                break
        if resumed is None:
            # back to the last feasible size
            return look(best.vms)
        logger.warning(
            f"[{app_class.id}/{vm_type.id}] non-monotone feasibility: {best.vms - 1} VMs "
            f"infeasible but {resumed.vms} VMs feasible; continuing the descent"
        )
        best = resumed
