# src/optimization/evaluator.py
"""Feasibility evaluation of one (class, VM type, fleet size) point."""

from __future__ import annotations

import hashlib
import logging
import threading
from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.analytic.bounds import DEFAULT_MAX_CONTAINERS, demand, t_approx
from src.errors import SimulationAbortedError
from src.models.objects import ApplicationClass, VmType
from src.simulation.network import ServicePolicy, SimEstimate, SimParams, build_network
from src.simulation.output_analysis import estimate_response_time

logger = logging.getLogger(__name__)

CacheKey = Tuple[str, str, int, int]


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    sim_params: SimParams = Field(default_factory=SimParams)
    max_hc_steps: int = Field(default=500, ge=1)
    cache_enabled: bool = True
    evaluator: Literal["simulation", "analytic"] = "simulation"
    feasibility_margin: Literal["half_width", "mean_only"] = "half_width"
    service_policy: ServicePolicy = "exponential"
    nonmonotone_lookahead: int = Field(default=3, ge=0)
    max_containers: int = Field(default=DEFAULT_MAX_CONTAINERS, ge=1)
    n_jobs: int = 1

    @property
    def master_seed(self) -> int:
        return self.sim_params.seed


class EvaluationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    class_id: str
    vm_type: str
    vms: int
    containers: int
    estimate: SimEstimate
    feasible: bool
    converged: bool = True


def derive_seed(master_seed: int, class_id: str, vm_type: str) -> int:
    """Stable per-(class, type) seed, independent of execution order."""
    digest = hashlib.blake2b(
        f"{master_seed}:{class_id}:{vm_type}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def is_feasible(estimate: SimEstimate, deadline: float, margin: str) -> bool:
    predicted = estimate.mean_response
    if margin == "half_width":
        predicted += estimate.half_width
    # NaN compares False, so an empty estimate is infeasible
    return predicted <= deadline


class EvaluationCache:
    """Memo of evaluation records shared by concurrent class searches."""

    def __init__(self) -> None:
        self._records: Dict[CacheKey, EvaluationRecord] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: CacheKey) -> Optional[EvaluationRecord]:
        with self._lock:
            record = self._records.get(key)
            if record is None:
                self.misses += 1
            else:
                self.hits += 1
            return record

    def put(self, key: CacheKey, record: EvaluationRecord) -> None:
        with self._lock:
            self._records[key] = record

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


class Evaluator:
    """Predicts the mean response time of a sized cluster and checks the deadline.

    The simulation backend reuses one seed per (class, type) for every fleet
    size, so neighbouring sizes see common random numbers.
    """

    def __init__(self, config: OptimizerConfig, cache: Optional[EvaluationCache] = None):
        self.config = config
        self.cache = cache if cache is not None else EvaluationCache()

    def predict(self, app_class: ApplicationClass, vm_type: VmType, vms: int, seed: int) -> SimEstimate:
        profile = app_class.profiles[vm_type.id]
        containers = vms * vm_type.containers
        if self.config.evaluator == "analytic":
            mean = t_approx(demand(profile), containers, app_class.h_users, app_class.think_time)
            return SimEstimate(mean_response=mean, half_width=0.0, completions=0, converged=True)

        spec = build_network(
            profile,
            capacity=containers,
            h_users=app_class.h_users,
            think_time=app_class.think_time,
            service_policy=self.config.service_policy,
            seed=seed,
        )
        params = self.config.sim_params.model_copy(update={"seed": seed})
        estimate = estimate_response_time(spec, params)
        if not estimate.converged and estimate.events >= params.max_events:
            raise SimulationAbortedError(
                f"simulation of class '{app_class.id}' on {vms} x {vm_type.id} hit the cap of "
                f"{params.max_events} events after {estimate.completions} completions",
                events=estimate.events,
            )
        return estimate

    def evaluate(self, app_class: ApplicationClass, vm_type: VmType, vms: int) -> EvaluationRecord:
        if vms < 1:
            raise ValueError(f"vms must be >= 1, got {vms}")
        seed = derive_seed(self.config.master_seed, app_class.id, vm_type.id)
        key: CacheKey = (app_class.id, vm_type.id, vms, seed)
        if self.config.cache_enabled:
            cached = self.cache.get(key)
            if cached is not None:
                return cached

        estimate = self.predict(app_class, vm_type, vms, seed)
        record = EvaluationRecord(
            class_id=app_class.id,
            vm_type=vm_type.id,
            vms=vms,
            containers=vms * vm_type.containers,
            estimate=estimate,
            feasible=is_feasible(estimate, app_class.deadline, self.config.feasibility_margin),
        )
        logger.debug(
            f"[{app_class.id}] {vms} x {vm_type.id}: T={estimate.mean_response:.2f} ms "
            f"(+/- {estimate.half_width:.2f}) vs D={app_class.deadline:.2f} -> "
            f"{'feasible' if record.feasible else 'infeasible'}"
        )
        if self.config.cache_enabled:
            self.cache.put(key, record)
        return record


def evaluate(
    app_class: ApplicationClass,
    vm_type: VmType,
    vms: int,
    config: OptimizerConfig,
    cache: Optional[EvaluationCache] = None,
) -> EvaluationRecord:
    return Evaluator(config, cache).evaluate(app_class, vm_type, vms)
