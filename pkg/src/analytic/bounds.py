# src/analytic/bounds.py
"""Closed-form response-time bound used to seed the local search.

The bound is the larger of the single-job wave time and the balanced
closed-network throughput bound H * W / c - Z. It is nonincreasing in the
number of containers c, which lets the initial allocation be found by
doubling followed by bisection.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict

from src.models.objects import JobProfile

logger = logging.getLogger(__name__)

DEFAULT_MAX_CONTAINERS = 10**6


class DemandSummary(BaseModel):
    """Aggregate container work of one job and its full-parallelism floor."""

    model_config = ConfigDict(frozen=True)

    total_work: float
    min_service: float
    n_map: int
    n_reduce: int
    map_time: float
    reduce_time: float

    def wave_time(self, containers: int) -> float:
        """Single-job makespan when each stage runs in ceil(n / c) waves."""
        waves = math.ceil(self.n_map / containers) * self.map_time
        if self.n_reduce > 0:
            waves += math.ceil(self.n_reduce / containers) * self.reduce_time
        return waves

    def wave_factor(self, containers: int) -> float:
        return self.wave_time(containers) / self.min_service


class InitialAllocation(NamedTuple):
    containers: int
    feasible: bool


def demand(profile: JobProfile) -> DemandSummary:
    reduce_time = profile.reduce_avg + profile.shuffle_typ_avg
    total_work = profile.n_map * profile.map_avg + profile.n_reduce * reduce_time
    min_service = profile.map_avg + (reduce_time if profile.n_reduce >= 1 else 0.0)
    return DemandSummary(
        total_work=total_work,
        min_service=min_service,
        n_map=profile.n_map,
        n_reduce=profile.n_reduce,
        map_time=profile.map_avg,
        reduce_time=reduce_time,
    )


def t_approx(summary: DemandSummary, containers: int, h_users: int, think_time: float) -> float:
    """Approximate mean response time with ``containers`` task slots."""
    if containers < 1:
        raise ValueError(f"containers must be >= 1, got {containers}")
    wave_bound = summary.wave_time(containers)
    throughput_bound = h_users * summary.total_work / containers - think_time
    return max(wave_bound, throughput_bound)


def initial_containers(
    summary: DemandSummary,
    h_users: int,
    think_time: float,
    deadline: float,
    max_containers: int = DEFAULT_MAX_CONTAINERS,
) -> InitialAllocation:
    """Smallest container count whose bound meets ``deadline``.

    Returns ``max_containers`` flagged infeasible when even that is too few.
    """

    def meets(c: int) -> bool:
        return t_approx(summary, c, h_users, think_time) <= deadline

    if not meets(max_containers):
        logger.debug(
            f"Deadline {deadline} ms unreachable under the analytic bound "
            f"(floor {summary.min_service} ms)"
        )
        return InitialAllocation(max_containers, False)

    upper = 1
    while not meets(upper):
        upper = min(upper * 2, max_containers)
    lower = upper // 2  # infeasible, or 0 when upper == 1
    while upper - lower > 1:
        middle = (lower + upper) // 2
        if meets(middle):
            upper = middle
        else:
            lower = middle
    return InitialAllocation(upper, True)
