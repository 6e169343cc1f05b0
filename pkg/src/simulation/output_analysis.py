# src/simulation/output_analysis.py
"""Batch-means estimation of the mean job response time."""

from __future__ import annotations

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from src.errors import SimulationAbortedError
from src.simulation.network import NetworkSpec, SimEstimate, SimParams
from src.simulation.simulator import ClosedNetworkSimulator

logger = logging.getLogger(__name__)


def batch_means_interval(batch_means: Sequence[float], confidence: float) -> Tuple[float, float]:
    """Student-t interval over batch means; returns (grand mean, half-width)."""
    values = np.asarray(batch_means, dtype=float)
    n = len(values)
    grand_mean = float(values.mean())
    if n < 2:
        return grand_mean, math.inf
    std = float(values.std(ddof=1))
    quantile = float(stats.t.ppf(0.5 + confidence / 2.0, df=n - 1))
    return grand_mean, quantile * std / math.sqrt(n)


def _precise_enough(mean: float, half_width: float, target: float) -> bool:
    if mean <= 0:
        return half_width == 0
    return half_width / mean <= target


def estimate_response_time(spec: NetworkSpec, params: SimParams) -> SimEstimate:
    """Simulates ``spec`` until the relative half-width target or the batch cap.

    The first ``warmup_jobs`` completions are discarded. The same seed always
    yields the same estimate.
    """
    simulator = ClosedNetworkSimulator(spec, seed=params.seed, max_events=params.max_events)
    batch_means: List[float] = []
    mean, half_width = math.nan, math.inf
    converged = False

    try:
        simulator.run_until(params.warmup_jobs)
        while len(batch_means) < params.max_batches:
            end = params.warmup_jobs + (len(batch_means) + 1) * params.batch_size
            responses = simulator.run_until(end)
            batch_means.append(float(np.mean(responses[end - params.batch_size:end])))
            if len(batch_means) >= params.min_batches:
                mean, half_width = batch_means_interval(batch_means, params.confidence)
                if _precise_enough(mean, half_width, params.target_rel_half_width):
                    converged = True
                    break
    except SimulationAbortedError as exc:
        logger.warning(f"Simulation aborted, reporting a non-converged estimate: {exc}")

    if len(batch_means) >= 2:
        mean, half_width = batch_means_interval(batch_means, params.confidence)
    else:
        observed = simulator.responses[params.warmup_jobs:] or simulator.responses
        mean = float(np.mean(observed)) if observed else math.nan
        half_width = math.inf

    if not converged:
        logger.warning(
            f"Estimate did not reach {params.target_rel_half_width:.1%} relative half-width "
            f"after {len(batch_means)} batches (mean={mean:.2f} ms, half-width={half_width:.2f} ms)"
        )

    return SimEstimate(
        mean_response=mean,
        half_width=half_width,
        completions=len(simulator.responses),
        converged=converged,
        batches=len(batch_means),
        events=simulator.events_processed,
    )
