# src/analytic/repairman.py
"""Exact solution of the closed single-station (machine-repairman) network.

H users think for an exponential time with mean Z, then queue for one of c
exponential servers with mean service time S. The number of jobs at the
station is a birth-death chain, solved here directly; Mean Value Analysis
gives the same answer for c = 1 and serves as a cross-check.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class RepairmanMetrics(NamedTuple):
    response_time: float
    throughput: float
    mean_jobs: float
    utilization: float


def machine_repairman(
    h_users: int, think_time: float, service_time: float, servers: int
) -> RepairmanMetrics:
    """Steady-state metrics of the birth-death chain over 0..H jobs at the station."""
    if h_users < 1 or servers < 1:
        raise ValueError("h_users and servers must be >= 1")
    if service_time <= 0:
        raise ValueError("service_time must be positive")
    if think_time == 0:
        # all users always at the station
        busy = min(h_users, servers)
        throughput = busy / service_time
        return RepairmanMetrics(h_users / throughput, throughput, float(h_users), busy / servers)

    think_rate = 1.0 / think_time
    service_rate = 1.0 / service_time
    # unnormalized log-probabilities keep large H stable
    log_p = np.zeros(h_users + 1)
    for n in range(1, h_users + 1):
        birth = (h_users - n + 1) * think_rate
        death = min(n, servers) * service_rate
        log_p[n] = log_p[n - 1] + math.log(birth) - math.log(death)
    p = np.exp(log_p - log_p.max())
    p /= p.sum()

    jobs = np.arange(h_users + 1)
    busy = np.minimum(jobs, servers)
    throughput = float((p * busy).sum() * service_rate)
    mean_jobs = float((p * jobs).sum())
    return RepairmanMetrics(
        response_time=mean_jobs / throughput,
        throughput=throughput,
        mean_jobs=mean_jobs,
        utilization=float((p * busy).sum() / servers),
    )


def mva_single_server(h_users: int, think_time: float, service_time: float) -> float:
    """Exact MVA recursion for one queueing station plus a delay station."""
    queue = 0.0
    response = 0.0
    for n in range(1, h_users + 1):
        response = service_time * (1.0 + queue)
        throughput = n / (response + think_time)
        queue = throughput * response
    return response
