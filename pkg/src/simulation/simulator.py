# src/simulation/simulator.py
"""Event-driven simulation of the closed fork-join network of one class.

Users alternate between thinking and waiting for a job. A submitted job forks
into map tasks that queue for the finite capacity region (FCR); when every map
task has released its container, the job forks into reduce tasks that queue
for the same region with priority over map tasks. The job completes when its
last reduce task releases its container.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Deque, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import SimulationAbortedError
from src.simulation.network import NetworkSpec, SimParams, sample

logger = logging.getLogger(__name__)

# Event kinds, also used as the event_kind column of the trace
SUBMIT = "submit"
ADMIT = "admit"
MAP_DONE = "map_done"
REDUCE_DONE = "reduce_done"
JOB_DONE = "job_done"

TRACE_COLUMNS = ["time_ms", "event_kind", "job_id", "task_kind", "busy_containers"]


class TraceRecord(NamedTuple):
    time_ms: float
    event_kind: str
    job_id: int
    task_kind: str
    busy_containers: int


@dataclass
class _Job:
    job_id: int
    user: int
    submitted: float
    maps_left: int
    reduces_left: int


TraceHook = Callable[[TraceRecord, "ClosedNetworkSimulator"], None]


def spawn_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """One independent stream each for think, map service and reduce service."""
    think_seq, map_seq, reduce_seq = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(think_seq),
        np.random.default_rng(map_seq),
        np.random.default_rng(reduce_seq),
    )


class ClosedNetworkSimulator:
    """Sequential simulator owning its event list and random streams.

    Events at equal times are processed in insertion order.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        seed: int,
        max_events: int = 50_000_000,
        trace_hook: Optional[TraceHook] = None,
    ):
        self.spec = spec
        self.max_events = max_events
        self.trace_hook = trace_hook
        self._think_rng, self._map_rng, self._reduce_rng = spawn_streams(seed)
        self._think_dist = spec.think_distribution

        self.now = 0.0
        self.busy = 0
        self.thinking = spec.h_users
        self.active_jobs: Dict[int, _Job] = {}
        self.responses: List[float] = []
        self.events_processed = 0

        self._events: List[Tuple[float, int, str, int]] = []
        self._sequence = itertools.count()
        self._job_ids = itertools.count()
        self._reduce_queue: Deque[int] = deque()
        self._map_queue: Deque[int] = deque()

        for user in range(spec.h_users):
            self._schedule(self._think(), SUBMIT, user)

    @property
    def waiting_reduce_tasks(self) -> int:
        return len(self._reduce_queue)

    @property
    def waiting_map_tasks(self) -> int:
        return len(self._map_queue)

    def _schedule(self, time: float, kind: str, payload: int) -> None:
        heapq.heappush(self._events, (time, next(self._sequence), kind, payload))

    def _think(self) -> float:
        if self._think_dist is None:
            return 0.0
        return sample(self._think_dist, self._think_rng)

    def _trace(self, kind: str, job_id: int, task_kind: str) -> None:
        if self.trace_hook is not None:
            self.trace_hook(TraceRecord(self.now, kind, job_id, task_kind, self.busy), self)

    def _admit(self) -> None:
        capacity = self.spec.capacity
        while self.busy < capacity and (self._reduce_queue or self._map_queue):
            if self._reduce_queue:
                job_id = self._reduce_queue.popleft()
                duration = sample(self.spec.reduce_service, self._reduce_rng)  # type: ignore[arg-type]
                kind, task_kind = REDUCE_DONE, "reduce"
            else:
                job_id = self._map_queue.popleft()
                duration = sample(self.spec.map_service, self._map_rng)
                kind, task_kind = MAP_DONE, "map"
            self.busy += 1
            self._schedule(self.now + duration, kind, job_id)
            self._trace(ADMIT, job_id, task_kind)

    def _submit(self, user: int) -> None:
        job_id = next(self._job_ids)
        self.thinking -= 1
        self.active_jobs[job_id] = _Job(
            job_id=job_id,
            user=user,
            submitted=self.now,
            maps_left=self.spec.n_map,
            reduces_left=self.spec.n_reduce,
        )
        self._trace(SUBMIT, job_id, "")
        self._map_queue.extend([job_id] * self.spec.n_map)
        self._admit()

    def _complete(self, job: _Job) -> None:
        del self.active_jobs[job.job_id]
        self.responses.append(self.now - job.submitted)
        self.thinking += 1
        self._trace(JOB_DONE, job.job_id, "")
        self._schedule(self.now + self._think(), SUBMIT, job.user)

    def _map_done(self, job_id: int) -> None:
        self.busy -= 1
        self._trace(MAP_DONE, job_id, "map")
        job = self.active_jobs[job_id]
        job.maps_left -= 1
        if job.maps_left == 0:
            # map join and reduce fork sit outside the FCR
            if self.spec.n_reduce == 0:
                self._complete(job)
            else:
                self._reduce_queue.extend([job_id] * self.spec.n_reduce)
        self._admit()

    def _reduce_done(self, job_id: int) -> None:
        self.busy -= 1
        self._trace(REDUCE_DONE, job_id, "reduce")
        job = self.active_jobs[job_id]
        job.reduces_left -= 1
        if job.reduces_left == 0:
            self._complete(job)
        self._admit()

    def step(self) -> None:
        """Processes the next event."""
        if self.events_processed >= self.max_events:
            raise SimulationAbortedError(
                f"event cap of {self.max_events} reached after "
                f"{len(self.responses)} job completions",
                partial=self.responses,
                events=self.events_processed,
            )
        time, _, kind, payload = heapq.heappop(self._events)
        self.now = time
        self.events_processed += 1
        if kind == SUBMIT:
            self._submit(payload)
        elif kind == MAP_DONE:
            self._map_done(payload)
        else:
            self._reduce_done(payload)

    def run_until(self, completions: int) -> List[float]:
        """Advances until at least ``completions`` jobs have finished."""
        while len(self.responses) < completions:
            self.step()
        return self.responses


def run_replication(
    spec: NetworkSpec,
    params: SimParams,
    completions: Optional[int] = None,
    trace_hook: Optional[TraceHook] = None,
) -> List[float]:
    """Returns the submit-to-complete times of the first ``completions`` jobs.

    Defaults to the warm-up plus the largest number of batches ``params`` allows.
    """
    target = params.max_completions if completions is None else completions
    simulator = ClosedNetworkSimulator(
        spec, seed=params.seed, max_events=params.max_events, trace_hook=trace_hook
    )
    responses = simulator.run_until(target)
    logger.debug(
        f"Replication finished: {len(responses)} jobs, {simulator.events_processed} events"
    )
    return list(responses[:target])


class TraceRecorder:
    """Collects trace records in memory and writes them as tab-separated text."""

    def __init__(self) -> None:
        self.records: List[TraceRecord] = []

    def __call__(self, record: TraceRecord, simulator: ClosedNetworkSimulator) -> None:
        self.records.append(record)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=TRACE_COLUMNS)

    def write(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, sep="\t", index=False)
        logger.info(f"Wrote {len(self.records)} trace records to {path}")
