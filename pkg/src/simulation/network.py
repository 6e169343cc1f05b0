# src/simulation/network.py
"""Closed fork-join network description and its service-time distributions."""

from __future__ import annotations

import logging
import math
from typing import Literal, Optional, Protocol, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import ConfigurationError
from src.models.objects import JobProfile

logger = logging.getLogger(__name__)

DistributionKind = Literal["deterministic", "exponential", "empirical"]
ServicePolicy = Literal["exponential", "empirical", "deterministic"]


class RandomStream(Protocol):
    def random(self) -> float: ...

    def integers(self, high: int) -> int: ...


class ServiceDistribution(BaseModel):
    """Service or think time law; empirical draws uniformly with replacement."""

    model_config = ConfigDict(frozen=True)

    kind: DistributionKind
    mean: float = 0.0
    samples: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "ServiceDistribution":
        if self.kind == "empirical":
            if not self.samples:
                raise ValueError("empirical distribution needs a non-empty sample list")
        elif self.mean <= 0:
            raise ValueError(f"mean must be > 0, got {self.mean}")
        return self

    @classmethod
    def deterministic(cls, value: float) -> "ServiceDistribution":
        return cls(kind="deterministic", mean=value)

    @classmethod
    def exponential(cls, mean: float) -> "ServiceDistribution":
        return cls(kind="exponential", mean=mean)

    @classmethod
    def empirical(cls, samples) -> "ServiceDistribution":
        values = tuple(float(s) for s in samples)
        return cls(kind="empirical", mean=float(np.mean(values)) if values else 0.0, samples=values)


def sample(dist: ServiceDistribution, stream: RandomStream) -> float:
    """Draws one duration from ``dist`` and advances ``stream``."""
    if dist.kind == "deterministic":
        return dist.mean
    if dist.kind == "exponential":
        # 1 - U[0,1) lies in (0,1], so the log is always finite
        u = 1.0 - stream.random()
        return -dist.mean * math.log(u)
    return dist.samples[int(stream.integers(len(dist.samples)))]


class NetworkSpec(BaseModel):
    """A fully instantiated closed network for one class on one cluster size."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    h_users: int = Field(ge=1)
    think_time: float = Field(ge=0.0, alias="think_time_ms")
    think_kind: Literal["exponential", "deterministic"] = "exponential"
    n_map: int = Field(ge=1)
    n_reduce: int = Field(default=0, ge=0)
    map_service: ServiceDistribution
    reduce_service: Optional[ServiceDistribution] = None
    capacity: int = Field(ge=1, alias="containers")

    @model_validator(mode="after")
    def _check_reduce_stage(self) -> "NetworkSpec":
        if self.n_reduce > 0 and self.reduce_service is None:
            raise ValueError("a reduce stage needs a reduce service distribution")
        return self

    @property
    def think_distribution(self) -> Optional[ServiceDistribution]:
        """None when users resubmit immediately."""
        if self.think_time == 0:
            return None
        if self.think_kind == "deterministic":
            return ServiceDistribution.deterministic(self.think_time)
        return ServiceDistribution.exponential(self.think_time)

    @property
    def is_single_stage_exponential(self) -> bool:
        return self.n_map == 1 and self.n_reduce == 0 and self.map_service.kind == "exponential"


class SimParams(BaseModel):
    """Output-analysis policy for one estimate."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=42, ge=0, lt=2**64)
    warmup_jobs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=50, ge=10)
    min_batches: int = Field(default=10, ge=2)
    max_batches: int = Field(default=200, ge=2)
    confidence: float = Field(default=0.95, gt=0.0, lt=1.0)
    target_rel_half_width: float = Field(default=0.05, gt=0.0)
    max_events: int = Field(default=50_000_000, ge=1)

    @model_validator(mode="after")
    def _check_batches(self) -> "SimParams":
        if self.min_batches > self.max_batches:
            raise ValueError("min_batches must not exceed max_batches")
        return self

    @property
    def max_completions(self) -> int:
        return self.warmup_jobs + self.batch_size * self.max_batches


class SimEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean_response: float
    half_width: float = Field(ge=0.0)
    completions: int
    converged: bool
    batches: int = 0
    events: int = 0

    @property
    def relative_half_width(self) -> float:
        return self.half_width / self.mean_response if self.mean_response > 0 else 0.0


def _resample_pairwise(
    first: Tuple[float, ...], second: Tuple[float, ...], rng: np.random.Generator
) -> Tuple[float, ...]:
    """Independently shuffles two sample lists and sums them element-wise.

    The shorter list is cycled up to the length of the longer one.
    """
    size = max(len(first), len(second))
    a = np.resize(rng.permutation(np.asarray(first, dtype=float)), size)
    b = np.resize(rng.permutation(np.asarray(second, dtype=float)), size)
    return tuple(float(x) for x in a + b)


def build_network(
    profile: JobProfile,
    capacity: int,
    h_users: int,
    think_time: float,
    service_policy: ServicePolicy = "exponential",
    seed: int = 0,
) -> NetworkSpec:
    """Instantiates the closed network of a class for ``capacity`` containers.

    The typical shuffle duration is folded into the reduce service time.
    """
    if capacity < 1:
        raise ConfigurationError(f"capacity must be >= 1, got {capacity}")

    reduce_mean = profile.reduce_avg + profile.shuffle_typ_avg
    reduce_service: Optional[ServiceDistribution] = None

    if service_policy in ("deterministic", "exponential"):
        if profile.map_avg <= 0:
            raise ConfigurationError(f"map service time must be > 0, got {profile.map_avg}")
        if profile.n_reduce > 0 and reduce_mean <= 0:
            raise ConfigurationError(f"reduce service time must be > 0, got {reduce_mean}")

    if service_policy == "empirical":
        if not profile.map_samples:
            raise ConfigurationError("empirical service policy requested but map_samples is missing")
        map_service = ServiceDistribution.empirical(profile.map_samples)
        if profile.n_reduce > 0:
            if not profile.reduce_samples:
                raise ConfigurationError(
                    "empirical service policy requested but reduce_samples is missing"
                )
            if profile.shuffle_samples:
                rng = np.random.default_rng(seed)
                combined = _resample_pairwise(profile.reduce_samples, profile.shuffle_samples, rng)
            else:
                combined = tuple(s + profile.shuffle_typ_avg for s in profile.reduce_samples)
            reduce_service = ServiceDistribution.empirical(combined)
    elif service_policy == "deterministic":
        map_service = ServiceDistribution.deterministic(profile.map_avg)
        if profile.n_reduce > 0:
            reduce_service = ServiceDistribution.deterministic(reduce_mean)
    elif service_policy == "exponential":
        map_service = ServiceDistribution.exponential(profile.map_avg)
        if profile.n_reduce > 0:
            reduce_service = ServiceDistribution.exponential(reduce_mean)
    else:
        raise ConfigurationError(f"unknown service policy '{service_policy}'")

    return NetworkSpec(
        h_users=h_users,
        think_time=think_time,
        n_map=profile.n_map,
        n_reduce=profile.n_reduce,
        map_service=map_service,
        reduce_service=reduce_service,
        capacity=capacity,
    )
