# tests/conftest.py
from pathlib import Path
from typing import Dict, Optional

import pytest

from src.models.objects import ApplicationClass, JobProfile, Problem, VmType
from src.optimization.evaluator import OptimizerConfig
from src.simulation.network import SimParams

DATA_DIR = Path(__file__).parent / "data"


def make_profile(n_map=4, n_reduce=2, map_avg=100.0, reduce_avg=150.0, shuffle=50.0, **extra) -> JobProfile:
    return JobProfile(
        n_map=n_map,
        n_reduce=n_reduce,
        map_avg=map_avg,
        reduce_avg=reduce_avg,
        shuffle_typ_avg=shuffle,
        **extra,
    )


def make_vm(vm_id="small", containers=4, sigma="0.1", pi="0.2") -> VmType:
    return VmType(id=vm_id, containers=containers, sigma=sigma, pi=pi)


def make_class(
    class_id="c1",
    h_users=1,
    think_time=0.0,
    deadline=400.0,
    eta=0.0,
    profiles: Optional[Dict[str, JobProfile]] = None,
) -> ApplicationClass:
    return ApplicationClass(
        id=class_id,
        h_users=h_users,
        think_time=think_time,
        deadline=deadline,
        spot_fraction_cap=eta,
        profiles=profiles if profiles is not None else {"small": make_profile()},
    )


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def small_vm() -> VmType:
    return make_vm()


@pytest.fixture
def two_type_problem() -> Problem:
    """Map-only class where 6 small VMs (1.2/h) beat 2 large ones (1.4/h)."""
    profile = make_profile(n_map=24, n_reduce=0, map_avg=100.0, reduce_avg=0.0, shuffle=0.0)
    return Problem(
        catalog=[
            make_vm("small", containers=4, sigma="0.1", pi="0.2"),
            make_vm("large", containers=20, sigma="0.35", pi="0.7"),
        ],
        classes=[make_class("c1", deadline=100.0, profiles={"small": profile, "large": profile})],
    )


@pytest.fixture
def analytic_config() -> OptimizerConfig:
    return OptimizerConfig(evaluator="analytic", sim_params=SimParams(seed=42))


@pytest.fixture
def fast_sim_params() -> SimParams:
    return SimParams(seed=3, warmup_jobs=20, batch_size=20, min_batches=5, max_batches=30,
                     target_rel_half_width=0.05)
