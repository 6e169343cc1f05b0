# tests/test_hill_climbing.py
import random
from decimal import Decimal

import pytest

from src.analytic.bounds import demand, t_approx
from src.errors import DomainError
from src.optimization.evaluator import EvaluationRecord, Evaluator, OptimizerConfig
from src.optimization.hill_climbing import hill_climb
from src.optimization.optimizer import start_vms
from src.simulation.network import SimEstimate, SimParams
from tests.conftest import make_class, make_profile, make_vm

SINGLE = make_vm("single", containers=1)


class _TableEvaluator:
    """Feasibility read from a fixed set of fleet sizes."""

    def __init__(self, feasible_sizes):
        self.feasible_sizes = set(feasible_sizes)
        self.seen = []

    def evaluate(self, app_class, vm_type, vms):
        self.seen.append(vms)
        feasible = vms in self.feasible_sizes
        return EvaluationRecord(
            class_id=app_class.id,
            vm_type=vm_type.id,
            vms=vms,
            containers=vms * vm_type.containers,
            estimate=SimEstimate(mean_response=100.0 if feasible else 500.0, half_width=0.0,
                                 completions=0, converged=True),
            feasible=feasible,
        )


def _single_class(deadline):
    return make_class(deadline=deadline, profiles={"single": make_profile()})


class TestAnalyticExamples:

    def test_climbs_to_feasibility(self, analytic_config):
        record = hill_climb(_single_class(400.0), SINGLE, 1, analytic_config)
        assert (record.vms, record.feasible, record.converged) == (2, True, True)

    def test_minimal_start_is_a_fixed_point(self, analytic_config):
        record = hill_climb(_single_class(400.0), SINGLE, 2, analytic_config)
        assert record.vms == 2

    def test_descends_from_oversized_start(self, analytic_config):
        assert hill_climb(_single_class(400.0), SINGLE, 17, analytic_config).vms == 2

    def test_unreachable_deadline_gives_up(self, analytic_config):
        config = analytic_config.model_copy(update={"max_hc_steps": 20})
        record = hill_climb(_single_class(250.0), SINGLE, 3, config)
        assert record.vms == 23
        assert not record.converged
        assert not record.feasible

    def test_rejects_empty_start(self, analytic_config):
        with pytest.raises(DomainError):
            hill_climb(_single_class(400.0), SINGLE, 0, analytic_config)

    def test_progress_reports_every_size(self, analytic_config):
        calls = []
        hill_climb(_single_class(400.0), SINGLE, 1, analytic_config,
                   progress=lambda *args: calls.append(args))
        assert calls == [
            ("c1", "single", 1, False, Decimal("0.2")),
            ("c1", "single", 2, True, Decimal("0.4")),
        ]


class TestNonMonotoneFeasibility:

    def test_resumes_below_an_infeasible_gap(self, analytic_config):
        table = _TableEvaluator({2, 3, 5, 6, 7, 8})
        record = hill_climb(_single_class(400.0), SINGLE, 8, analytic_config, evaluator=table)
        assert record.vms == 2

    def test_zero_lookahead_stops_at_the_gap(self, analytic_config):
        config = analytic_config.model_copy(update={"nonmonotone_lookahead": 0})
        table = _TableEvaluator({2, 3, 5, 6, 7, 8})
        assert hill_climb(_single_class(400.0), SINGLE, 8, config, evaluator=table).vms == 5

    def test_gap_wider_than_lookahead(self, analytic_config):
        table = _TableEvaluator({1, 6, 7})
        record = hill_climb(_single_class(400.0), SINGLE, 7, analytic_config, evaluator=table)
        assert record.vms == 6
        assert table.seen[-1] == 6


def _brute_force_minimum(summary, containers_per_vm, h_users, think_time, deadline, limit=50):
    for vms in range(1, limit + 1):
        if t_approx(summary, vms * containers_per_vm, h_users, think_time) <= deadline:
            return vms
    return None


def test_matches_brute_force_under_analytic_evaluator(analytic_config):
    rng = random.Random(2024)
    for _ in range(100):
        profile = make_profile(
            n_map=rng.randint(1, 120),
            n_reduce=rng.randint(0, 30),
            map_avg=float(rng.randint(10, 400)),
            reduce_avg=float(rng.randint(0, 300)),
            shuffle=float(rng.randint(0, 80)),
        )
        vm = make_vm("vm", containers=rng.randint(1, 8))
        h_users = rng.randint(1, 10)
        think_time = float(rng.randint(0, 3_000))
        summary = demand(profile)
        target = rng.randint(1, 50)
        deadline = t_approx(summary, target * vm.containers, h_users, think_time)
        app_class = make_class(h_users=h_users, think_time=think_time, deadline=deadline,
                               profiles={"vm": profile})

        expected = _brute_force_minimum(summary, vm.containers, h_users, think_time, deadline)
        for start in (start_vms(app_class, vm, analytic_config), rng.randint(1, 60)):
            record = hill_climb(app_class, vm, start, analytic_config)
            assert record.vms == expected, (profile, vm.containers, h_users, think_time, start)
            assert record.feasible and record.converged


def test_simulated_result_is_minimal_on_recheck():
    rng = random.Random(7)
    config = OptimizerConfig(
        sim_params=SimParams(seed=11, warmup_jobs=20, batch_size=20, min_batches=5,
                             max_batches=30, target_rel_half_width=0.05),
        max_hc_steps=60,
    )
    for _ in range(10):
        profile = make_profile(
            n_map=rng.randint(2, 8),
            n_reduce=rng.randint(0, 3),
            map_avg=float(rng.randint(50, 150)),
            reduce_avg=float(rng.randint(20, 100)),
            shuffle=float(rng.randint(0, 30)),
        )
        vm = make_vm("vm", containers=rng.randint(1, 4))
        app_class = make_class(
            h_users=rng.randint(1, 3),
            think_time=500.0,
            deadline=4.0 * demand(profile).min_service,
            profiles={"vm": profile},
        )
        record = hill_climb(app_class, vm, start_vms(app_class, vm, config), config)
        assert record.converged

        recheck = Evaluator(config)
        assert recheck.evaluate(app_class, vm, record.vms).feasible
        if record.vms > 1:
            assert not recheck.evaluate(app_class, vm, record.vms - 1).feasible
