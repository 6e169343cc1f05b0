# tests/test_evaluator.py
import math

import pytest

from src.errors import SimulationAbortedError
from src.optimization import evaluator as evaluator_module
from src.optimization.evaluator import (
    EvaluationCache,
    Evaluator,
    OptimizerConfig,
    derive_seed,
    evaluate,
    is_feasible,
)
from src.simulation.network import SimEstimate, SimParams
from tests.conftest import make_class, make_profile, make_vm

DUO = make_vm("duo", containers=2)


def _class(deadline: float):
    return make_class(think_time=10_000.0, deadline=deadline, profiles={"duo": make_profile()})


@pytest.fixture
def deterministic_config() -> OptimizerConfig:
    return OptimizerConfig(service_policy="deterministic", sim_params=SimParams(seed=5))


class TestEvaluate:

    def test_deterministic_network_meets_loose_deadline(self, deterministic_config):
        record = evaluate(_class(500.0), DUO, 1, deterministic_config)
        assert record.feasible
        assert record.containers == 2
        assert record.estimate.mean_response == pytest.approx(400.0, abs=1e-6)

    def test_deterministic_network_misses_tight_deadline(self, deterministic_config):
        assert not evaluate(_class(399.0), DUO, 1, deterministic_config).feasible

    def test_repeated_call_hits_the_cache(self, deterministic_config, mocker):
        spy = mocker.spy(evaluator_module, "estimate_response_time")
        evaluator = Evaluator(deterministic_config)
        first = evaluator.evaluate(_class(500.0), DUO, 1)
        second = evaluator.evaluate(_class(500.0), DUO, 1)
        assert first == second
        assert spy.call_count == 1
        assert (evaluator.cache.hits, evaluator.cache.misses) == (1, 1)

    def test_disabled_cache_simulates_again(self, deterministic_config, mocker):
        spy = mocker.spy(evaluator_module, "estimate_response_time")
        config = deterministic_config.model_copy(update={"cache_enabled": False})
        evaluator = Evaluator(config)
        evaluator.evaluate(_class(500.0), DUO, 1)
        evaluator.evaluate(_class(500.0), DUO, 1)
        assert spy.call_count == 2
        assert len(evaluator.cache) == 0

    def test_shared_cache_across_calls(self, deterministic_config, mocker):
        spy = mocker.spy(evaluator_module, "estimate_response_time")
        cache = EvaluationCache()
        evaluate(_class(500.0), DUO, 1, deterministic_config, cache)
        evaluate(_class(500.0), DUO, 1, deterministic_config, cache)
        assert spy.call_count == 1

    def test_analytic_evaluator(self, analytic_config):
        single = make_vm("single", containers=1)
        app_class = make_class(deadline=400.0, profiles={"single": make_profile()})
        record = evaluate(app_class, single, 2, analytic_config)
        assert record.estimate == SimEstimate(mean_response=400.0, half_width=0.0,
                                              completions=0, converged=True)
        assert record.feasible
        assert not evaluate(app_class, single, 1, analytic_config).feasible

    def test_event_cap_propagates_with_context(self):
        config = OptimizerConfig(service_policy="deterministic",
                                 sim_params=SimParams(seed=5, max_events=30))
        with pytest.raises(SimulationAbortedError, match="'c1' on 1 x duo"):
            evaluate(_class(500.0), DUO, 1, config)

    def test_needs_at_least_one_vm(self, analytic_config):
        with pytest.raises(ValueError):
            evaluate(_class(500.0), DUO, 0, analytic_config)


class TestFeasibility:

    def test_half_width_margin_is_conservative(self):
        estimate = SimEstimate(mean_response=390.0, half_width=20.0, completions=100, converged=True)
        assert not is_feasible(estimate, 400.0, "half_width")
        assert is_feasible(estimate, 400.0, "mean_only")

    def test_boundary_is_feasible(self):
        estimate = SimEstimate(mean_response=400.0, half_width=0.0, completions=1, converged=True)
        assert is_feasible(estimate, 400.0, "half_width")

    def test_empty_estimate_is_infeasible(self):
        estimate = SimEstimate(mean_response=math.nan, half_width=math.inf, completions=0,
                               converged=False)
        assert not is_feasible(estimate, 1e12, "mean_only")


class TestDeriveSeed:

    def test_stable(self):
        assert derive_seed(42, "c1", "small") == derive_seed(42, "c1", "small")

    def test_distinct_per_pair(self):
        seeds = {derive_seed(42, c, t) for c in ("c1", "c2") for t in ("small", "large")}
        assert len(seeds) == 4
        assert derive_seed(43, "c1", "small") != derive_seed(42, "c1", "small")

    def test_fits_sixty_four_bits(self):
        assert 0 <= derive_seed(2**63, "x", "y") < 2**64
