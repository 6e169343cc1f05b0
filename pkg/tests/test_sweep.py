# tests/test_sweep.py
from decimal import Decimal

import pytest
from pydantic import ValidationError

from src.models.objects import Problem
from src.optimization.evaluator import Evaluator
from src.reporting.sweep import SWEEP_COLUMNS, SweepSpec, run_sweep, write_csv
from tests.conftest import make_class, make_profile, make_vm


@pytest.fixture
def crossover_problem() -> Problem:
    """Small VMs are cheaper per container but their tasks run slower."""
    return Problem(
        catalog=[
            make_vm("small", containers=4, sigma="0.1", pi="0.2"),
            make_vm("large", containers=20, sigma="0.6", pi="1.2"),
        ],
        classes=[make_class("q", deadline=8_000.0, profiles={
            "small": make_profile(n_map=40, n_reduce=0, map_avg=1_000.0, reduce_avg=0.0, shuffle=0.0),
            "large": make_profile(n_map=40, n_reduce=0, map_avg=900.0, reduce_avg=0.0, shuffle=0.0),
        })],
    )


def _spec(problem, axis="deadline", values=(950, 2_000, 4_000, 8_000, 20_000)):
    return SweepSpec(base_problem=problem, axis=axis, class_id="q", values=list(values))


class TestDeadlineSweep:

    def test_costs_fall_as_deadlines_loosen(self, crossover_problem, analytic_config):
        frame = run_sweep(_spec(crossover_problem), analytic_config, show_progress=False)
        assert list(frame["hourly_cost"]) == ["2.4000", "1.0000", "0.6000", "0.4000", "0.2000"]
        costs = [Decimal(c) for c in frame["hourly_cost"]]
        assert all(a >= b for a, b in zip(costs, costs[1:]))

    def test_large_vms_win_below_a_deadline_threshold(self, crossover_problem, analytic_config):
        frame = run_sweep(_spec(crossover_problem), analytic_config, show_progress=False)
        assert list(frame["vm_type"]) == ["large", "small", "small", "small", "small"]

        for deadline, chosen in zip(frame["axis_value"], frame["vm_type"]):
            # records are cached per class id, so each deadline gets its own evaluator
            evaluator = Evaluator(analytic_config)
            app_class = crossover_problem.classes[0].with_updates(deadline=float(deadline))
            costs = {}
            for vm in crossover_problem.catalog:
                sizes = [n for n in range(1, 101) if evaluator.evaluate(app_class, vm, n).feasible]
                if sizes:
                    costs[vm.id] = vm.pi * sizes[0]
            assert min(costs, key=costs.get) == chosen

    def test_rows_follow_the_axis(self, crossover_problem, analytic_config):
        values = [20_000, 8_000, 4_000]
        frame = run_sweep(_spec(crossover_problem, values=values), analytic_config, show_progress=False)
        assert list(frame.columns) == SWEEP_COLUMNS
        assert list(frame["axis_value"]) == values
        assert list(frame["feasible"]) == ["true"] * 3

    def test_unsolvable_value_is_recorded_and_the_sweep_continues(self, crossover_problem,
                                                                 analytic_config):
        frame = run_sweep(_spec(crossover_problem, values=[-5, 20_000]), analytic_config,
                          show_progress=False)
        assert list(frame["feasible"]) == ["false", "true"]
        assert frame.iloc[0]["vm_type"] == ""


def test_cost_grows_with_users(crossover_problem, analytic_config):
    problem = crossover_problem.model_copy(update={"classes": [
        crossover_problem.classes[0].with_updates(think_time=1_000.0)
    ]})
    frame = run_sweep(_spec(problem, axis="h_users", values=[1, 2, 4, 8, 16]), analytic_config,
                      show_progress=False)
    costs = [Decimal(c) for c in frame["hourly_cost"]]
    assert all(a <= b for a, b in zip(costs, costs[1:]))
    assert costs[-1] > costs[0]


def test_csv_has_one_exact_header(crossover_problem, analytic_config, tmp_path):
    frame = run_sweep(_spec(crossover_problem, values=[8_000, 20_000]), analytic_config,
                      show_progress=False)
    path = tmp_path / "sweep.csv"
    text = write_csv(frame, path)
    lines = path.read_text().splitlines()
    assert text == path.read_text()
    assert lines[0] == "axis_value,vm_type,vms,reserved,spot,hourly_cost,predicted_time_ms,feasible"
    assert lines[1] == "8000,small,2,2,0,0.4000,5000.0000,true"
    assert len(lines) == 3


@pytest.mark.parametrize("changes", [
    {"values": []},
    {"values": [1_000, 3_000, 2_000]},
    {"values": [1_000, 1_000]},
    {"class_id": "missing"},
    {"axis": "h_users", "values": [1.5, 2]},
])
def test_invalid_sweep_spec(crossover_problem, changes):
    fields = dict(base_problem=crossover_problem, axis="deadline", class_id="q", values=[1_000, 2_000])
    fields.update(changes)
    with pytest.raises(ValidationError):
        SweepSpec(**fields)
