# tests/test_cli.py
import json

import pandas as pd
import pytest
from click.testing import CliRunner

from main import EXIT_INFEASIBLE, EXIT_INPUT_ERROR, EXIT_OK, cli
from src.serialization.problem_json import parse_solution


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def problem_path(data_dir):
    return str(data_dir / "example_problem.json")


class TestOptimize:

    def test_writes_a_complete_solution(self, runner, problem_path, tmp_path):
        output = tmp_path / "solution.json"
        result = runner.invoke(cli, ["-q", "optimize", "--input", problem_path, "--output", str(output),
                                     "--evaluator", "analytic"])
        assert result.exit_code == EXIT_OK, result.output
        solution = parse_solution(output.read_text())
        assert solution.status == "complete"
        assert solution.seed == 7
        assert [c.class_id for c in solution.per_class] == ["etl", "reports"]
        assert solution.per_class[0].vm_type == "small"

    def test_seed_flag_wins_and_runs_repeat_exactly(self, runner, problem_path, tmp_path):
        texts = []
        for run in range(2):
            output = tmp_path / f"solution-{run}.json"
            runner.invoke(cli, ["-q", "optimize", "--input", problem_path, "--output", str(output),
                                "--evaluator", "analytic", "--seed", "123"])
            texts.append(output.read_text())
        assert texts[0] == texts[1]
        assert json.loads(texts[0])["seed"] == 123

    def test_unreachable_deadline_exits_partial(self, runner, data_dir, tmp_path):
        document = json.loads((data_dir / "example_problem.json").read_text())
        document["classes"][0]["deadline_ms"] = 50
        source = tmp_path / "problem.json"
        source.write_text(json.dumps(document))
        output = tmp_path / "solution.json"
        result = runner.invoke(cli, ["-q", "optimize", "--input", str(source), "--output", str(output),
                                     "--evaluator", "analytic"])
        assert result.exit_code == EXIT_INFEASIBLE
        assert json.loads(output.read_text())["status"] == "partial"

    @pytest.mark.parametrize("text", ['{"vm_types": [', '{"vm_types": [], "classes": []}'])
    def test_bad_input_exits_with_input_error(self, runner, tmp_path, text):
        source = tmp_path / "problem.json"
        source.write_text(text)
        result = runner.invoke(cli, ["-q", "optimize", "--input", str(source)])
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_lenient_mode_accepts_unknown_fields(self, runner, data_dir, tmp_path):
        document = json.loads((data_dir / "example_problem.json").read_text())
        document["owner"] = "analytics team"
        source = tmp_path / "problem.json"
        source.write_text(json.dumps(document))
        args = ["-q", "optimize", "--input", str(source), "--output", str(tmp_path / "out.json"),
                "--evaluator", "analytic"]
        assert runner.invoke(cli, args).exit_code == EXIT_INPUT_ERROR
        assert runner.invoke(cli, args + ["--lenient"]).exit_code == EXIT_OK


def test_simulate_reports_the_exact_value(runner, data_dir, tmp_path):
    output = tmp_path / "report.json"
    trace = tmp_path / "trace.tsv"
    result = runner.invoke(cli, ["-q", "simulate", "--input", str(data_dir / "example_network.json"),
                                 "--output", str(output), "--trace", str(trace)])
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(output.read_text())
    assert report["seed"] == 11
    assert "exact_response_ms" in report
    assert report["mean_response_ms"] > 0
    assert not pd.read_csv(trace, sep="\t").empty


def test_sweep_writes_csv(runner, problem_path, tmp_path):
    output = tmp_path / "sweep.csv"
    result = runner.invoke(cli, ["-q", "sweep", "--input", problem_path, "--axis", "deadline",
                                 "--class", "etl", "--values", "100,200,400",
                                 "--output", str(output), "--evaluator", "analytic"])
    assert result.exit_code == EXIT_OK, result.output
    frame = pd.read_csv(output)
    assert list(frame["axis_value"]) == [100, 200, 400]


def test_sweep_rejects_non_monotone_values(runner, problem_path, tmp_path):
    result = runner.invoke(cli, ["-q", "sweep", "--input", problem_path, "--axis", "deadline",
                                 "--class", "etl", "--values", "100,400,200",
                                 "--output", str(tmp_path / "sweep.csv")])
    assert result.exit_code == EXIT_INPUT_ERROR


def test_validate_writes_csv(runner, data_dir, tmp_path):
    output = tmp_path / "validation.csv"
    result = runner.invoke(cli, ["-q", "validate", "--input", str(data_dir / "measured_runs.json"),
                                 "--output", str(output)])
    assert result.exit_code == EXIT_OK, result.output
    assert len(pd.read_csv(output)) == 12
    assert "mean |theta| = 12.4" in result.output
    assert "5 non-conservative" in result.output


def test_schema_describes_problem_keys(runner):
    result = runner.invoke(cli, ["schema"])
    assert result.exit_code == EXIT_OK
    schema = json.loads(result.output)
    assert {"vm_types", "classes"} <= set(schema["properties"])


def test_shipped_schema_names_the_same_keys(runner, data_dir):
    shipped = json.loads((data_dir.parent.parent / "schema" / "problem.schema.json").read_text())
    generated = json.loads(runner.invoke(cli, ["schema"]).output)
    assert set(shipped["properties"]) == set(generated["properties"])
    assert set(shipped["$defs"]) <= set(generated["$defs"])
