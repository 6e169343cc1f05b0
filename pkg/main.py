#main.py
import json
import logging
import sys
from decimal import Decimal
from pathlib import Path
from typing import Callable, Optional

import click
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from src import __version__
from src.analytic.repairman import machine_repairman
from src.config import PlannerSettings, load_settings
from src.errors import (
    CapacityPlannerError,
    ConfigurationError,
    DomainError,
    ProblemParseError,
    ProblemValidationError,
)
from src.logging_setup import banner, configure_logging
from src.models.objects import Problem, Solution
from src.optimization.optimizer import optimize
from src.reporting import sweep as sweep_report
from src.reporting import validation as validation_report
from src.serialization.problem_json import (
    emit_solution,
    parse_network_request,
    parse_problem,
)
from src.simulation.output_analysis import estimate_response_time
from src.simulation.simulator import TraceRecorder, run_replication

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3

INPUT_ERRORS = (ProblemParseError, ProblemValidationError, ConfigurationError, DomainError)


# ============================
# Helpers
# ============================
def _run_guarded(action: Callable[[], int]) -> None:
    """Runs a command body and maps failures onto the exit-code contract."""
    try:
        code = action()
    except ProblemValidationError as exc:
        for diagnostic in exc.diagnostics:
            logger.error(f"{diagnostic.path}: {diagnostic.message}")
        code = EXIT_INPUT_ERROR
    except INPUT_ERRORS as exc:
        logger.error(str(exc))
        code = EXIT_INPUT_ERROR
    except CapacityPlannerError as exc:
        logger.error(f"Run failed: {exc}", exc_info=True)
        code = EXIT_INTERNAL_ERROR
    except Exception as exc:
        logger.error(f"Unexpected error: {exc}", exc_info=True)
        code = EXIT_INTERNAL_ERROR
    sys.exit(code)


def _read_problem(path: str, strict: bool) -> Problem:
    logger.info(f"Reading problem from: '{path}'")
    return parse_problem(Path(path).read_text(encoding="utf-8"), strict=strict)


def _render_solution(solution: Solution, console: Console) -> None:
    table = Table(title=f"Cluster configuration ({solution.status})")
    for column in ("class", "VM type", "VMs", "reserved", "spot", "T (ms)", "+/- (ms)", "feasible"):
        table.add_column(column)
    table.add_column(f"cost ({solution.currency}/h)", justify="right")
    for c in solution.per_class:
        table.add_row(
            c.class_id,
            c.vm_type,
            str(c.vms),
            str(c.reserved),
            str(c.spot),
            f"{c.predicted_time:.2f}",
            f"{c.ci_half_width:.2f}",
            "yes" if c.feasible else "[red]no[/red]",
            str(c.hourly_cost),
        )
    table.add_row("total", "", "", "", "", "", "", "", str(solution.hourly_cost))
    console.print(table)


def _parse_values(raw: str) -> list:
    values = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            number = float(token)
        except ValueError as exc:
            raise ConfigurationError(f"sweep value '{token}' is not a number") from exc
        values.append(int(number) if number.is_integer() else number)
    return values


# ============================
# Command group
# ============================
@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML settings file.")
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level.")
@click.option("--quiet", "-q", is_flag=True, help="Log warnings and errors only.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], verbose: bool, quiet: bool) -> None:
    """Capacity planning of MapReduce clusters in the Cloud."""
    try:
        settings = load_settings(config_path)
    except ConfigurationError as exc:
        configure_logging("INFO")
        logger.error(str(exc))
        sys.exit(EXIT_INPUT_ERROR)
    level = "DEBUG" if verbose else "WARNING" if quiet else settings.log_level
    configure_logging(level)
    ctx.obj = {"settings": settings, "quiet": quiet}


# ============================
# optimize
# ============================
@cli.command("optimize")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", type=click.Path(dir_okay=False),
              help="Solution file; printed to stdout when omitted.")
@click.option("--seed", type=int, help="Master seed (defaults to the problem's, then 42).")
@click.option("--ci-target", type=float, help="Target relative CI half-width.")
@click.option("--strict/--lenient", default=True, help="Reject or warn on unknown fields.")
@click.option("--evaluator", type=click.Choice(["simulation", "analytic"]))
@click.option("--n-jobs", type=int, help="Classes optimized concurrently.")
@click.pass_context
def optimize_command(ctx, input_path, output_path, seed, ci_target, strict, evaluator, n_jobs):
    """Finds the cheapest cluster meeting every class deadline."""
    settings: PlannerSettings = ctx.obj["settings"]
    console = Console(stderr=True)

    def body() -> int:
        banner(logger, "Capacity planning: optimize")
        problem = _read_problem(input_path, strict)
        master_seed = seed if seed is not None else problem.seed
        config = settings.optimizer_config(
            seed=master_seed,
            target_rel_half_width=ci_target,
            evaluator=evaluator,
            n_jobs=n_jobs,
        )

        bar = tqdm(desc="Evaluations", unit="eval", disable=ctx.obj["quiet"], file=sys.stderr)

        def progress(class_id: str, vm_type: str, vms: int, feasible: bool, cost: Decimal) -> None:
            bar.set_postfix_str(f"{class_id}/{vm_type} x{vms}")
            bar.update(1)

        try:
            solution = optimize(problem, config, progress=progress)
        finally:
            bar.close()

        text = emit_solution(solution)
        if output_path:
            Path(output_path).write_text(text, encoding="utf-8")
            logger.info(f"Solution written to: '{output_path}'")
        else:
            click.echo(text, nl=False)
        if not ctx.obj["quiet"]:
            _render_solution(solution, console)

        banner(logger, f"Total hourly cost: {solution.hourly_cost} {solution.currency}")
        return EXIT_INFEASIBLE if solution.is_partial else EXIT_OK

    _run_guarded(body)


# ============================
# simulate
# ============================
@cli.command("simulate")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False),
              help="Tab-separated event trace of the first batches.")
@click.option("--output", "output_path", type=click.Path(dir_okay=False),
              help="Report file; printed to stdout when omitted.")
@click.option("--seed", type=int)
@click.pass_context
def simulate_command(ctx, input_path, trace_path, seed, output_path):
    """Estimates the mean response time of one network."""

    def body() -> int:
        banner(logger, "Capacity planning: simulate")
        request = parse_network_request(Path(input_path).read_text(encoding="utf-8"), seed=seed)
        spec = request.network()
        estimate = estimate_response_time(spec, request.sim)

        report = {
            "mean_response_ms": estimate.mean_response,
            "ci_half_width_ms": estimate.half_width,
            "completions": estimate.completions,
            "batches": estimate.batches,
            "converged": estimate.converged,
            "seed": request.sim.seed,
            "tool_version": __version__,
        }
        exactly_solvable = spec.is_single_stage_exponential and spec.map_service.mean > 0 and (
            spec.think_kind == "exponential" or spec.think_time == 0
        )
        if exactly_solvable:
            exact = machine_repairman(spec.h_users, spec.think_time, spec.map_service.mean, spec.capacity)
            report["exact_response_ms"] = exact.response_time
        text = json.dumps(report, indent=2)
        if output_path:
            Path(output_path).write_text(text + "\n", encoding="utf-8")
            logger.info(f"Report written to: '{output_path}'")
        else:
            click.echo(text)

        if trace_path:
            recorder = TraceRecorder()
            traced = request.sim.warmup_jobs + request.sim.batch_size * request.sim.min_batches
            run_replication(spec, request.sim, completions=traced, trace_hook=recorder)
            recorder.write(trace_path)
        return EXIT_OK

    _run_guarded(body)


# ============================
# sweep
# ============================
@cli.command("sweep")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--axis", required=True, type=click.Choice(["deadline", "h_users"]))
@click.option("--class", "class_id", required=True)
@click.option("--values", required=True, help="Comma-separated, strictly monotone.")
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int)
@click.option("--evaluator", type=click.Choice(["simulation", "analytic"]))
@click.option("--strict/--lenient", default=True)
@click.pass_context
def sweep_command(ctx, input_path, axis, class_id, values, output_path, seed, evaluator, strict):
    """Re-optimizes one class while the deadline or the user count varies."""
    settings: PlannerSettings = ctx.obj["settings"]

    def body() -> int:
        banner(logger, f"Capacity planning: sweep over {axis}")
        problem = _read_problem(input_path, strict)
        try:
            spec = sweep_report.SweepSpec(
                base_problem=problem, axis=axis, class_id=class_id, values=_parse_values(values)
            )
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        config = settings.optimizer_config(
            seed=seed if seed is not None else problem.seed, evaluator=evaluator
        )
        frame = sweep_report.run_sweep(spec, config, show_progress=not ctx.obj["quiet"])
        sweep_report.write_csv(frame, output_path)
        return EXIT_OK

    _run_guarded(body)


# ============================
# validate
# ============================
@cli.command("validate")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def validate_command(ctx, input_path, output_path):
    """Compares simulated and measured response times."""

    def body() -> int:
        banner(logger, "Capacity planning: validate")
        cases = validation_report.parse_validation_cases(Path(input_path).read_text(encoding="utf-8"))
        rows = validation_report.run_validate(cases, show_progress=not ctx.obj["quiet"])
        validation_report.write_csv(rows, output_path)
        summary = validation_report.summarize(rows)
        click.echo(validation_report.summary_line(summary))
        return EXIT_OK

    _run_guarded(body)


# ============================
# schema
# ============================
@cli.command("schema")
def schema_command():
    """Prints the JSON schema of problem documents."""
    click.echo(json.dumps(Problem.model_json_schema(by_alias=True), indent=2))


def main() -> None:
    cli(prog_name="run-planner")


if __name__ == "__main__":
    main()
