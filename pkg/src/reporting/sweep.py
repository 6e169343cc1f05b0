# src/reporting/sweep.py
"""What-if studies: re-optimize one class while a single parameter varies."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from tqdm import tqdm

from src.errors import CapacityPlannerError
from src.models.objects import Problem
from src.optimization.evaluator import OptimizerConfig
from src.optimization.optimizer import optimize

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "axis_value",
    "vm_type",
    "vms",
    "reserved",
    "spot",
    "hourly_cost",
    "predicted_time_ms",
    "feasible",
]

Number = Union[int, float]


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    base_problem: Problem
    axis: Literal["deadline", "h_users"]
    class_id: str
    values: List[Number]

    @field_validator("values")
    @classmethod
    def _strictly_monotone(cls, values: List[Number]) -> List[Number]:
        if not values:
            raise ValueError("sweep values must not be empty")
        steps = [b - a for a, b in zip(values, values[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValueError("sweep values must be strictly increasing or strictly decreasing")
        return values

    @model_validator(mode="after")
    def _check_target(self) -> "SweepSpec":
        if self.class_id not in {c.id for c in self.base_problem.classes}:
            raise ValueError(f"class '{self.class_id}' is not part of the problem")
        if self.axis == "h_users" and any(int(v) != v for v in self.values):
            raise ValueError("h_users values must be integers")
        return self

    def problem_at(self, value: Number) -> Problem:
        """The single-class problem with the swept parameter set to ``value``."""
        app_class = self.base_problem.get_class(self.class_id)
        if self.axis == "deadline":
            app_class = app_class.with_updates(deadline=float(value))
        else:
            app_class = app_class.with_updates(h_users=int(value))
        return self.base_problem.model_copy(update={"classes": [app_class]})


def _failed_row(value: Number) -> Dict[str, Any]:
    return {
        "axis_value": value,
        "vm_type": "",
        "vms": 0,
        "reserved": 0,
        "spot": 0,
        "hourly_cost": "",
        "predicted_time_ms": float("nan"),
        "feasible": "false",
    }


def run_sweep(spec: SweepSpec, config: OptimizerConfig, show_progress: bool = True) -> pd.DataFrame:
    """One optimization per axis value, rows in the order the values were given.

    A value that cannot be solved is kept as an infeasible row and the sweep
    moves on.
    """
    rows: List[Dict[str, Any]] = []
    for value in tqdm(spec.values, desc=f"Sweeping {spec.axis}", disable=not show_progress):
        try:
            solution = optimize(spec.problem_at(value), config)
        except CapacityPlannerError as exc:
            logger.error(f"{spec.axis}={value}: optimization failed: {exc}")
            rows.append(_failed_row(value))
            continue
        chosen = solution.per_class[0]
        rows.append({
            "axis_value": value,
            "vm_type": chosen.vm_type,
            "vms": chosen.vms,
            "reserved": chosen.reserved,
            "spot": chosen.spot,
            "hourly_cost": str(chosen.hourly_cost),
            "predicted_time_ms": chosen.predicted_time,
            "feasible": "true" if chosen.feasible else "false",
        })
        logger.info(
            f"{spec.axis}={value}: {chosen.vms} x {chosen.vm_type} at {chosen.hourly_cost}/h"
            f"{'' if chosen.feasible else ' (infeasible)'}"
        )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_csv(frame: pd.DataFrame, path: Optional[Union[str, Path]] = None) -> str:
    """Writes ``frame`` with a single header row; returns the text as well."""
    text = frame.to_csv(index=False, lineterminator="\n", float_format="%.4f")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(frame)} rows to {path}")
    return text
