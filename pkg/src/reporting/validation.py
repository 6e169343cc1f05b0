# src/reporting/validation.py
"""Model validation against measured response times."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator
from tqdm import tqdm

from src.errors import CapacityPlannerError, ProblemValidationError
from src.models.costing import Diagnostic, accuracy
from src.serialization.problem_json import NetworkRequest, load_json
from src.simulation.output_analysis import estimate_response_time

logger = logging.getLogger(__name__)

VALIDATION_COLUMNS = ["label", "T_ms", "tau_ms", "theta_percent", "note"]
NON_CONSERVATIVE = "non-conservative"


class ValidationCase(BaseModel):
    """One measured run: either a network to simulate or an already simulated value."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    label: str
    measured_t: float = Field(alias="measured_ms")
    simulated_tau: Optional[float] = Field(default=None, alias="simulated_ms")
    network: Optional[NetworkRequest] = None

    @model_validator(mode="after")
    def _one_source(self) -> "ValidationCase":
        if (self.simulated_tau is None) == (self.network is None):
            raise ValueError("give exactly one of simulated_ms or network")
        return self


class ValidationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    measured_t: float
    simulated_tau: float = math.nan
    theta: float = math.nan
    note: str = ""

    @property
    def failed(self) -> bool:
        return math.isnan(self.theta)


class ValidationSummary(NamedTuple):
    rows: int
    failed: int
    mean_abs_theta: float
    non_conservative: int


def parse_validation_cases(text: str) -> List[ValidationCase]:
    raw = load_json(text)
    try:
        return TypeAdapter(List[ValidationCase]).validate_python(raw)
    except ValidationError as exc:
        raise ProblemValidationError([
            Diagnostic(
                severity="error",
                path="".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err["loc"]),
                message=err["msg"],
            )
            for err in exc.errors()
        ]) from exc


def _simulated_tau(case: ValidationCase) -> float:
    if case.simulated_tau is not None:
        return case.simulated_tau
    assert case.network is not None
    estimate = estimate_response_time(case.network.network(), case.network.sim)
    return estimate.mean_response


def run_validate(cases: List[ValidationCase], show_progress: bool = True) -> List[ValidationRow]:
    """Computes the relative error of every case; a failing case is kept with a note."""
    rows: List[ValidationRow] = []
    for case in tqdm(cases, desc="Validating", disable=not show_progress):
        try:
            tau = _simulated_tau(case)
            theta = accuracy(tau, case.measured_t)
        except CapacityPlannerError as exc:
            logger.error(f"[{case.label}] validation failed: {exc}")
            rows.append(ValidationRow(label=case.label, measured_t=case.measured_t, note=f"failed: {exc}"))
            continue
        note = NON_CONSERVATIVE if theta < 0 else ""
        rows.append(ValidationRow(
            label=case.label, measured_t=case.measured_t, simulated_tau=tau, theta=theta, note=note
        ))
        logger.info(f"[{case.label}] T={case.measured_t:.2f} ms, tau={tau:.2f} ms, theta={theta:+.2%}")
    return rows


def summarize(rows: List[ValidationRow]) -> ValidationSummary:
    scored = [r for r in rows if not r.failed]
    mean_abs = sum(abs(r.theta) for r in scored) / len(scored) if scored else math.nan
    summary = ValidationSummary(
        rows=len(rows),
        failed=len(rows) - len(scored),
        mean_abs_theta=mean_abs,
        non_conservative=sum(1 for r in scored if r.theta < 0),
    )
    logger.info(summary_line(summary))
    return summary


def summary_line(summary: ValidationSummary) -> str:
    return (
        f"Validation summary: {summary.rows} rows, mean |theta| = {summary.mean_abs_theta:.2%}, "
        f"{summary.non_conservative} non-conservative, {summary.failed} failed"
    )


def to_frame(rows: List[ValidationRow]) -> pd.DataFrame:
    records: List[Dict[str, Any]] = [
        {
            "label": r.label,
            "T_ms": r.measured_t,
            "tau_ms": r.simulated_tau,
            "theta_percent": r.theta * 100.0,
            "note": r.note,
        }
        for r in rows
    ]
    return pd.DataFrame(records, columns=VALIDATION_COLUMNS)


def write_csv(rows: List[ValidationRow], path: Optional[Union[str, Path]] = None) -> str:
    text = to_frame(rows).to_csv(index=False, lineterminator="\n", float_format="%.4f")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(rows)} validation rows to {path}")
    return text
