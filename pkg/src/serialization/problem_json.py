# src/serialization/problem_json.py
"""JSON reading and writing of problems, solutions and simulation requests.

Keys are snake_case with a ``_ms`` suffix on durations and ``_per_hour`` on
prices. Diagnostic paths use the model field names (``classes[0].deadline``,
``catalog[1].containers``) so parser and validator errors read alike.
"""

from __future__ import annotations

import json
import logging
from typing import Any, Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import ProblemParseError, ProblemValidationError
from src.models.costing import Diagnostic, errors_only, validate
from src.models.objects import ApplicationClass, JobProfile, Problem, Solution, VmType
from src.simulation.network import NetworkSpec, ServicePolicy, SimParams, build_network

logger = logging.getLogger(__name__)

# child models reached through a key: ("list" | "dict", model)
_NESTED: Dict[Type[BaseModel], Dict[str, Tuple[str, Type[BaseModel]]]] = {
    Problem: {"vm_types": ("list", VmType), "classes": ("list", ApplicationClass)},
    ApplicationClass: {"profiles": ("dict", JobProfile)},
}


def _input_keys(model: Type[BaseModel]) -> Dict[str, str]:
    """Maps every accepted input key (alias or name) to the field name."""
    keys: Dict[str, str] = {}
    for name, field in model.model_fields.items():
        keys[name] = name
        if field.alias:
            keys[field.alias] = name
    return keys


def _alias_to_name() -> Dict[str, str]:
    mapping: Dict[str, str] = {}
    for model in (Problem, VmType, ApplicationClass, JobProfile):
        for name, field in model.model_fields.items():
            if field.alias:
                mapping[field.alias] = name
    return mapping


_FIELD_NAMES = _alias_to_name()


def _format_path(loc: Tuple[Any, ...]) -> str:
    path = ""
    parent: Any = None
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        elif parent == "profiles":
            # dict keys of profiles are VM type ids
            path += f"[{part}]"
        else:
            name = _FIELD_NAMES.get(part, part)
            path += f".{name}" if path else name
        parent = part
    return path


def _find_unknown(
    value: Any, model: Type[BaseModel], path: str, strict: bool, found: List[Diagnostic]
) -> Any:
    """Returns ``value`` with unknown keys removed, recording each one in ``found``."""
    if not isinstance(value, dict):
        return value
    keys = _input_keys(model)
    nested = _NESTED.get(model, {})
    cleaned: Dict[str, Any] = {}
    for key, item in value.items():
        if key not in keys:
            location = f"{path}.{key}" if path else key
            found.append(Diagnostic(
                severity="error" if strict else "warning",
                path=location,
                message="unknown field",
            ))
            continue
        name = keys[key]
        field_path = f"{path}.{name}" if path else name
        shape = nested.get(key) or nested.get(_model_alias(model, name))
        if shape is not None and shape[0] == "list" and isinstance(item, list):
            item = [
                _find_unknown(entry, shape[1], f"{field_path}[{i}]", strict, found)
                for i, entry in enumerate(item)
            ]
        elif shape is not None and shape[0] == "dict" and isinstance(item, dict):
            item = {
                k: _find_unknown(entry, shape[1], f"{field_path}[{k}]", strict, found)
                for k, entry in item.items()
            }
        cleaned[key] = item
    return cleaned


def _model_alias(model: Type[BaseModel], name: str) -> str:
    field = model.model_fields.get(name)
    return field.alias if field is not None and field.alias else name


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(exc.msg, exc.lineno, exc.colno) from exc


def _diagnostics_from(exc: ValidationError) -> List[Diagnostic]:
    diagnostics = []
    for err in exc.errors():
        message = "field required" if err["type"] == "missing" else err["msg"]
        diagnostics.append(Diagnostic(severity="error", path=_format_path(err["loc"]), message=message))
    return diagnostics


def parse_problem(text: str, strict: bool = True) -> Problem:
    """Reads a problem document and applies every model invariant.

    Unknown keys are errors in strict mode; in lenient mode they are dropped
    with a warning. Validation warnings are logged, errors raised together.
    """
    raw = load_json(text)
    if not isinstance(raw, dict):
        raise ProblemValidationError([
            Diagnostic(severity="error", path="$", message="problem document must be a JSON object")
        ])

    unknown: List[Diagnostic] = []
    cleaned = _find_unknown(raw, Problem, "", strict, unknown)
    if strict and unknown:
        raise ProblemValidationError(unknown)
    for diagnostic in unknown:
        logger.warning(f"{diagnostic.path}: ignoring unknown field")

    try:
        problem = Problem.model_validate(cleaned)
    except ValidationError as exc:
        raise ProblemValidationError(_diagnostics_from(exc)) from exc

    diagnostics = validate(problem)
    if errors_only(diagnostics):
        raise ProblemValidationError(diagnostics)
    for diagnostic in diagnostics:
        logger.warning(f"{diagnostic.path}: {diagnostic.message}")

    logger.info(
        f"Parsed problem with {len(problem.classes)} classes and {len(problem.catalog)} VM types"
    )
    return problem


def emit_solution(solution: Solution) -> str:
    """Canonical JSON text of a solution; field order follows the model."""
    return solution.model_dump_json(by_alias=True, indent=2) + "\n"


def parse_solution(text: str) -> Solution:
    # json.loads accepts the Infinity constant an unbounded half-width is written as
    raw = load_json(text)
    try:
        return Solution.model_validate(raw)
    except ValidationError as exc:
        raise ProblemValidationError(_diagnostics_from(exc)) from exc


class NetworkRequest(BaseModel):
    """Input of the ``simulate`` command: one class profile on a fixed container count."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    profile: JobProfile
    containers: int = Field(ge=1)
    h_users: int = Field(ge=1)
    think_time: float = Field(default=0.0, ge=0.0, alias="think_time_ms")
    think_kind: Literal["exponential", "deterministic"] = "exponential"
    service_policy: ServicePolicy = "exponential"
    sim: SimParams = Field(default_factory=SimParams)

    def network(self) -> NetworkSpec:
        spec = build_network(
            self.profile,
            capacity=self.containers,
            h_users=self.h_users,
            think_time=self.think_time,
            service_policy=self.service_policy,
            seed=self.sim.seed,
        )
        return spec.model_copy(update={"think_kind": self.think_kind})


def parse_network_request(text: str, seed: Optional[int] = None) -> NetworkRequest:
    raw = load_json(text)
    try:
        request = NetworkRequest.model_validate(raw)
    except ValidationError as exc:
        raise ProblemValidationError(_diagnostics_from(exc)) from exc
    if seed is not None:
        request = request.model_copy(update={"sim": request.sim.model_copy(update={"seed": seed})})
    return request
