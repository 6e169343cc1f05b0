# src/models/costing.py
"""Hourly cost, prediction accuracy and invariant checking for problems."""

from __future__ import annotations

import logging
from collections import Counter
from decimal import Decimal
from typing import Dict, Iterable, List, Literal, Optional

from pydantic import BaseModel, ConfigDict

from src.errors import DomainError, ProblemValidationError
from src.models.objects import (
    ApplicationClass,
    JobProfile,
    Problem,
    Solution,
    VmType,
    to_money,
)

logger = logging.getLogger(__name__)

SAMPLE_MEAN_TOLERANCE = 0.10


class Diagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    severity: Literal["error", "warning"]
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


def _catalog_index(catalog: Iterable[VmType]) -> Dict[str, VmType]:
    return {vm.id: vm for vm in catalog}


def cost(solution: Solution, catalog: Iterable[VmType]) -> Decimal:
    """Sum over classes of sigma * spot + pi * reserved for each chosen VM type."""
    index = _catalog_index(catalog)
    total = Decimal("0")
    for class_solution in solution.per_class:
        vm = index.get(class_solution.vm_type)
        if vm is None:
            raise ProblemValidationError([
                Diagnostic(
                    severity="error",
                    path=f"classes[{class_solution.class_id}].vm_type",
                    message=f"class '{class_solution.class_id}' references unknown VM type "
                            f"'{class_solution.vm_type}'",
                )
            ])
        total += vm.sigma * class_solution.spot + vm.pi * class_solution.reserved
    return to_money(total)


def with_cost(solution: Solution, catalog: Iterable[VmType]) -> Solution:
    """Returns a copy of the solution whose hourly_cost is recomputed."""
    return solution.model_copy(update={"hourly_cost": cost(solution, catalog)})


def accuracy(simulated_tau: float, measured_t: float) -> float:
    """Relative prediction error (tau - T) / T; negative means non-conservative."""
    if measured_t <= 0:
        raise DomainError(f"measured response time must be positive, got {measured_t}")
    return (simulated_tau - measured_t) / measured_t


def _error(path: str, message: str) -> Diagnostic:
    return Diagnostic(severity="error", path=path, message=message)


def _warning(path: str, message: str) -> Diagnostic:
    return Diagnostic(severity="warning", path=path, message=message)


def _check_vm_type(vm: VmType, path: str) -> List[Diagnostic]:
    found = []
    if vm.containers < 1:
        found.append(_error(f"{path}.containers", f"must be >= 1, got {vm.containers}"))
    if vm.sigma < 0:
        found.append(_error(f"{path}.sigma", f"spot price must be >= 0, got {vm.sigma}"))
    if vm.pi < 0:
        found.append(_error(f"{path}.pi", f"reserved price must be >= 0, got {vm.pi}"))
    return found


def _check_samples(
    samples: Optional[Iterable[float]], declared_avg: float, path: str
) -> List[Diagnostic]:
    if samples is None:
        return []
    values = list(samples)
    if not values:
        return [_error(path, "sample list must not be empty")]
    if any(v < 0 for v in values):
        return [_error(path, "samples must be non-negative durations")]
    sample_mean = sum(values) / len(values)
    if declared_avg > 0 and abs(sample_mean - declared_avg) > SAMPLE_MEAN_TOLERANCE * declared_avg:
        return [_warning(
            path,
            f"sample mean {sample_mean:.2f} ms deviates more than 10% "
            f"from the declared average {declared_avg:.2f} ms",
        )]
    return []


def _check_profile(profile: JobProfile, path: str) -> List[Diagnostic]:
    found = []
    if profile.n_map < 1:
        found.append(_error(f"{path}.n_map", f"must be >= 1, got {profile.n_map}"))
    if profile.n_reduce < 0:
        found.append(_error(f"{path}.n_reduce", f"must be >= 0, got {profile.n_reduce}"))

    durations = {
        "map_avg": profile.map_avg,
        "reduce_avg": profile.reduce_avg,
        "shuffle_typ_avg": profile.shuffle_typ_avg,
        "map_max": profile.map_max,
        "reduce_max": profile.reduce_max,
        "shuffle_first_max": profile.shuffle_first_max,
        "shuffle_typ_max": profile.shuffle_typ_max,
    }
    for name, value in durations.items():
        if value is not None and value < 0:
            found.append(_error(f"{path}.{name}", f"duration must be >= 0, got {value}"))

    pairs = (
        ("map_max", profile.map_max, "map_avg", profile.map_avg),
        ("reduce_max", profile.reduce_max, "reduce_avg", profile.reduce_avg),
        ("shuffle_typ_max", profile.shuffle_typ_max, "shuffle_typ_avg", profile.shuffle_typ_avg),
    )
    for max_name, max_value, avg_name, avg_value in pairs:
        if max_value is not None and max_value < avg_value:
            found.append(_error(
                f"{path}.{max_name}",
                f"{max_name} ({max_value}) is below {avg_name} ({avg_value})",
            ))

    found += _check_samples(profile.map_samples, profile.map_avg, f"{path}.map_samples")
    found += _check_samples(profile.reduce_samples, profile.reduce_avg, f"{path}.reduce_samples")
    found += _check_samples(
        profile.shuffle_samples, profile.shuffle_typ_avg, f"{path}.shuffle_samples"
    )
    return found


def _check_class(
    app_class: ApplicationClass, path: str, catalog_ids: Iterable[str]
) -> List[Diagnostic]:
    found = []
    known = set(catalog_ids)
    if app_class.h_users < 1:
        found.append(_error(f"{path}.h_users", f"must be >= 1, got {app_class.h_users}"))
    if app_class.think_time < 0:
        found.append(_error(f"{path}.think_time", f"must be >= 0, got {app_class.think_time}"))
    if app_class.deadline <= 0:
        found.append(_error(f"{path}.deadline", f"must be > 0, got {app_class.deadline}"))

    eta = app_class.spot_fraction_cap
    if eta >= 1:
        found.append(_error(
            f"{path}.spot_fraction_cap",
            f"eta must be < 1 (got {eta}): it violates the spot cap constraint "
            "s <= eta/(1-eta) * R, which is undefined at eta = 1",
        ))
    elif eta < 0:
        found.append(_error(f"{path}.spot_fraction_cap", f"eta must be >= 0, got {eta}"))

    if not app_class.profiles:
        found.append(_error(f"{path}.profiles", "at least one candidate profile is required"))
    for vm_id, profile in app_class.profiles.items():
        profile_path = f"{path}.profiles[{vm_id}]"
        if vm_id not in known:
            found.append(_error(profile_path, f"unknown VM type '{vm_id}'"))
        found += _check_profile(profile, profile_path)
    return found


def validate(problem: Problem) -> List[Diagnostic]:
    """Checks every model invariant; an empty list means the problem is valid."""
    found: List[Diagnostic] = []

    for vm_id, count in Counter(vm.id for vm in problem.catalog).items():
        if count > 1:
            found.append(_error("catalog", f"duplicate VM type id '{vm_id}'"))
    for idx, vm in enumerate(problem.catalog):
        found += _check_vm_type(vm, f"catalog[{idx}]")

    if not problem.classes:
        found.append(_error("classes", "at least one application class is required"))
    for class_id, count in Counter(c.id for c in problem.classes).items():
        if count > 1:
            found.append(_error("classes", f"duplicate class id '{class_id}'"))

    catalog_ids = [vm.id for vm in problem.catalog]
    for idx, app_class in enumerate(problem.classes):
        found += _check_class(app_class, f"classes[{idx}]", catalog_ids)

    return found


def errors_only(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def require_valid(problem: Problem) -> List[Diagnostic]:
    """Raises ProblemValidationError on any error; returns the warnings."""
    diagnostics = validate(problem)
    if errors_only(diagnostics):
        raise ProblemValidationError(diagnostics)
    for warning in diagnostics:
        logger.warning(f"{warning.path}: {warning.message}")
    return diagnostics
