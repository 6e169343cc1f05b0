# src/errors.py
"""Exception hierarchy shared by every layer of the planner."""

from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional, Sequence

if TYPE_CHECKING:
    from src.models.costing import Diagnostic


class CapacityPlannerError(Exception):
    """Base class for all planner failures."""


class ProblemParseError(CapacityPlannerError):
    """The input document is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ProblemValidationError(CapacityPlannerError):
    """The problem violates one or more model invariants."""

    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics: List["Diagnostic"] = list(diagnostics)
        lines = [f"{d.path}: {d.message}" for d in self.diagnostics if d.severity == "error"]
        super().__init__("invalid problem: " + "; ".join(lines))


class ConfigurationError(CapacityPlannerError):
    """A policy or settings value cannot be honoured."""


class DomainError(CapacityPlannerError, ValueError):
    """An argument lies outside the domain of a formula."""


class SimulationAbortedError(CapacityPlannerError):
    """The event cap was reached before the requested completions."""

    def __init__(self, message: str, partial: Optional[List[float]] = None, events: int = 0):
        super().__init__(message)
        self.partial: List[float] = list(partial or [])
        self.events = events
