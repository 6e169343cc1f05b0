# src/models/objects.py

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

MONEY_QUANTUM = Decimal("0.0001")


def to_money(value: object) -> Decimal:
    """Converts a price or cost to a Decimal with four fractional digits."""
    if isinstance(value, Decimal):
        amount = value
    elif isinstance(value, float):
        # str() keeps the shortest repr, so 0.1 stays 0.1 instead of its binary expansion
        amount = Decimal(str(value))
    else:
        amount = Decimal(value)  # type: ignore[arg-type]
    return amount.quantize(MONEY_QUANTUM, rounding=ROUND_HALF_EVEN)


class _Frozen(BaseModel):
    model_config = ConfigDict(
        frozen=True, populate_by_name=True, extra="forbid", ser_json_inf_nan="constants"
    )


class VmType(_Frozen):
    """A purchasable machine shape with its spot and reserved hourly prices."""

    id: str
    containers: int
    sigma: Decimal = Field(alias="sigma_per_hour")
    pi: Decimal = Field(alias="pi_per_hour")

    @field_validator("sigma", "pi", mode="before")
    @classmethod
    def _quantize(cls, value: object) -> Decimal:
        return to_money(value)


class JobProfile(_Frozen):
    """Statistical characterization of one class's job on one VM type.

    Maximum durations are optional; when present they must not be below the
    matching average. ``shuffle_first_max`` is carried but no model reads it.
    """

    n_map: int
    n_reduce: int = 0
    map_avg: float = Field(alias="map_avg_ms")
    reduce_avg: float = Field(default=0.0, alias="reduce_avg_ms")
    shuffle_typ_avg: float = Field(default=0.0, alias="shuffle_typ_avg_ms")
    map_max: Optional[float] = Field(default=None, alias="map_max_ms")
    reduce_max: Optional[float] = Field(default=None, alias="reduce_max_ms")
    shuffle_first_max: Optional[float] = Field(default=None, alias="shuffle_first_max_ms")
    shuffle_typ_max: Optional[float] = Field(default=None, alias="shuffle_typ_max_ms")
    map_samples: Optional[Tuple[float, ...]] = Field(default=None, alias="map_samples_ms")
    reduce_samples: Optional[Tuple[float, ...]] = Field(default=None, alias="reduce_samples_ms")
    shuffle_samples: Optional[Tuple[float, ...]] = Field(default=None, alias="shuffle_samples_ms")

    @property
    def reduce_service_avg(self) -> float:
        """Mean reduce container occupancy, shuffle included."""
        return self.reduce_avg + self.shuffle_typ_avg


class ApplicationClass(_Frozen):
    """A workload class: H users cycling with think time Z against deadline D."""

    id: str
    h_users: int
    think_time: float = Field(alias="think_time_ms")
    deadline: float = Field(alias="deadline_ms")
    spot_fraction_cap: float = Field(default=0.0, alias="eta")
    profiles: Dict[str, JobProfile]

    def with_updates(self, **changes: object) -> "ApplicationClass":
        return self.model_copy(update=changes)


class Problem(_Frozen):
    catalog: List[VmType] = Field(alias="vm_types")
    classes: List[ApplicationClass]
    currency: str = "EUR"
    seed: Optional[int] = None

    def vm_type(self, vm_type_id: str) -> VmType:
        for vm in self.catalog:
            if vm.id == vm_type_id:
                return vm
        raise KeyError(vm_type_id)

    def get_class(self, class_id: str) -> ApplicationClass:
        for app_class in self.classes:
            if app_class.id == class_id:
                return app_class
        raise KeyError(class_id)

    def restricted_to(self, class_ids: List[str]) -> "Problem":
        """Returns the sub-problem holding only the named classes."""
        kept = [c for c in self.classes if c.id in class_ids]
        return self.model_copy(update={"classes": kept})


class ClassSolution(_Frozen):
    """Chosen VM type, fleet size and pricing mix for one class."""

    class_id: str
    vm_type: str
    vms: int
    reserved: int
    spot: int
    predicted_time: float = Field(alias="predicted_time_ms")
    ci_half_width: float = Field(default=0.0, alias="ci_half_width_ms")
    feasible: bool
    hourly_cost: Decimal = Decimal("0.0000")
    diagnostics: Tuple[str, ...] = ()

    @field_validator("hourly_cost", mode="before")
    @classmethod
    def _quantize(cls, value: object) -> Decimal:
        return to_money(value)


class Solution(_Frozen):
    per_class: List[ClassSolution] = Field(alias="classes")
    hourly_cost: Decimal = Decimal("0.0000")
    status: str = "complete"
    seed: Optional[int] = None
    tool_version: str = ""
    currency: str = "EUR"

    @field_validator("hourly_cost", mode="before")
    @classmethod
    def _quantize(cls, value: object) -> Decimal:
        return to_money(value)

    @property
    def is_partial(self) -> bool:
        return self.status == "partial"
