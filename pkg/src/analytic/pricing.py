# src/analytic/pricing.py

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple, Union

from src.errors import DomainError

Price = Union[Decimal, float, int]


class PricingMix(NamedTuple):
    reserved: int
    spot: int


def _exact(value: Union[Price, float]) -> Fraction:
    # Fraction(str(...)) keeps decimal literals such as 0.3 exact
    return Fraction(str(value))


def max_spot(vms: int, eta: float) -> int:
    """Largest s with s <= eta / (1 - eta) * (vms - s), i.e. s <= eta * vms."""
    if eta >= 1:
        raise DomainError(f"eta must be < 1, got {eta}")
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    return math.floor(_exact(eta) * vms)


def spot_cap_respected(reserved: int, spot: int, eta: float) -> bool:
    """Exact check of s <= eta / (1 - eta) * R."""
    eta_exact = _exact(eta)
    return spot * (1 - eta_exact) <= eta_exact * reserved


def pricing_split(vms: int, eta: float, sigma: Price, pi: Price) -> PricingMix:
    """Cheapest reserved/spot mix for a fleet of ``vms`` machines.

    Spot machines are used up to the cap only when strictly cheaper than
    reserved ones; equal prices keep the whole fleet reserved.
    """
    if vms < 0:
        raise DomainError(f"vms must be >= 0, got {vms}")
    spot = max_spot(vms, eta) if _exact(sigma) < _exact(pi) else 0
    return PricingMix(reserved=vms - spot, spot=spot)


def hourly_cost(mix: PricingMix, sigma: Price, pi: Price) -> Decimal:
    return Decimal(str(sigma)) * mix.spot + Decimal(str(pi)) * mix.reserved
