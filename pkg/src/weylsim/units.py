"""Physical trap/laser parameters and the dimensionless unit system.

All physics modules work in dimensionless variables

    x~ = x / Delta,   t~ = c t / Delta,   p~ = p Delta / hbar,

where ``Delta = sqrt(hbar / 2 m omega)`` is the trap ground-state spread and
``c = hbar eta Omega sqrt(2 / (m omega hbar))`` is the emergent light speed.
This module owns the conversions in and out of that system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError, UnitKindError

KINDS = ("length", "time", "momentum")


def _require_positive(**values):
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Trap and laser parameters in SI units.

    hbar        action (J s)
    mass        ion mass (kg)
    trap_freq   trap angular frequency omega (rad/s)
    lamb_dicke  Lamb-Dicke parameter eta (dimensionless)
    rabi        sideband coupling strength Omega (rad/s)
    """

    hbar: float
    mass: float
    trap_freq: float
    lamb_dicke: float
    rabi: float

    def __post_init__(self):
        _require_positive(hbar=self.hbar, mass=self.mass, trap_freq=self.trap_freq,
                          lamb_dicke=self.lamb_dicke, rabi=self.rabi)


@dataclass(frozen=True)
class NaturalUnits:
    """The three scales of the dimensionless system.

    length_scale * momentum_scale recovers hbar, and
    time_scale = length_scale / c.
    """

    length_scale: float
    time_scale: float
    momentum_scale: float

    def __post_init__(self):
        _require_positive(length_scale=self.length_scale, time_scale=self.time_scale,
                          momentum_scale=self.momentum_scale)

    @property
    def light_speed(self) -> float:
        return self.length_scale / self.time_scale

    @property
    def hbar(self) -> float:
        return self.length_scale * self.momentum_scale

    def scale_for(self, kind: str) -> float:
        if kind == "length":
            return self.length_scale
        if kind == "time":
            return self.time_scale
        if kind == "momentum":
            return self.momentum_scale
        raise UnitKindError(f"unknown unit kind {kind!r}, expected one of {KINDS}")


#: Unit system of the internal dimensionless representation itself.
DIMENSIONLESS = NaturalUnits(1.0, 1.0, 1.0)


def derive_scales(params: PhysicalParams) -> NaturalUnits:
    """Derive the natural scales (Delta, Delta/c, hbar/Delta) from trap parameters."""
    delta = math.sqrt(params.hbar / (2.0 * params.mass * params.trap_freq))
    c = params.hbar * params.lamb_dicke * params.rabi * math.sqrt(
        2.0 / (params.mass * params.trap_freq * params.hbar))
    units = NaturalUnits(delta, delta / c, params.hbar / delta)
    if not all(math.isfinite(s) for s in (delta, c)):
        raise InvalidParameterError("derived scales are not finite")
    return units


def to_dimensionless(value: float, kind: str, units: NaturalUnits) -> float:
    """Divide a dimensioned quantity by its matching scale."""
    return value / units.scale_for(kind)


def from_dimensionless(value: float, kind: str, units: NaturalUnits) -> float:
    """Multiply a dimensionless quantity by its matching scale."""
    return value * units.scale_for(kind)
