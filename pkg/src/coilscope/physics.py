"""Closed-form L and Q oracles for planar spiral coils.

Inductance uses the current-sheet approximation for circular spirals and
the modified Wheeler formula for square ones. Q models the skin effect
with a clamped r/(2*delta) AC-resistance ratio; proximity effect is
deliberately omitted so the oracle stays closed-form and monotone in f.
A ferromagnetic core multiplies L by mu_eff and adds a 20% core-loss
penalty to the AC resistance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MU0 = 4.0e-7 * math.pi
COPPER_RESISTIVITY = 1.68e-8  # ohm*m

# current-sheet (circular) and modified Wheeler (square) coefficients
_CS_LOG = 2.46
_CS_QUAD = 0.20
_WHEELER_K1 = 2.34
_WHEELER_K2 = 2.75

CORE_LOSS_FACTOR = 1.2


class GeometryError(ValueError):
    """Raised when a coil geometry violates its physical invariants."""


@dataclass
class CoilGeometry:
    """Parametric planar spiral coil."""

    shape: str  # "circular" | "square"
    turns: int
    outer_diameter_m: float
    inner_diameter_m: float
    wire_radius_m: float
    has_core: bool = False
    core_mu_eff: float = 1.0
    resistivity: float = COPPER_RESISTIVITY

    def __post_init__(self):
        if self.shape not in ("circular", "square"):
            raise GeometryError(f"shape must be circular or square, got {self.shape!r}")
        if self.turns < 1:
            raise GeometryError(f"turns must be >= 1, got {self.turns}")
        if not 0.0 < self.inner_diameter_m < self.outer_diameter_m:
            raise GeometryError(
                f"need 0 < d_in < d_out, got d_in={self.inner_diameter_m}, "
                f"d_out={self.outer_diameter_m}")
        if not self.wire_radius_m > 0.0:
            raise GeometryError(f"wire radius must be > 0, got {self.wire_radius_m}")
        if 2.0 * self.wire_radius_m * self.turns > \
                (self.outer_diameter_m - self.inner_diameter_m) / 2.0:
            raise GeometryError(
                f"{self.turns} turns of wire radius {self.wire_radius_m} m do not "
                f"fit in the annulus of width "
                f"{(self.outer_diameter_m - self.inner_diameter_m) / 2.0} m")
        if self.core_mu_eff < 1.0:
            raise GeometryError(f"core_mu_eff must be >= 1, got {self.core_mu_eff}")
        if not self.resistivity > 0.0:
            raise GeometryError(f"resistivity must be > 0, got {self.resistivity}")

    @property
    def avg_diameter_m(self) -> float:
        return (self.outer_diameter_m + self.inner_diameter_m) / 2.0

    @property
    def fill_ratio(self) -> float:
        return ((self.outer_diameter_m - self.inner_diameter_m)
                / (self.outer_diameter_m + self.inner_diameter_m))


def oracle_inductance(g: CoilGeometry) -> float:
    """Coil inductance in henries (frequency independent)."""
    n, d_avg, rho = g.turns, g.avg_diameter_m, g.fill_ratio
    if g.shape == "circular":
        l_h = (MU0 * n * n * d_avg / 2.0) * (math.log(_CS_LOG / rho)
                                             + _CS_QUAD * rho * rho)
    else:
        l_h = _WHEELER_K1 * MU0 * n * n * d_avg / (1.0 + _WHEELER_K2 * rho)
    if g.has_core:
        l_h *= g.core_mu_eff
    return l_h


def skin_depth(resistivity: float, freq_hz: float) -> float:
    """Skin depth in meters for a nonmagnetic conductor."""
    return math.sqrt(2.0 * resistivity / (2.0 * math.pi * freq_hz * MU0))


def wire_length(g: CoilGeometry) -> float:
    if g.shape == "circular":
        return g.turns * math.pi * g.avg_diameter_m
    return 4.0 * g.turns * g.avg_diameter_m


def series_resistance(g: CoilGeometry, freq_hz: float) -> float:
    """Effective AC series resistance in ohms."""
    if not freq_hz > 0.0:
        raise GeometryError(f"frequency must be positive, got {freq_hz}")
    r_dc = g.resistivity * wire_length(g) / (math.pi * g.wire_radius_m ** 2)
    delta = skin_depth(g.resistivity, freq_hz)
    r_ac = r_dc * max(1.0, g.wire_radius_m / (2.0 * delta))
    if g.has_core:
        r_ac *= CORE_LOSS_FACTOR
    return r_ac


def oracle_quality(g: CoilGeometry, freq_hz: float) -> float:
    """Quality factor Q = 2*pi*f*L / R_ac."""
    return 2.0 * math.pi * freq_hz * oracle_inductance(g) / series_resistance(g, freq_hz)
