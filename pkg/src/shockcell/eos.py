"""Tammann (stiffened gas) equation of state.

Closures between pressure, total energy, sound speed and acoustic impedance
for each material.  Pressure is absolute SI (Pa) everywhere inside the
solver; gauge psi appears only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

P_ATM = 101325.0        # Pa, 1 atm (0 psi gauge)
PA_PER_PSI = 6894.757   # Pa per psi


class InvalidStateError(ValueError):
    """A thermodynamic state violates EOS admissibility (rho > 0, p + p_inf > 0)."""


@dataclass(frozen=True)
class MaterialParams:
    """Tammann EOS parameters plus a reference ambient density.

    ``gamma`` is dimensionless (> 1), ``p_inf`` the stiffening pressure
    offset in Pa (>= 0, zero for an ideal gas), ``rho_ref`` an ambient
    density in kg/m^3 used when constructing quiescent states.
    """

    label: str
    gamma: float
    p_inf: float
    rho_ref: float

    def __post_init__(self) -> None:
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.p_inf < 0.0:
            raise ValueError(f"p_inf must be >= 0, got {self.p_inf}")
        if not self.rho_ref > 0.0:
            raise ValueError(f"rho_ref must be positive, got {self.rho_ref}")


def air(rho_ref: float = 1.2) -> MaterialParams:
    """Air as an ideal gas (p_inf = 0)."""
    return MaterialParams("air", 1.4, 0.0, rho_ref)


def water(rho_ref: float = 1000.0) -> MaterialParams:
    """Water, stiffened with p_inf = 0.3 GPa."""
    return MaterialParams("water", 7.15, 0.3e9, rho_ref)


def polystyrene(rho_ref: float = 1050.0) -> MaterialParams:
    """Polystyrene modeled as a stiff gas; gamma near 1, p_inf tuned for its sound speed."""
    return MaterialParams("polystyrene", 1.1, 4.79e9, rho_ref)


@dataclass(frozen=True)
class PrimitiveState:
    """(rho, u_r, u_z, p) with rho > 0; liquids may carry tension while p + p_inf > 0."""

    rho: float
    u_r: float
    u_z: float
    p: float


@dataclass(frozen=True)
class ConservedState:
    """(rho, mom_r, mom_z, E) with E the total energy per unit volume."""

    rho: float
    mom_r: float
    mom_z: float
    E: float


def _require_admissible(rho: float, p: float, m: MaterialParams) -> None:
    if not rho > 0.0:
        raise InvalidStateError(f"rho must be positive, got {rho} ({m.label})")
    if not p + m.p_inf > 0.0:
        raise InvalidStateError(
            f"p + p_inf must be positive, got p={p}, p_inf={m.p_inf} ({m.label})"
        )


def pressure_from_conserved(q: ConservedState, m: MaterialParams) -> float:
    """Absolute pressure p = (gamma - 1)*rho*e - gamma*p_inf with rho*e = E - kinetic."""
    if not q.rho > 0.0:
        raise InvalidStateError(f"rho must be positive, got {q.rho} ({m.label})")
    rho_e = q.E - 0.5 * (q.mom_r * q.mom_r + q.mom_z * q.mom_z) / q.rho
    p = (m.gamma - 1.0) * rho_e - m.gamma * m.p_inf
    if not p + m.p_inf > 0.0:
        raise InvalidStateError(
            f"conserved state decodes to inadmissible pressure p={p} ({m.label})"
        )
    return p


def energy_from_primitive(w: PrimitiveState, m: MaterialParams) -> ConservedState:
    """Conserved state with E = (p + gamma*p_inf)/(gamma - 1) + rho*|u|^2/2."""
    _require_admissible(w.rho, w.p, m)
    kinetic = 0.5 * w.rho * (w.u_r * w.u_r + w.u_z * w.u_z)
    E = (w.p + m.gamma * m.p_inf) / (m.gamma - 1.0) + kinetic
    return ConservedState(w.rho, w.rho * w.u_r, w.rho * w.u_z, E)


def primitive_from_conserved(q: ConservedState, m: MaterialParams) -> PrimitiveState:
    """Inverse of :func:`energy_from_primitive`."""
    p = pressure_from_conserved(q, m)
    return PrimitiveState(q.rho, q.mom_r / q.rho, q.mom_z / q.rho, p)


def sound_speed(w: PrimitiveState, m: MaterialParams) -> float:
    """c = sqrt(gamma * (p + p_inf) / rho)."""
    _require_admissible(w.rho, w.p, m)
    return math.sqrt(m.gamma * (w.p + m.p_inf) / w.rho)


def acoustic_impedance(w: PrimitiveState, m: MaterialParams) -> float:
    """Z = rho * c."""
    return w.rho * sound_speed(w, m)


def gauge_psi(p_abs: float) -> float:
    """Gauge pressure in psi; atmospheric pressure maps to 0 psi."""
    return (p_abs - P_ATM) / PA_PER_PSI
