"""Exact one-step integrator for the axisymmetric geometric source terms.

With the flux terms dropped, the radial and axial velocities are
constant in time and density/pressure obey linear ODEs whose exact flow
over a step dt is available in closed form.  Applied once per time step
in a fractional-step (Godunov splitting) manner.
"""

from __future__ import annotations

from . import _kernels as k
from .eos import (
    ConservedState,
    InvalidStateError,
    MaterialParams,
    PrimitiveState,
    primitive_from_conserved,
)


def source_step_primitive(w: PrimitiveState, m: MaterialParams, r: float, dt: float) -> PrimitiveState:
    """Exact source update in primitive variables; velocities pass through untouched."""
    if not r > 0.0:
        raise ValueError(f"cell-center radius must be positive, got {r}")
    rho_n, p_n = k.source_cell(w.rho, w.u_r, w.u_z, w.p, m.gamma, m.p_inf, r, dt)
    if rho_n <= 0.0 or p_n + m.p_inf <= 0.0:
        raise InvalidStateError(
            f"source step left inadmissible state rho={rho_n}, p={p_n} ({m.label})"
        )
    return PrimitiveState(rho_n, w.u_r, w.u_z, p_n)


def source_step_exact(q: ConservedState, m: MaterialParams, r: float, dt: float) -> ConservedState:
    """Exact source update of a conserved state over one step of size dt."""
    w = primitive_from_conserved(q, m)
    w_n = source_step_primitive(w, m, r, dt)
    E = (w_n.p + m.gamma * m.p_inf) / (m.gamma - 1.0) \
        + 0.5 * w_n.rho * (w_n.u_r * w_n.u_r + w_n.u_z * w_n.u_z)
    return ConservedState(w_n.rho, w_n.rho * w_n.u_r, w_n.rho * w_n.u_z, E)
