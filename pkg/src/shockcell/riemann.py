"""Normal Riemann solvers for the Euler equations with Tammann EOS.

Exact two-material star-state solver, HLLC approximate solver, and the
hybrid dispatch used at cell edges: HLLC where the materials match, the
exact solver (with the contact pinned at the edge) across material
interfaces.

Fluctuation vectors and waves use the component order
(rho, momentum_normal, momentum_transverse, E).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .eos import MaterialParams, PrimitiveState, energy_from_primitive, sound_speed


class RiemannError(RuntimeError):
    """Base class for Riemann solver failures."""


class ConvergenceError(RiemannError):
    """Star-state iteration did not reach the requested residual."""


class VacuumError(RiemannError):
    """The two-rarefaction vacuum bound is exceeded; no admissible star state."""


@dataclass(frozen=True)
class RiemannInput:
    """Two states meeting at an edge; ``normal`` names the sweep direction axis."""

    left: PrimitiveState
    right: PrimitiveState
    left_material: MaterialParams
    right_material: MaterialParams
    normal: str = "z"

    def normal_velocity(self, w: PrimitiveState) -> float:
        return w.u_z if self.normal == "z" else w.u_r

    def transverse_velocity(self, w: PrimitiveState) -> float:
        return w.u_r if self.normal == "z" else w.u_z

    def make_state(self, rho: float, u_n: float, u_t: float, p: float) -> PrimitiveState:
        if self.normal == "z":
            return PrimitiveState(rho, u_t, u_n, p)
        return PrimitiveState(rho, u_n, u_t, p)


@dataclass(frozen=True)
class Wave:
    kind: str           # "shock" | "rarefaction"
    head: float         # m/s; head == tail for a shock
    tail: float


@dataclass(frozen=True)
class RiemannFan:
    """Star-state solution of a (possibly two-material) Riemann problem."""

    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_wave: Wave
    right_wave: Wave
    iterations: int

    @property
    def contact_speed(self) -> float:
        return self.u_star

    @property
    def residual_ordering_ok(self) -> bool:
        return self.left_wave.tail <= self.u_star <= self.right_wave.head


@dataclass(frozen=True)
class Fluctuations:
    """Left/right-going wave decomposition at an edge.

    ``amdq + apdq`` equals the flux difference f(q_r) - f(q_l) for
    conservative (same-material HLLC) solves.
    """

    amdq: np.ndarray     # (4,)
    apdq: np.ndarray     # (4,)
    waves: np.ndarray    # (3, 4)
    speeds: np.ndarray   # (3,)


def flux(w: PrimitiveState, m: MaterialParams, normal: str = "z") -> np.ndarray:
    """Euler flux through a face with the given normal, in fluctuation order."""
    q = energy_from_primitive(w, m)
    u_n = w.u_z if normal == "z" else w.u_r
    u_t = w.u_r if normal == "z" else w.u_z
    return np.array([
        w.rho * u_n,
        w.rho * u_n * u_n + w.p,
        w.rho * u_n * u_t,
        u_n * (q.E + w.p),
    ])


def _raise_for_status(status: int) -> None:
    if status == k.STAR_VACUUM:
        raise VacuumError("velocity divergence exceeds the two-rarefaction vacuum bound")
    if status == k.STAR_NO_CONVERGENCE:
        raise ConvergenceError("star-state iteration did not converge")
    if status == k.STAR_INVALID_INPUT:
        raise RiemannError("inadmissible input state")


def exact_star(inp: RiemannInput, tol: float = 1e-10, max_iter: int = 100) -> RiemannFan:
    """Exact star state via Newton iteration with a bisection-bracket fallback.

    ``tol`` bounds the absolute residual |f_L(p*) + f_R(p*) + (u_R - u_L)|.
    """
    wl, wr = inp.left, inp.right
    ml, mr = inp.left_material, inp.right_material
    ul = inp.normal_velocity(wl)
    ur = inp.normal_velocity(wr)
    pstar, ustar, rsl, rsr, iters, status = k.exact_star(
        wl.rho, ul, wl.p, ml.gamma, ml.p_inf,
        wr.rho, ur, wr.p, mr.gamma, mr.p_inf,
        tol, max_iter)
    _raise_for_status(status)

    cl = sound_speed(wl, ml)
    cr = sound_speed(wr, mr)
    lh, lt = k.left_wave_speeds(ul, cl, ml.gamma, ml.p_inf, wl.p, pstar, ustar)
    rh, rt = k.right_wave_speeds(ur, cr, mr.gamma, mr.p_inf, wr.p, pstar, ustar)
    left = Wave("shock" if pstar > wl.p else "rarefaction", lh, lt)
    right = Wave("shock" if pstar > wr.p else "rarefaction", rh, rt)
    return RiemannFan(pstar, ustar, rsl, rsr, left, right, iters)


def _sample_left(fan: RiemannFan, inp: RiemannInput, xi: float):
    w, m = inp.left, inp.left_material
    u = inp.normal_velocity(w)
    c = sound_speed(w, m)
    g, pf = m.gamma, m.p_inf
    if fan.left_wave.kind == "shock":
        if xi < fan.left_wave.head:
            return w.rho, u, w.p
        return fan.rho_star_left, fan.u_star, fan.p_star
    if xi <= fan.left_wave.head:
        return w.rho, u, w.p
    if xi >= fan.left_wave.tail:
        return fan.rho_star_left, fan.u_star, fan.p_star
    u_fan = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u + xi)
    c_fan = u_fan - xi
    p_tot = (w.p + pf) * (c_fan / c) ** (2.0 * g / (g - 1.0))
    return g * p_tot / (c_fan * c_fan), u_fan, p_tot - pf


def _sample_right(fan: RiemannFan, inp: RiemannInput, xi: float):
    w, m = inp.right, inp.right_material
    u = inp.normal_velocity(w)
    c = sound_speed(w, m)
    g, pf = m.gamma, m.p_inf
    if fan.right_wave.kind == "shock":
        if xi > fan.right_wave.head:
            return w.rho, u, w.p
        return fan.rho_star_right, fan.u_star, fan.p_star
    if xi >= fan.right_wave.head:
        return w.rho, u, w.p
    if xi <= fan.right_wave.tail:
        return fan.rho_star_right, fan.u_star, fan.p_star
    u_fan = 2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * u + xi)
    c_fan = xi - u_fan
    p_tot = (w.p + pf) * (c_fan / c) ** (2.0 * g / (g - 1.0))
    return g * p_tot / (c_fan * c_fan), u_fan, p_tot - pf


def sample_fan(fan: RiemannFan, inp: RiemannInput, xi: float) -> PrimitiveState:
    """Self-similar solution value on the ray x/t = xi, including fan interiors.

    The transverse velocity is passively advected: it jumps at the contact.
    """
    if xi < fan.u_star:
        rho, u_n, p = _sample_left(fan, inp, xi)
        u_t = inp.transverse_velocity(inp.left)
    else:
        rho, u_n, p = _sample_right(fan, inp, xi)
        u_t = inp.transverse_velocity(inp.right)
    return inp.make_state(rho, u_n, u_t, p)


def _edge_arrays():
    return (np.empty((3, 4)), np.empty(3), np.empty(4), np.empty(4))


def hllc_fluctuations(inp: RiemannInput) -> Fluctuations:
    """HLLC waves and fluctuations; both sides must share one material."""
    if inp.left_material.label != inp.right_material.label:
        raise ValueError("hllc_fluctuations requires a single material on both sides")
    wl, wr = inp.left, inp.right
    m = inp.left_material
    ql = energy_from_primitive(wl, m)
    qr = energy_from_primitive(wr, m)
    waves, speeds, amdq, apdq = _edge_arrays()
    k.hllc_edge(
        wl.rho, inp.normal_velocity(wl), inp.transverse_velocity(wl), wl.p, ql.E,
        sound_speed(wl, m),
        wr.rho, inp.normal_velocity(wr), inp.transverse_velocity(wr), wr.p, qr.E,
        sound_speed(wr, m),
        1, 2, waves, speeds, amdq, apdq)
    return Fluctuations(amdq, apdq, waves, speeds)


def exact_fluctuations(inp: RiemannInput, tol: float = 1e-10, max_iter: int = 100) -> Fluctuations:
    """Fluctuations from the exact solver with the contact pinned at the edge."""
    wl, wr = inp.left, inp.right
    ml, mr = inp.left_material, inp.right_material
    ql = energy_from_primitive(wl, ml)
    qr = energy_from_primitive(wr, mr)
    waves, speeds, amdq, apdq = _edge_arrays()
    status = k.interface_edge(
        wl.rho, inp.normal_velocity(wl), inp.transverse_velocity(wl), wl.p, ql.E,
        sound_speed(wl, ml), ml.gamma, ml.p_inf,
        wr.rho, inp.normal_velocity(wr), inp.transverse_velocity(wr), wr.p, qr.E,
        sound_speed(wr, mr), mr.gamma, mr.p_inf,
        1, 2, tol, max_iter, waves, speeds, amdq, apdq)
    _raise_for_status(status)
    return Fluctuations(amdq, apdq, waves, speeds)


def hybrid_edge_solve(inp: RiemannInput, tol: float = 1e-10, max_iter: int = 100) -> Fluctuations:
    """HLLC at same-material edges, exact fixed-interface solve otherwise."""
    if inp.left_material.label == inp.right_material.label:
        return hllc_fluctuations(inp)
    return exact_fluctuations(inp, tol, max_iter)
