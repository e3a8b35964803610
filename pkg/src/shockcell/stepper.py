"""Unsplit high-resolution wave-propagation stepping.

One full step is the homogeneous unsplit update (r- and z-sweeps with
hybrid normal solves, limited second-order corrections, and transverse
contributions) followed by the exact geometric source step.  Sweeps run
as numba-parallel row loops whose outputs are owned per row, so results
do not depend on the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as k
from ._kernels import NG
from .domain import GridSpec, MaterialMap, ShockProfile, inflow_state_from_overpressure
from .eos import MaterialParams, PrimitiveState

_ERR_NAMES = {
    k.ERR_DECODE: "inadmissible cell state",
    k.ERR_POSITIVITY: "positivity failure after update",
    k.ERR_RIEMANN: "interface Riemann solve failed",
}


class SolverError(RuntimeError):
    """Numerical failure with the offending cell and step attached."""

    def __init__(self, code: int, j: int, i: int, step: int, t: float):
        self.code = code
        self.cell = (j, i)
        self.step = step
        self.t = t
        name = _ERR_NAMES.get(code, f"error {code}")
        super().__init__(f"{name} at cell (r={j}, z={i}), step {step}, t={t:.6e} s")


@dataclass
class SolverOptions:
    cfl: float = 0.45
    limiter: str = "mc"          # "mc" | "none" (unlimited second order)
    second_order: bool = True
    transverse: bool = True
    source: bool = True
    strang: bool = False         # Strang instead of Godunov splitting
    exact_tol: float = 1e-10
    exact_max_iter: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must be in (0, 1), got {self.cfl}")
        if self.limiter not in ("mc", "none"):
            raise ValueError(f"unknown limiter {self.limiter!r}")


class _Workspace:
    """Preallocated kernel buffers for one grid size."""

    def __init__(self, nrt: int, nzt: int):
        shape = (nrt, nzt)
        self.pres = np.empty(shape)
        self.cs = np.empty(shape)
        self.vr = np.empty(shape)
        self.vz = np.empty(shape)
        self.amdq_z = np.empty(shape + (4,))
        self.apdq_z = np.empty(shape + (4,))
        self.amdq_r = np.empty(shape + (4,))
        self.apdq_r = np.empty(shape + (4,))
        self.waves = np.empty(shape + (3, 4))
        self.sp = np.empty(shape + (3,))
        self.fflux = np.empty(shape + (4,))
        self.gflux = np.empty(shape + (4,))
        self.bpap = np.zeros(shape)
        self.bmap = np.zeros(shape)
        self.bpam = np.zeros(shape)
        self.bmam = np.zeros(shape)
        self.err_code = np.zeros(nrt, dtype=np.int64)
        self.err_i = np.zeros(nrt, dtype=np.int64)
        self.fallbacks = np.zeros(nrt, dtype=np.int64)
        self.rowmax = np.zeros(nrt)


@dataclass
class SimulationState:
    """Conserved field over the padded grid plus the static material map."""

    grid: GridSpec
    materials: MaterialMap
    q: np.ndarray                   # (n_r + 2NG, n_z + 2NG, 4)
    options: SolverOptions = field(default_factory=SolverOptions)
    bcs: dict = field(default_factory=lambda: {
        "rmin": "axis", "rmax": "outflow", "zmin": "inflow", "zmax": "outflow"})
    t: float = 0.0
    step_count: int = 0

    def __post_init__(self) -> None:
        nrt = self.grid.n_r + 2 * NG
        nzt = self.grid.n_z + 2 * NG
        if self.q.shape != (nrt, nzt, 4):
            raise ValueError(f"q must have shape {(nrt, nzt, 4)}, got {self.q.shape}")
        self._qnew = np.empty_like(self.q)
        self._ws = _Workspace(nrt, nzt)
        self._r_pad = self.grid.r_centers_padded()

    # -- field views (interior) ---------------------------------------------

    def interior(self, comp: int) -> np.ndarray:
        return self.q[NG:-NG, NG:-NG, comp]

    def pressure_field(self) -> np.ndarray:
        """Absolute pressure over interior cells (n_r, n_z)."""
        q = self.q[NG:-NG, NG:-NG]
        mid = self.materials.ids
        g = self.materials.gamma_table[mid]
        pf = self.materials.pinf_table[mid]
        rho = q[:, :, 0]
        ke = 0.5 * (q[:, :, 1] ** 2 + q[:, :, 2] ** 2) / rho
        return (g - 1.0) * (q[:, :, 3] - ke) - g * pf

    def total_mass_energy(self) -> tuple[float, float]:
        """Planar-quadrature totals over interior cells."""
        cell = self.grid.d_r * self.grid.d_z
        return (float(self.interior(0).sum()) * cell,
                float(self.interior(3).sum()) * cell)

    @property
    def positivity_fallbacks(self) -> int:
        """Cells redone first-order because the full update lost positivity."""
        return int(self._ws.fallbacks.sum())


def state_from_primitive_fields(grid: GridSpec, materials: MaterialMap,
                                rho: np.ndarray, u_r: np.ndarray,
                                u_z: np.ndarray, p: np.ndarray,
                                options: Optional[SolverOptions] = None,
                                bcs: Optional[dict] = None) -> SimulationState:
    """Build a padded state from interior primitive fields (n_r, n_z)."""
    mid = materials.ids
    g = materials.gamma_table[mid]
    pf = materials.pinf_table[mid]
    nrt = grid.n_r + 2 * NG
    nzt = grid.n_z + 2 * NG
    q = np.zeros((nrt, nzt, 4))
    inner = q[NG:-NG, NG:-NG]
    inner[:, :, 0] = rho
    inner[:, :, 1] = rho * u_r
    inner[:, :, 2] = rho * u_z
    inner[:, :, 3] = (p + g * pf) / (g - 1.0) + 0.5 * rho * (u_r ** 2 + u_z ** 2)
    kwargs = {}
    if options is not None:
        kwargs["options"] = options
    if bcs is not None:
        kwargs["bcs"] = bcs
    return SimulationState(grid, materials, q, **kwargs)


def quiescent_state(grid: GridSpec, materials: MaterialMap, p_ambient: float,
                    options: Optional[SolverOptions] = None,
                    bcs: Optional[dict] = None) -> SimulationState:
    """Everything at rest at a uniform pressure, densities at material reference."""
    rho = materials.rho_ref_table[materials.ids]
    zero = np.zeros_like(rho)
    pfield = np.full_like(rho, p_ambient)
    return state_from_primitive_fields(grid, materials, rho, zero, zero, pfield,
                                       options, bcs)


def _raise_first_error(state: SimulationState, ws: _Workspace) -> None:
    rows = np.nonzero(ws.err_code)[0]
    if rows.size:
        j = int(rows[0])
        err = SolverError(int(ws.err_code[j]), j - NG, int(ws.err_i[j]) - NG,
                          state.step_count, state.t)
        ws.err_code[:] = 0
        ws.err_i[:] = 0
        raise err


def stable_dt(state: SimulationState, cfl: Optional[float] = None) -> float:
    """dt = cfl * min(d_r, d_z) / max over cells of (|u| + c)."""
    cfl = state.options.cfl if cfl is None else cfl
    if not 0.0 < cfl < 1.0:
        raise ValueError(f"cfl must be in (0, 1), got {cfl}")
    ws = state._ws
    k.rowwise_max_signal(state.q, state.materials.padded_ids,
                         state.materials.gamma_table, state.materials.pinf_table,
                         ws.rowmax, ws.err_code, ws.err_i)
    _raise_first_error(state, ws)
    smax = float(ws.rowmax[NG:-NG].max())
    return cfl * min(state.grid.d_r, state.grid.d_z) / smax


def _conserved_vector(w: PrimitiveState, m: MaterialParams) -> np.ndarray:
    E = (w.p + m.gamma * m.p_inf) / (m.gamma - 1.0) \
        + 0.5 * w.rho * (w.u_r ** 2 + w.u_z ** 2)
    return np.array([w.rho, w.rho * w.u_r, w.rho * w.u_z, E])


def apply_boundaries(state: SimulationState, profile: Optional[ShockProfile] = None) -> SimulationState:
    """Fill the two ghost layers on each side.

    reflect/axis mirror the interior with the normal momentum negated;
    outflow is zero-order extrapolation; inflow (z-min) is a Dirichlet
    ghost state from the shock profile at the current time.
    """
    q = state.q
    bcs = state.bcs

    def fill_side(axis: int, side: str, kind: str) -> None:
        sl = [slice(None), slice(None), slice(None)]
        n_axis = state.grid.n_r if axis == 0 else state.grid.n_z
        step = min(1, n_axis - 1)  # mirror source clamped for single-cell axes
        if side == "lo":
            pairs = ((1, NG), (0, NG + step))
        else:
            last = NG + n_axis - 1
            pairs = ((NG + n_axis, last), (NG + n_axis + 1, last - step))
        if kind in ("reflect", "axis"):
            mom = 1 if axis == 0 else 2
            for ghost, src in pairs:
                sl_g = list(sl)
                sl_s = list(sl)
                sl_g[axis] = ghost
                sl_s[axis] = src
                q[tuple(sl_g)] = q[tuple(sl_s)]
                sl_g[2] = mom
                q[tuple(sl_g)] *= -1.0
        elif kind == "outflow":
            src = NG if side == "lo" else NG + n_axis - 1
            for ghost, _ in pairs:
                sl_g = list(sl)
                sl_s = list(sl)
                sl_g[axis] = ghost
                sl_s[axis] = src
                q[tuple(sl_g)] = q[tuple(sl_s)]
        elif kind == "inflow":
            if profile is None:
                raise ValueError("inflow boundary needs a shock profile")
            air_mat = state.materials.table[0]
            w = inflow_state_from_overpressure(profile, air_mat, t=state.t)
            vec = _conserved_vector(w, air_mat)
            for ghost, _ in pairs:
                sl_g = list(sl)
                sl_g[axis] = ghost
                q[tuple(sl_g)] = vec
        else:
            raise ValueError(f"unknown boundary kind {kind!r}")

    fill_side(0, "lo", bcs["rmin"])
    fill_side(0, "hi", bcs["rmax"])
    fill_side(1, "lo", bcs["zmin"])
    fill_side(1, "hi", bcs["zmax"])
    return state


def advance(state: SimulationState, dt: float, t_exact: Optional[float] = None) -> SimulationState:
    """One full time step: homogeneous unsplit update, then the source step.

    Ghost cells must be current (apply_boundaries).  On failure the state
    keeps the last stable field and a SolverError is raised.
    """
    opts = state.options
    ws = state._ws
    mats = state.materials

    def run_source(arr: np.ndarray, dts: float) -> None:
        k.source_step_grid(arr, mats.padded_ids, mats.gamma_table, mats.pinf_table,
                           state._r_pad, dts, ws.err_code, ws.err_i)
        _raise_first_error(state, ws)

    if opts.source and opts.strang:
        run_source(state.q, 0.5 * dt)

    k.step_homogeneous(
        state.q, state._qnew, mats.padded_ids, mats.gamma_table, mats.pinf_table,
        state.grid.d_r, state.grid.d_z, dt,
        opts.second_order, opts.transverse, opts.limiter == "mc",
        opts.exact_tol, opts.exact_max_iter,
        ws.pres, ws.cs, ws.vr, ws.vz,
        ws.amdq_z, ws.apdq_z, ws.amdq_r, ws.apdq_r,
        ws.waves, ws.sp, ws.fflux, ws.gflux,
        ws.bpap, ws.bmap, ws.bpam, ws.bmam,
        ws.err_code, ws.err_i, ws.fallbacks)
    _raise_first_error(state, ws)

    if opts.source:
        run_source(state._qnew, 0.5 * dt if opts.strang else dt)

    state.q, state._qnew = state._qnew, state.q
    state.t = (state.t + dt) if t_exact is None else t_exact
    state.step_count += 1
    return state


def homogeneous_step(state: SimulationState, dt: float) -> SimulationState:
    """The homogeneous substep alone (conservation tests, split diagnostics)."""
    saved = state.options.source
    state.options.source = False
    try:
        return advance(state, dt)
    finally:
        state.options.source = saved


def run(state: SimulationState, t_end: float,
        frame_times: Sequence[float] = (),
        profile: Optional[ShockProfile] = None,
        recorder=None,
        max_steps: int = 10_000_000,
        on_failure: Optional[Callable] = None) -> SimulationState:
    """Time loop with CFL control; dt is clipped to hit frame times exactly.

    ``recorder`` may define on_start(state), on_step(state),
    on_frame(state, index, t) and is invoked in that order.  On solver
    failure, partial outputs are flushed via ``on_failure(state)`` (if
    given) and the error re-raised.
    """
    frames = sorted(t for t in frame_times if t > state.t)
    next_frame = 0
    eps = 1e-12
    if recorder is not None and hasattr(recorder, "on_start"):
        apply_boundaries(state, profile)
        recorder.on_start(state)
    try:
        while state.t < t_end * (1.0 - eps) and state.step_count < max_steps:
            apply_boundaries(state, profile)
            dt = stable_dt(state)
            target = None
            if next_frame < len(frames) and frames[next_frame] <= state.t + dt:
                target = frames[next_frame]
            elif state.t + dt >= t_end:
                target = t_end
            if target is not None:
                dt = target - state.t
            advance(state, dt, t_exact=target)
            if recorder is not None:
                recorder.on_step(state)
            while next_frame < len(frames) and state.t >= frames[next_frame] * (1.0 - eps):
                if recorder is not None:
                    recorder.on_frame(state, next_frame, frames[next_frame])
                next_frame += 1
    except SolverError:
        if on_failure is not None:
            on_failure(state)
        raise
    return state
