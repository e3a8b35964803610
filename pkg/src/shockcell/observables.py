"""Gauges, frame snapshots, axis slices, cavitation metrics, and file formats.

On-disk formats (all little-endian float64 unless noted):

* ``frame_####.bin`` + ``frame_####.json`` -- five arrays (rho, mom_r,
  mom_z, E, p), each n_r*n_z values with the radial index varying
  fastest; the JSON sidecar carries shape, spacings, time and variable
  list.
* ``materials.bin`` + ``materials.json`` -- uint8 material ids, same layout.
* ``gauge_<id>.csv`` -- header ``t_us,p_abs_pa,p_gauge_psi``, 17
  significant digits.
* ``cavitation.csv`` -- one row per accepted step:
  ``t_us,min_p_water_pa,below_vapor_count``.
* ``axis_####.csv`` -- per-frame axis slice, one row per z cell.

Gauges are strictly non-invasive: they read cell values and never touch
the simulation state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from ._kernels import NG
from .domain import ConfigError, GridSpec, MaterialMap, POLY_ID, WATER_ID
from .eos import P_ATM, PA_PER_PSI
from .stepper import SimulationState

_FRAME_VARIABLES = ["rho", "mom_r", "mom_z", "E", "p"]


@dataclass(frozen=True)
class GaugeSpec:
    """A pressure probe at (r, z), resolved to the nearest cell center."""

    id: str
    r: float
    z: float


@dataclass
class ResolvedGauge:
    spec: GaugeSpec
    cell: tuple[int, int]     # interior (j, i)
    irrelevant: bool          # inside the hydrophone rod


@dataclass
class GaugeSeries:
    gauge_id: str
    irrelevant: bool
    t: list[float]
    p_abs: list[float]

    def p_gauge_psi(self) -> list[float]:
        return [(p - P_ATM) / PA_PER_PSI for p in self.p_abs]


def resolve_gauges(grid: GridSpec, materials: MaterialMap,
                   specs: list[GaugeSpec]) -> list[ResolvedGauge]:
    """Nearest-cell resolution (ties toward the lower index); out-of-domain
    positions are a configuration error.  Gauges inside the polystyrene rod
    are flagged irrelevant but still recorded."""
    out = []
    for s in specs:
        if not (0.0 <= s.r <= grid.r_max and grid.z_origin <= s.z <= grid.z_max):
            raise ConfigError(f"gauge {s.id!r} at (r={s.r}, z={s.z}) is outside the domain")
        cell = grid.nearest_cell(s.r, s.z)
        irrelevant = materials.ids[cell] == POLY_ID
        out.append(ResolvedGauge(s, cell, bool(irrelevant)))
    return out


def sample_gauges(state: SimulationState, gauges: list[ResolvedGauge]) -> list[float]:
    """Absolute pressures at the gauge cells; no effect on the state."""
    out = []
    mats = state.materials
    for g in gauges:
        j, i = g.cell
        q = state.q[j + NG, i + NG]
        mid = mats.ids[j, i]
        gam = mats.gamma_table[mid]
        pf = mats.pinf_table[mid]
        ke = 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0]
        out.append((gam - 1.0) * (q[3] - ke) - gam * pf)
    return out


def cavitation_metrics(state: SimulationState, p_vapor: float):
    """(min water pressure, below-vapor count, below-vapor mask) over water cells.

    Returns (None, 0, zero mask) when the map holds no water.
    """
    if not p_vapor > 0.0:
        raise ValueError("p_vapor must be positive")
    mask_water = state.materials.ids == WATER_ID
    below = np.zeros_like(mask_water)
    if not mask_water.any():
        return None, 0, below
    p = state.pressure_field()
    pw = p[mask_water]
    below[mask_water] = pw < p_vapor
    return float(pw.min()), int(np.count_nonzero(pw < p_vapor)), below


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_frame(outdir: str, index: int, state: SimulationState) -> tuple[str, str]:
    """Frame payload (5 float64 arrays, radial index fastest) plus JSON sidecar."""
    grid = state.grid
    q = state.q[NG:-NG, NG:-NG]
    p = state.pressure_field()
    fields = [q[:, :, 0], q[:, :, 1], q[:, :, 2], q[:, :, 3], p]
    payload = b"".join(np.ascontiguousarray(f.T, dtype="<f8").tobytes() for f in fields)
    bin_path = os.path.join(outdir, f"frame_{index:04d}.bin")
    json_path = os.path.join(outdir, f"frame_{index:04d}.json")
    with open(bin_path, "wb") as fh:
        fh.write(payload)
    meta = {
        "format": "shockcell-frame-v1",
        "frame_index": index,
        "time_s": state.t,
        "shape_rz": [grid.n_r, grid.n_z],
        "d_r": grid.d_r,
        "d_z": grid.d_z,
        "z_origin": grid.z_origin,
        "variables": _FRAME_VARIABLES,
        "dtype": "<f8",
        "layout": "z-major, radial index varying fastest",
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
    return bin_path, json_path


def read_frame(outdir: str, index: int) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of write_frame; arrays come back shaped (n_r, n_z)."""
    with open(os.path.join(outdir, f"frame_{index:04d}.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    n_r, n_z = meta["shape_rz"]
    raw = np.fromfile(os.path.join(outdir, f"frame_{index:04d}.bin"), dtype="<f8")
    fields = {}
    for kvar, name in enumerate(meta["variables"]):
        block = raw[kvar * n_r * n_z:(kvar + 1) * n_r * n_z]
        fields[name] = block.reshape(n_z, n_r).T.copy()
    return meta, fields


def write_materials(outdir: str, grid: GridSpec, materials: MaterialMap) -> None:
    with open(os.path.join(outdir, "materials.bin"), "wb") as fh:
        fh.write(np.ascontiguousarray(materials.ids.T).tobytes())
    meta = {
        "format": "shockcell-materials-v1",
        "shape_rz": [grid.n_r, grid.n_z],
        "d_r": grid.d_r,
        "d_z": grid.d_z,
        "z_origin": grid.z_origin,
        "dtype": "u1",
        "layout": "z-major, radial index varying fastest",
        "labels": [m.label for m in materials.table],
    }
    with open(os.path.join(outdir, "materials.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)


def write_gauge_series(outdir: str, series: GaugeSeries) -> str:
    path = os.path.join(outdir, f"gauge_{series.gauge_id}.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t_us,p_abs_pa,p_gauge_psi\n")
        for t, p in zip(series.t, series.p_abs):
            fh.write(f"{_fmt(t * 1e6)},{_fmt(p)},{_fmt((p - P_ATM) / PA_PER_PSI)}\n")
    return path


def read_gauge_series(path: str) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def write_axis_slice(outdir: str, index: int, state: SimulationState) -> str:
    """Pressure along the axis row (first interior radial cell), one row per z cell."""
    path = os.path.join(outdir, f"axis_{index:04d}.csv")
    p = state.pressure_field()[0, :]
    z = state.grid.z_centers
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("z_m,p_abs_pa,p_gauge_psi\n")
        for zi, pi in zip(z, p):
            fh.write(f"{_fmt(zi)},{_fmt(pi)},{_fmt((pi - P_ATM) / PA_PER_PSI)}\n")
    return path


class RunRecorder:
    """Writes gauges, per-step cavitation metrics, frames and axis slices."""

    def __init__(self, outdir: str, grid: GridSpec, materials: MaterialMap,
                 gauge_specs: list[GaugeSpec], p_vapor: float,
                 frames: bool = True, axis_slices: bool = True):
        self.outdir = outdir
        os.makedirs(outdir, exist_ok=True)
        self.p_vapor = p_vapor
        self.frames = frames
        self.axis_slices = axis_slices
        self.gauges = resolve_gauges(grid, materials, gauge_specs)
        self.series = [GaugeSeries(g.spec.id, g.irrelevant, [], []) for g in self.gauges]
        self.has_water = bool((materials.ids == WATER_ID).any())
        self._water_mask = materials.ids == WATER_ID
        self.cav_rows: list[tuple[float, float, int]] = []
        self.frame_files: list[str] = []
        write_materials(outdir, grid, materials)

    def _record(self, state: SimulationState) -> None:
        for s, p in zip(self.series, sample_gauges(state, self.gauges)):
            s.t.append(state.t)
            s.p_abs.append(p)
        if self.has_water:
            p = state.pressure_field()
            pw = p[self._water_mask]
            self.cav_rows.append(
                (state.t, float(pw.min()), int(np.count_nonzero(pw < self.p_vapor))))

    def on_start(self, state: SimulationState) -> None:
        self._record(state)

    def on_step(self, state: SimulationState) -> None:
        self._record(state)

    def on_frame(self, state: SimulationState, index: int, t_requested: float) -> None:
        if self.frames:
            self.frame_files.append(write_frame(self.outdir, index, state)[0])
        if self.axis_slices:
            write_axis_slice(self.outdir, index, state)

    def finalize(self) -> dict:
        paths = [write_gauge_series(self.outdir, s) for s in self.series]
        if self.has_water:
            cav = os.path.join(self.outdir, "cavitation.csv")
            with open(cav, "w", encoding="utf-8") as fh:
                fh.write("t_us,min_p_water_pa,below_vapor_count\n")
                for t, pmin, n in self.cav_rows:
                    fh.write(f"{_fmt(t * 1e6)},{_fmt(pmin)},{n}\n")
        return {
            "gauges": [
                {"id": g.spec.id, "r": g.spec.r, "z": g.spec.z,
                 "cell": list(g.cell), "irrelevant": g.irrelevant}
                for g in self.gauges
            ],
            "gauge_files": paths,
            "frame_files": self.frame_files,
        }
