"""Grid specification, material map, and scenario construction.

The scenario is a shock-tube cross section: an axisymmetric (r, z)
rectangle of air with an embedded water-filled cylindrical transwell and
an optional polystyrene hydrophone rod on the axis.  All material
boundaries are snapped to cell edges and the map is immutable for the
whole run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import NG
from .eos import (
    MaterialParams,
    P_ATM,
    PA_PER_PSI,
    PrimitiveState,
    air,
    polystyrene,
    water,
)

AIR_ID, WATER_ID, POLY_ID = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration (geometry, resolution, or file contents)."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid; centers at r=(j+1/2)d_r, z=z_origin+(i+1/2)d_z."""

    n_r: int
    n_z: int
    d_r: float
    d_z: float
    z_origin: float = 0.0

    def __post_init__(self) -> None:
        if self.n_r < 1 or self.n_z < 1:
            raise ConfigError(f"cell counts must be >= 1, got {self.n_r}x{self.n_z}")
        if self.d_r <= 0.0 or self.d_z <= 0.0:
            raise ConfigError("cell sizes must be positive")

    @property
    def r_max(self) -> float:
        return self.n_r * self.d_r

    @property
    def z_max(self) -> float:
        return self.z_origin + self.n_z * self.d_z

    @property
    def r_centers(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.d_r

    @property
    def z_centers(self) -> np.ndarray:
        return self.z_origin + (np.arange(self.n_z) + 0.5) * self.d_z

    def r_centers_padded(self) -> np.ndarray:
        """Cell-center radii including ghost rows (ghost radii mirror/extend)."""
        return (np.arange(self.n_r + 2 * NG) - NG + 0.5) * self.d_r

    def nearest_cell(self, r: float, z: float) -> tuple[int, int]:
        """Nearest cell center, ties toward the lower index."""
        j = math.ceil(r / self.d_r - 1.0)
        i = math.ceil((z - self.z_origin) / self.d_z - 1.0)
        return min(max(j, 0), self.n_r - 1), min(max(i, 0), self.n_z - 1)


_PAD_MIRROR = ("reflect", "axis")


class MaterialMap:
    """Per-cell material ids (immutable) plus the padded ghost extension."""

    def __init__(self, table: tuple[MaterialParams, ...], ids: np.ndarray,
                 bcs: dict[str, str]):
        self.table = table
        self.gamma_table = np.array([m.gamma for m in table])
        self.pinf_table = np.array([m.p_inf for m in table])
        self.rho_ref_table = np.array([m.rho_ref for m in table])
        ids = np.ascontiguousarray(ids, dtype=np.uint8)
        n_r, n_z = ids.shape
        padded = np.empty((n_r + 2 * NG, n_z + 2 * NG), dtype=np.uint8)
        padded[NG:-NG, NG:-NG] = ids

        def pad_axis(axis: int, n: int, lo_kind: str, hi_kind: str) -> None:
            step = min(1, n - 1)

            def col(idx):
                return (idx, slice(None)) if axis == 0 else (slice(None), idx)

            lo_srcs = (NG, NG + step) if lo_kind in _PAD_MIRROR else (NG, NG)
            padded[col(1)] = padded[col(lo_srcs[0])]
            padded[col(0)] = padded[col(lo_srcs[1])]
            last = NG + n - 1
            hi_srcs = (last, last - step) if hi_kind in _PAD_MIRROR else (last, last)
            padded[col(NG + n)] = padded[col(hi_srcs[0])]
            padded[col(NG + n + 1)] = padded[col(hi_srcs[1])]

        pad_axis(0, n_r, bcs.get("rmin", "axis"), bcs.get("rmax", "outflow"))
        pad_axis(1, n_z, bcs.get("zmin", "inflow"), bcs.get("zmax", "outflow"))
        ids.flags.writeable = False
        padded.flags.writeable = False
        self.ids = ids
        self.padded_ids = padded

    def material_of(self, mid: int) -> MaterialParams:
        return self.table[mid]

    def count(self, mid: int) -> int:
        return int(np.count_nonzero(self.ids == mid))

    def present_ids(self) -> set[int]:
        return set(int(v) for v in np.unique(self.ids))


@dataclass(frozen=True)
class ScenarioGeometry:
    """Snapped scenario geometry plus the snapping displacements."""

    transwell_z: tuple[float, float]
    transwell_radius: float
    hydrophone_enabled: bool
    hydrophone_radius: float
    hydrophone_z: tuple[float, float]
    domain_z: tuple[float, float]
    domain_r: float
    snapping: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ShockProfile:
    """Incident shock description fed to the inflow boundary.

    ``kind`` is "step-hold" (constant post-shock state) or
    "step-exponential" (overpressure decaying with time constant tau).
    """

    peak_overpressure: float
    kind: str = "step-hold"
    tau: Optional[float] = None
    ambient: PrimitiveState = PrimitiveState(1.2, 0.0, 0.0, P_ATM)
    t_arrival: float = 0.0

    def __post_init__(self) -> None:
        if not self.peak_overpressure > 0.0:
            raise ConfigError("peak overpressure must be positive")
        if self.kind not in ("step-hold", "step-exponential"):
            raise ConfigError(f"unknown shock profile kind {self.kind!r}")
        if self.kind == "step-exponential" and not (self.tau and self.tau > 0.0):
            raise ConfigError("step-exponential profile needs tau > 0")

    def overpressure_at(self, t: float) -> float:
        if t < self.t_arrival:
            return 0.0
        if self.kind == "step-hold":
            return self.peak_overpressure
        return self.peak_overpressure * math.exp(-(t - self.t_arrival) / self.tau)


def post_shock_state(overpressure: float, ambient: PrimitiveState,
                     m: MaterialParams) -> PrimitiveState:
    """Post-shock (rho2, u2, p2) from the Rankine-Hugoniot relations.

    The shock moves in +z into the quiescent ambient state; valid for any
    Tammann material (air is the p_inf = 0 case).
    """
    g, pf = m.gamma, m.p_inf
    p1, r1 = ambient.p, ambient.rho
    p2 = p1 + overpressure
    a1 = 2.0 / ((g + 1.0) * r1)
    b1 = ((g - 1.0) * p1 + 2.0 * g * pf) / (g + 1.0)
    u2 = overpressure * math.sqrt(a1 / (p2 + b1))
    w = (p2 + pf) / (p1 + pf)
    gm = (g - 1.0) / (g + 1.0)
    r2 = r1 * ((w + gm) / (gm * w + 1.0))
    return PrimitiveState(r2, 0.0, ambient.u_z + u2, p2)


def shock_speed(overpressure: float, ambient: PrimitiveState, m: MaterialParams) -> float:
    """Propagation speed of the Rankine-Hugoniot shock of the given strength."""
    g, pf = m.gamma, m.p_inf
    w = (ambient.p + overpressure + pf) / (ambient.p + pf)
    c1 = math.sqrt(g * (ambient.p + pf) / ambient.rho)
    return ambient.u_z + c1 * math.sqrt((g + 1.0) / (2.0 * g) * w + (g - 1.0) / (2.0 * g))


def inflow_state_from_overpressure(profile: ShockProfile, air_mat: MaterialParams,
                                   t: Optional[float] = None) -> PrimitiveState:
    """Inflow ghost state: ambient before arrival, post-shock after.

    With ``t`` omitted, the state for the peak overpressure is returned.
    """
    if t is None:
        dp = profile.peak_overpressure
    else:
        dp = profile.overpressure_at(t)
    if dp <= 0.0:
        return profile.ambient
    return post_shock_state(dp, profile.ambient, air_mat)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_DEFAULTS: dict = {
    "grid": {"n_r": 200, "n_z": 400, "r_max": 0.02, "z_min": 0.0, "z_max": 0.04},
    "geometry": {
        "transwell_z": [0.010, 0.027],
        "transwell_radius": 0.0085,
        "hydrophone": {"enabled": False, "radius": 0.001425,
                       "z_tip": None, "z_end": None},
    },
    "materials": {
        "air": {"gamma": 1.4, "p_inf": 0.0, "rho_ref": 1.2},
        "water": {"gamma": 7.15, "p_inf": 0.3e9, "rho_ref": 1000.0},
        "polystyrene": {"gamma": 1.1, "p_inf": 4.79e9, "rho_ref": 1050.0},
    },
    "shock": {"peak_psi": 13.0, "kind": "step-hold", "tau_us": None,
              "t_arrival_us": 0.0, "ambient_p": P_ATM},
    "numerics": {"cfl": 0.45, "limiter": "mc", "second_order": True,
                 "transverse": True, "source": True, "strang": False},
    "output": {
        "frame_times_us": [30.0, 60.0, 63.2, 69.6, 84.8, 134.4],
        "gauges": [
            {"id": "gauge1", "r": 0.0, "z": 0.011},
            {"id": "gauge2", "r": 0.0, "z": 0.0185},
            {"id": "gauge3", "r": 0.0, "z": 0.0213},
        ],
        "p_vapor": 2339.0,
    },
    "t_end_us": 134.4,
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


@dataclass
class SimulationConfig:
    """Resolved scenario configuration (defaults merged with user input)."""

    raw: dict

    @classmethod
    def default(cls) -> "SimulationConfig":
        return cls(json.loads(json.dumps(_DEFAULTS)))

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        if not isinstance(d, dict):
            raise ConfigError("config root must be a JSON object")
        # deep copy so later mutation cannot alias the module defaults
        return cls(json.loads(json.dumps(_merge(_DEFAULTS, d))))

    @classmethod
    def from_json_file(cls, path: str) -> "SimulationConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.raw))

    # -- typed accessors ----------------------------------------------------

    def materials(self) -> tuple[MaterialParams, MaterialParams, MaterialParams]:
        ms = self.raw["materials"]
        try:
            return (
                MaterialParams("air", **ms["air"]),
                MaterialParams("water", **ms["water"]),
                MaterialParams("polystyrene", **ms["polystyrene"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad material parameters: {exc}") from exc

    def grid(self) -> GridSpec:
        g = self.raw["grid"]
        n_r, n_z = int(g["n_r"]), int(g["n_z"])
        span_r = float(g["r_max"])
        span_z = float(g["z_max"]) - float(g["z_min"])
        if span_r <= 0 or span_z <= 0:
            raise ConfigError("domain extents must be positive")
        return GridSpec(n_r, n_z, span_r / n_r, span_z / n_z, float(g["z_min"]))

    def shock_profile(self) -> ShockProfile:
        s = self.raw["shock"]
        air_mat = self.materials()[0]
        ambient = PrimitiveState(air_mat.rho_ref, 0.0, 0.0, float(s["ambient_p"]))
        tau = s["tau_us"]
        return ShockProfile(
            peak_overpressure=float(s["peak_psi"]) * PA_PER_PSI,
            kind=s["kind"],
            tau=None if tau is None else float(tau) * 1e-6,
            ambient=ambient,
            t_arrival=float(s["t_arrival_us"]) * 1e-6,
        )

    def p_vapor(self) -> float:
        return float(self.raw["output"]["p_vapor"])

    def frame_times(self) -> list[float]:
        return [float(t) * 1e-6 for t in self.raw["output"]["frame_times_us"]]

    def t_end(self) -> float:
        return float(self.raw["t_end_us"]) * 1e-6

    def gauge_positions(self) -> list[dict]:
        return list(self.raw["output"]["gauges"])


def _snap(x: float, origin: float, d: float) -> tuple[float, float]:
    k = round((x - origin) / d)
    snapped = origin + k * d
    return snapped, abs(snapped - x)


def build_scenario(config: SimulationConfig) -> tuple[GridSpec, MaterialMap, ScenarioGeometry]:
    """Grid, material map, and snapped geometry for the transwell scenario.

    Material boundaries snap to the nearest cell edge (never more than
    half a cell); the polystyrene transwell wall is omitted.  Raises
    ConfigError for geometry outside the domain or a hydrophone too
    coarse to resolve with at least 2 radial cells.
    """
    grid = config.grid()
    if grid.n_r < 4 or grid.n_z < 4:
        raise ConfigError("scenario grids need at least 4 cells per direction")
    geo = config.raw["geometry"]
    za, zb = (float(v) for v in geo["transwell_z"])
    r_tw = float(geo["transwell_radius"])
    if r_tw <= 0.0:
        raise ConfigError("transwell radius must be positive")
    if not (grid.z_origin < za < zb < grid.z_max):
        raise ConfigError("transwell must lie strictly inside the domain axially")
    if not r_tw < grid.r_max:
        raise ConfigError("transwell radius must be smaller than the domain radius")

    snapping: dict[str, float] = {}
    za_s, snapping["transwell_z_min"] = _snap(za, grid.z_origin, grid.d_z)
    zb_s, snapping["transwell_z_max"] = _snap(zb, grid.z_origin, grid.d_z)
    r_tw_s, snapping["transwell_radius"] = _snap(r_tw, 0.0, grid.d_r)
    if not (zb_s - za_s >= grid.d_z and r_tw_s >= grid.d_r):
        raise ConfigError("resolution too coarse to resolve the transwell")

    mats = config.materials()
    r_c = grid.r_centers
    z_c = grid.z_centers
    ids = np.full((grid.n_r, grid.n_z), AIR_ID, dtype=np.uint8)
    in_r = r_c < r_tw_s
    in_z = (z_c > za_s) & (z_c < zb_s)
    ids[np.ix_(in_r, in_z)] = WATER_ID

    hyd = geo["hydrophone"]
    hyd_enabled = bool(hyd["enabled"])
    r_h_s = 0.0
    zh = (0.0, 0.0)
    if hyd_enabled:
        r_h = float(hyd["radius"])
        z_tip = hyd["z_tip"]
        z_end = hyd["z_end"]
        z_tip = 0.5 * (za_s + zb_s) if z_tip is None else float(z_tip)
        z_end = zb_s if z_end is None else float(z_end)
        r_h_s, snapping["hydrophone_radius"] = _snap(r_h, 0.0, grid.d_r)
        z_tip_s, snapping["hydrophone_z_tip"] = _snap(z_tip, grid.z_origin, grid.d_z)
        z_end_s, snapping["hydrophone_z_end"] = _snap(z_end, grid.z_origin, grid.d_z)
        if r_h_s < 2.0 * grid.d_r:
            raise ConfigError("resolution too coarse: hydrophone radius needs >= 2 cells")
        # the sensing tip sits in the water; the shaft may pierce the distal
        # face and run out to the domain edge
        if not (za_s <= z_tip_s < zb_s and z_tip_s < z_end_s <= grid.z_max):
            raise ConfigError("hydrophone tip must lie inside the transwell water region")
        if not r_h_s < r_tw_s:
            raise ConfigError("hydrophone radius must be smaller than the transwell radius")
        in_rh = r_c < r_h_s
        in_zh = (z_c > z_tip_s) & (z_c < z_end_s)
        ids[np.ix_(in_rh, in_zh)] = POLY_ID
        zh = (z_tip_s, z_end_s)

    bcs = {"rmin": "axis", "rmax": "outflow", "zmin": "inflow", "zmax": "outflow"}
    mat_map = MaterialMap(mats, ids, bcs)
    geometry = ScenarioGeometry(
        transwell_z=(za_s, zb_s),
        transwell_radius=r_tw_s,
        hydrophone_enabled=hyd_enabled,
        hydrophone_radius=r_h_s,
        hydrophone_z=zh,
        domain_z=(grid.z_origin, grid.z_max),
        domain_r=grid.r_max,
        snapping=snapping,
    )
    return grid, mat_map, geometry


def uniform_material_map(grid: GridSpec, m: MaterialParams,
                         bcs: dict[str, str]) -> MaterialMap:
    """Single-material map (test domains, pure-air boxes)."""
    table = (m, water(), polystyrene()) if m.label == "air" else (air(), m, polystyrene())
    mid = AIR_ID if m.label == "air" else WATER_ID
    ids = np.full((grid.n_r, grid.n_z), mid, dtype=np.uint8)
    return MaterialMap(table, ids, bcs)


def slab_material_map(grid: GridSpec, z_breaks: list[float], layer_ids: list[int],
                      materials: tuple[MaterialParams, ...],
                      bcs: dict[str, str]) -> MaterialMap:
    """Axial slabs (e.g. air|water|air for the 1D verification problem)."""
    if len(layer_ids) != len(z_breaks) + 1:
        raise ConfigError("need one more layer than breaks")
    z_c = grid.z_centers
    cols = np.full(grid.n_z, layer_ids[0], dtype=np.uint8)
    for brk, lid in zip(z_breaks, layer_ids[1:]):
        cols[z_c > brk] = lid
    ids = np.tile(cols, (grid.n_r, 1))
    return MaterialMap(materials, ids, bcs)
