"""Per-frame panels: mirrored pressure pseudocolor plus the axis trace."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import P_ATM, PA_PER_PSI, VizDataError, list_frames, read_frame, vapor_pressure_psi
from .style import STYLE


def render_frames(run_dir: str, out_dir: str) -> dict:
    """One PNG per frame: pseudocolor + contours of gauge pressure (psi)
    over (z, r) mirrored across the axis, with the axis pressure trace and
    the vapor-pressure line below.  Distances in cm.
    """
    indices = list_frames(run_dir)
    if not indices:
        raise VizDataError(f"no frames found in {run_dir}")
    os.makedirs(out_dir, exist_ok=True)
    vapor_psi = vapor_pressure_psi(run_dir)
    files = []
    report = {"frames": [], "vapor_psi": vapor_psi}
    for idx in indices:
        meta, fields = read_frame(run_dir, idx)
        n_r, n_z = meta["shape_rz"]
        d_r, d_z = meta["d_r"], meta["d_z"]
        z0 = meta.get("z_origin", 0.0)
        p_psi = (fields["p"] - P_ATM) / PA_PER_PSI
        if not np.isfinite(p_psi).all():
            raise VizDataError(f"frame {idx} contains non-finite pressures")
        mirrored = np.vstack([p_psi[::-1], p_psi])
        z_cm = (z0 + np.arange(n_z + 1) * d_z) * 100.0
        r_cm = (np.arange(-n_r, n_r + 1) * d_r) * 100.0

        fig, (ax_field, ax_trace) = plt.subplots(
            2, 1, figsize=(7.2, 6.4), height_ratios=[2.2, 1.0], constrained_layout=True)
        mesh = ax_field.pcolormesh(z_cm, r_cm, mirrored, cmap=STYLE["cmap"],
                                   shading="flat")
        span = float(p_psi.max() - p_psi.min())
        if span > 1e-12:
            ax_field.contour(
                (z0 + (np.arange(n_z) + 0.5) * d_z) * 100.0,
                (np.concatenate([-(np.arange(n_r)[::-1] + 0.5), np.arange(n_r) + 0.5]) * d_r) * 100.0,
                mirrored, levels=STYLE["contour_levels"],
                colors=STYLE["contour_color"], linewidths=STYLE["contour_lw"])
        fig.colorbar(mesh, ax=ax_field, label="pressure [psi]")
        ax_field.set_xlabel("z [cm]")
        ax_field.set_ylabel("r [cm]")
        t_us = meta["time_s"] * 1e6
        ax_field.set_title(f"t = {t_us:.1f} us")

        z_centers_cm = (z0 + (np.arange(n_z) + 0.5) * d_z) * 100.0
        axis_trace = p_psi[0, :]
        ax_trace.plot(z_centers_cm, axis_trace, **STYLE["axis_trace_style"])
        ax_trace.axhline(vapor_psi, **STYLE["vapor_style"])
        ax_trace.set_xlabel("z [cm]")
        ax_trace.set_ylabel("axis pressure [psi]")

        path = os.path.join(out_dir, f"frames_frame_{idx:04d}.png")
        meta_png = {"shockcell-viz": json.dumps({
            "type": "frame", "time_us": t_us,
            "units": {"distance": "cm", "pressure": "psi"},
            "vapor_psi": vapor_psi,
        })}
        fig.savefig(path, dpi=STYLE["dpi"], metadata=meta_png)
        plt.close(fig)
        files.append(path)
        report["frames"].append({
            "index": idx,
            "time_us": t_us,
            "axis_min_psi": float(axis_trace.min()),
            "axis_cells_below_vapor": int((axis_trace < vapor_psi).sum()),
            "xlabel": "z [cm]",
            "ylabel": "r [cm]",
        })
    report["files"] = files
    return report
