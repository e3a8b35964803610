"""Gauge time-series overlays: baseline vs hydrophone runs."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import VizDataError, list_gauge_ids, read_gauge, vapor_pressure_psi
from .style import LINE_CONVENTION, STYLE


def render_gauges(baseline_dir: str, hydrophone_dir: str | None, out_dir: str) -> dict:
    """One overlay figure, one panel per gauge.

    Baseline traces solid, hydrophone traces dashed, the vapor pressure
    as a thick dashed line; time in microseconds, pressure in gauge psi.
    """
    ids = list_gauge_ids(baseline_dir)
    if not ids:
        raise VizDataError(f"no gauge files in {baseline_dir}")
    if hydrophone_dir is not None:
        ids_h = list_gauge_ids(hydrophone_dir)
        if set(ids_h) != set(ids):
            raise VizDataError(
                f"gauge sets differ: baseline {ids} vs hydrophone {ids_h}")
    os.makedirs(out_dir, exist_ok=True)
    vapor_psi = vapor_pressure_psi(baseline_dir)

    fig, axes = plt.subplots(len(ids), 1, figsize=(7.0, 2.4 * len(ids)),
                             sharex=True, constrained_layout=True)
    axes = np.atleast_1d(axes)
    report = {"gauges": [], "vapor_psi": vapor_psi,
              "line_convention": dict(LINE_CONVENTION),
              "overlay": hydrophone_dir is not None}
    for ax, gid in zip(axes, ids):
        base = read_gauge(baseline_dir, gid)
        if not np.isfinite(base["p_gauge_psi"]).all():
            raise VizDataError(f"gauge {gid} holds non-finite samples")
        ax.plot(base["t_us"], base["p_gauge_psi"],
                label="baseline", **STYLE["baseline_style"])
        entry = {"id": gid, "baseline_min_psi": float(base["p_gauge_psi"].min())}
        if hydrophone_dir is not None:
            hyd = read_gauge(hydrophone_dir, gid)
            ax.plot(hyd["t_us"], hyd["p_gauge_psi"],
                    label="with hydrophone", **STYLE["hydrophone_style"])
            entry["hydrophone_min_psi"] = float(hyd["p_gauge_psi"].min())
        ax.axhline(vapor_psi, label="vapor pressure", **STYLE["vapor_style"])
        ax.set_ylabel(f"{gid} [psi]")
        ax.legend(loc="upper right", fontsize=8)
        report["gauges"].append(entry)
    axes[-1].set_xlabel("t [us]")

    path = os.path.join(out_dir, "gauges_gauge_overlay.png")
    meta_png = {"shockcell-viz": json.dumps({
        "type": "gauges",
        "line_convention": LINE_CONVENTION,
        "units": {"time": "us", "pressure": "psi"},
        "gauges": ids,
    })}
    fig.savefig(path, dpi=STYLE["dpi"], metadata=meta_png)
    plt.close(fig)
    report["files"] = [path]
    return report
