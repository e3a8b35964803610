"""Resolution-study overlay with zoom insets at the steepest gradients."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import VizDataError, read_profiles
from .style import STYLE


def _steepest_windows(z, p, n_windows=2, half_width_frac=0.04):
    """Centers of the two steepest-|dp/dz| regions, kept apart."""
    grad = np.abs(np.gradient(p, z))
    half = max(3, int(half_width_frac * len(z)))
    centers = []
    work = grad.copy()
    for _ in range(n_windows):
        idx = int(np.argmax(work))
        centers.append(idx)
        lo, hi = max(0, idx - 3 * half), min(len(z), idx + 3 * half)
        work[lo:hi] = 0.0
    return [(max(0, c - half), min(len(z), c + half)) for c in sorted(centers)]


def render_convergence(run_dir: str, out_dir: str) -> dict:
    """Overlaid per-resolution pressure profiles plus the exact reference,
    with zoom insets centered on the finest profile's steepest gradients."""
    runs, exact = read_profiles(run_dir)
    os.makedirs(out_dir, exist_ok=True)
    cells = sorted(runs)
    for n, data in runs.items():
        if not np.isfinite(data["p_gauge_psi"]).all():
            raise VizDataError(f"profile N={n} holds non-finite values")

    fig, ax = plt.subplots(figsize=(8.0, 5.2), constrained_layout=True)
    for color, n in zip(STYLE["resolution_colors"], cells):
        data = runs[n]
        ax.plot(data["z_m"] * 100.0, data["p_gauge_psi"],
                color=color, linewidth=1.1, label=f"{n} cells")
    if exact is not None:
        ax.plot(exact["z_m"] * 100.0, exact["p_gauge_psi"],
                color="k", linestyle=":", linewidth=1.4, label="exact")
    ax.set_xlabel("z [cm]")
    ax.set_ylabel("pressure [psi]")
    ax.legend(loc="best", fontsize=9)

    finest = runs[cells[-1]]
    zf = finest["z_m"] * 100.0
    pf = finest["p_gauge_psi"]
    insets = []
    for k, (lo, hi) in enumerate(_steepest_windows(zf, pf)):
        axi = ax.inset_axes([0.08 + 0.5 * k, 0.08, 0.34, 0.34])
        for color, n in zip(STYLE["resolution_colors"], cells):
            data = runs[n]
            zc = data["z_m"] * 100.0
            sel = (zc >= zf[lo]) & (zc <= zf[hi - 1])
            axi.plot(zc[sel], data["p_gauge_psi"][sel], color=color, linewidth=1.0)
        if exact is not None:
            zc = exact["z_m"] * 100.0
            sel = (zc >= zf[lo]) & (zc <= zf[hi - 1])
            axi.plot(zc[sel], exact["p_gauge_psi"][sel], color="k",
                     linestyle=":", linewidth=1.2)
        axi.tick_params(labelsize=6)
        insets.append([float(zf[lo]), float(zf[hi - 1])])

    path = os.path.join(out_dir, "converge_profile_final.png")
    meta_png = {"shockcell-viz": json.dumps({
        "type": "convergence",
        "resolutions": cells,
        "units": {"distance": "cm", "pressure": "psi"},
        "insets_z_cm": insets,
    })}
    fig.savefig(path, dpi=STYLE["dpi"], metadata=meta_png)
    plt.close(fig)
    return {"files": [path], "resolutions": cells, "n_curves": len(cells),
            "has_exact": exact is not None, "insets_z_cm": insets,
            "xlabel": "z [cm]", "ylabel": "pressure [psi]"}
