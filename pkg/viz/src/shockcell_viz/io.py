"""Readers for the documented shockcell on-disk formats.

This package reads run directories only through the documented file
layout (frame_####.json/.bin sidecar pairs, materials, gauge CSVs,
cavitation CSV, profile CSVs, manifest.json); it never imports the
simulator.
"""

from __future__ import annotations

import glob
import json
import os
import re

import numpy as np

P_ATM = 101325.0
PA_PER_PSI = 6894.757


class VizDataError(RuntimeError):
    """Missing or corrupt run output."""


def read_manifest(run_dir: str) -> dict:
    path = os.path.join(run_dir, "manifest.json")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise VizDataError(f"missing manifest: {path}") from exc
    except json.JSONDecodeError as exc:
        raise VizDataError(f"corrupt manifest {path}: {exc}") from exc


def vapor_pressure_psi(run_dir: str, default_pa: float = 2339.0) -> float:
    try:
        p_vapor = read_manifest(run_dir)["config"]["output"]["p_vapor"]
    except (VizDataError, KeyError, TypeError):
        p_vapor = default_pa
    return (float(p_vapor) - P_ATM) / PA_PER_PSI


def list_frames(run_dir: str) -> list[int]:
    out = []
    for path in glob.glob(os.path.join(run_dir, "frame_*.json")):
        m = re.match(r"frame_(\d{4})\.json$", os.path.basename(path))
        if m:
            out.append(int(m.group(1)))
    return sorted(out)


def read_frame(run_dir: str, index: int) -> tuple[dict, dict[str, np.ndarray]]:
    """Frame arrays shaped (n_r, n_z); payload is z-major, radial fastest."""
    json_path = os.path.join(run_dir, f"frame_{index:04d}.json")
    bin_path = os.path.join(run_dir, f"frame_{index:04d}.bin")
    try:
        with open(json_path, encoding="utf-8") as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise VizDataError(f"missing frame sidecar: {json_path}") from exc
    except json.JSONDecodeError as exc:
        raise VizDataError(f"corrupt frame sidecar {json_path}: {exc}") from exc
    n_r, n_z = meta["shape_rz"]
    try:
        raw = np.fromfile(bin_path, dtype=meta.get("dtype", "<f8"))
    except OSError as exc:
        raise VizDataError(f"missing frame payload: {bin_path}") from exc
    expected = len(meta["variables"]) * n_r * n_z
    if raw.size != expected:
        raise VizDataError(
            f"frame payload {bin_path} has {raw.size} values, expected {expected}")
    fields = {}
    for kvar, name in enumerate(meta["variables"]):
        block = raw[kvar * n_r * n_z:(kvar + 1) * n_r * n_z]
        fields[name] = block.reshape(n_z, n_r).T.copy()
    return meta, fields


def list_gauge_ids(run_dir: str) -> list[str]:
    ids = []
    for path in glob.glob(os.path.join(run_dir, "gauge_*.csv")):
        ids.append(os.path.basename(path)[len("gauge_"):-len(".csv")])
    return sorted(ids)


def read_gauge(run_dir: str, gauge_id: str) -> dict[str, np.ndarray]:
    path = os.path.join(run_dir, f"gauge_{gauge_id}.csv")
    if not os.path.exists(path):
        raise VizDataError(f"missing gauge file: {path}")
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (ValueError, IndexError) as exc:
        raise VizDataError(f"corrupt gauge file {path}: {exc}") from exc
    if data.size == 0 or data.dtype.names is None:
        raise VizDataError(f"empty gauge file: {path}")
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def read_profiles(run_dir: str) -> tuple[dict[int, dict], dict | None]:
    """Per-resolution convergence profiles plus the exact reference."""
    runs: dict[int, dict] = {}
    for path in glob.glob(os.path.join(run_dir, "profile_N*.csv")):
        m = re.match(r"profile_N(\d+)\.csv$", os.path.basename(path))
        if not m:
            continue
        data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True))
        runs[int(m.group(1))] = {n: np.asarray(data[n], dtype=float)
                                 for n in data.dtype.names}
    exact = None
    epath = os.path.join(run_dir, "profile_exact.csv")
    if os.path.exists(epath):
        data = np.atleast_1d(np.genfromtxt(epath, delimiter=",", names=True))
        exact = {n: np.asarray(data[n], dtype=float) for n in data.dtype.names}
    if not runs:
        raise VizDataError(f"no profile_N*.csv files in {run_dir}")
    return runs, exact
