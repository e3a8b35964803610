"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The scenario
criteria drive the production CLI in subprocesses at 400x200 cells and
reuse those runs across tests via a module-scoped fixture.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from shockcell import _kernels as k
from shockcell.eos import PA_PER_PSI, P_ATM, air, polystyrene, water
from shockcell.observables import read_gauge_series
from shockcell.transverse import TransverseInput, transverse_split

_MATS = [air(), water(), polystyrene()]


def _report(name: str, ok: bool, detail: str = ""):
    print(f"\n[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# 1. exact-solver oracle agreement
# ---------------------------------------------------------------------------

def _f_oracle(p, rho_k, p_k, g, pf):
    c_k = math.sqrt(g * (p_k + pf) / rho_k)
    if p > p_k:
        a = 2.0 / ((g + 1.0) * rho_k)
        b = ((g - 1.0) * p_k + 2.0 * g * pf) / (g + 1.0)
        return (p - p_k) * math.sqrt(a / (p + b))
    w = (p + pf) / (p_k + pf)
    return 2.0 * c_k / (g - 1.0) * (w ** ((g - 1.0) / (2.0 * g)) - 1.0)


def test_criterion_exact_solver():
    t0 = time.time()
    # Sod via Newton vs an independent bisection oracle
    p_newton, *_rest, st = k.exact_star(1.0, 0.0, 1.0, 1.4, 0.0,
                                        0.125, 0.0, 0.1, 1.4, 0.0, 1e-12, 100)
    assert st == 0
    lo, hi = 1e-8, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _f_oracle(mid, 1.0, 1.0, 1.4, 0.0) + _f_oracle(mid, 0.125, 0.1, 1.4, 0.0) > 0:
            hi = mid
        else:
            lo = mid
    p_bisect = 0.5 * (lo + hi)
    sod_ok = abs(p_newton - 0.30313) <= 1e-4 and abs(p_newton - p_bisect) <= 1e-4

    # 1e4 randomized two-material problems, pressure ratios up to 1e4;
    # velocity jumps stay inside the two-rarefaction vacuum bound (vacuum
    # inputs are a defined error path, exercised in the unit tests)
    rng = np.random.default_rng(42)
    pairs = [(i, j) for i in range(3) for j in range(3) if i != j]
    worst_res = 0.0
    n_fail = 0
    for n in range(10_000):
        ml, mr = _MATS[pairs[n % len(pairs)][0]], _MATS[pairs[n % len(pairs)][1]]
        rl = ml.rho_ref * rng.uniform(0.5, 2.0)
        rr = mr.rho_ref * rng.uniform(0.5, 2.0)
        pl = 101325.0 * 10.0 ** rng.uniform(-1.0, 3.0)
        pr = 101325.0 * 10.0 ** rng.uniform(-1.0, 3.0)
        ul = rng.uniform(-50.0, 50.0)
        ur = rng.uniform(-50.0, 50.0)
        pstar, ustar, _, _, _, status = k.exact_star(
            rl, ul, pl, ml.gamma, ml.p_inf, rr, ur, pr, mr.gamma, mr.p_inf,
            1e-10, 100)
        if status != 0:
            n_fail += 1
            continue
        res = abs(_f_oracle(pstar, rl, pl, ml.gamma, ml.p_inf)
                  + _f_oracle(pstar, rr, pr, mr.gamma, mr.p_inf) + (ur - ul))
        worst_res = max(worst_res, res)
    elapsed = time.time() - t0
    ok = sod_ok and n_fail == 0 and worst_res <= 1e-10 and elapsed < 10.0
    _report("exact-solver oracle agreement", ok,
            f"Sod p*={p_newton:.6f} (bisect {p_bisect:.6f}); "
            f"10^4 problems: failures={n_fail}, worst residual={worst_res:.2e}; "
            f"runtime {elapsed:.1f}s (<10s)")


# ---------------------------------------------------------------------------
# 2. 1D verification against exact interface fans
# ---------------------------------------------------------------------------

def test_criterion_verify1d():
    from shockcell.verification import run_verify1d

    t0 = time.time()
    res = run_verify1d(800)
    elapsed = time.time() - t0
    s = res.summary_dict()
    rho_a = s["metrics_a_plus_6us"]["rho"]["normalized"]
    rho_b = s["metrics_b_plus_6us"]["rho"]["normalized"]
    p_a = s["metrics_a_plus_6us"]["p"]["normalized"]
    p_b = s["metrics_b_plus_6us"]["p"]["normalized"]
    ok = (rho_a <= 0.01 and rho_b <= 0.01 and p_a <= 0.01 and p_b <= 0.01
          and res.transmitted_in_band and elapsed < 30.0)
    _report("1D verification vs exact fans", ok,
            f"L1/jump rho A+6us={rho_a:.2e}, B+6us={rho_b:.2e}; "
            f"p A={p_a:.2e}, B={p_b:.2e}; "
            f"transmitted {res.transmitted_psi:.5f} psi in [0.0091, 0.0169]; "
            f"runtime {elapsed:.1f}s (<30s)")


# ---------------------------------------------------------------------------
# 3. resolution convergence study
# ---------------------------------------------------------------------------

def test_criterion_convergence():
    from shockcell.verification import run_converge

    t0 = time.time()
    res = run_converge((200, 400, 800))
    elapsed = time.time() - t0
    e = res.l1_exact_rho
    strict = e[0] > e[1] > e[2]
    ok = strict and res.order_rho >= 1.5 and elapsed < 120.0
    _report("convergence 200/400/800", ok,
            f"L1(rho) vs exact: {e[0]:.3e} > {e[1]:.3e} > {e[2]:.3e}; "
            f"smooth-region order {res.order_rho:.2f} (>=1.5); "
            f"runtime {elapsed:.1f}s (<2min)")


# ---------------------------------------------------------------------------
# 4. transverse-solver identity
# ---------------------------------------------------------------------------

def test_criterion_transverse_identity():
    t0 = time.time()
    rng = np.random.default_rng(7)
    eps = np.finfo(float).eps
    worst = 0.0
    for _ in range(100_000):
        c = 10.0 ** rng.uniform(-0.3, 3.4)
        d1 = rng.standard_normal() * 10.0 ** rng.uniform(-3.0, 6.0)
        d3 = rng.standard_normal() * 10.0 ** rng.uniform(-3.0, 6.0)
        up, dn = k.transverse_coeffs(d1, d3, c, c, c)
        tot0 = up + dn
        tot2 = up * c - dn * c
        scale1 = c * abs(d1) + abs(d3)
        err = max(abs(tot0 - d3) / (eps * scale1),
                  abs(tot2 - c * c * d1) / (eps * c * scale1))
        worst = max(worst, err)
    # spot-check through the public operation too
    s = transverse_split(TransverseInput(np.array([3.0, 0.0, -2.0, 0.0]), 5.0, 5.0, 5.0))
    pub_ok = np.allclose(s.up + s.down, [-2.0, 0.0, 75.0, 0.0], rtol=0, atol=4 * eps * 80)
    elapsed = time.time() - t0
    ok = worst <= 4.0 and pub_ok and elapsed < 5.0
    _report("transverse identity (uniform c)", ok,
            f"worst error {worst:.2f} ulp (<=4) over 1e5 inputs; "
            f"runtime {elapsed:.1f}s (<5s)")


# ---------------------------------------------------------------------------
# 5. source-step exactness
# ---------------------------------------------------------------------------

def test_criterion_source_exactness():
    t0 = time.time()
    rng = np.random.default_rng(11)
    n = 1000
    mi = rng.integers(0, 3, n)
    gam = np.array([m.gamma for m in _MATS])[mi]
    pinf = np.array([m.p_inf for m in _MATS])[mi]
    rho0 = np.array([m.rho_ref for m in _MATS])[mi] * rng.uniform(0.5, 2.0, n)
    u_r = rng.uniform(-50.0, 50.0, n)
    u_z = rng.uniform(-50.0, 50.0, n)
    p0 = 101325.0 * rng.uniform(0.5, 5.0, n)
    r = rng.uniform(1e-3, 2e-2, n)
    dt = rng.uniform(1e-8, 1e-6, n)

    # vectorized classical RK4 with 1e4 substeps (independent ODE oracle)
    a = u_r / r
    kin = 0.5 * (u_r ** 2 + u_z ** 2)

    def rhs(rho, p):
        return -a * rho, -a * (gam * (p + pinf) + (gam - 1.0) * kin * rho)

    rho_n, p_n = rho0.copy(), p0.copy()
    h = dt / 10_000
    for _ in range(10_000):
        k1r, k1p = rhs(rho_n, p_n)
        k2r, k2p = rhs(rho_n + 0.5 * h * k1r, p_n + 0.5 * h * k1p)
        k3r, k3p = rhs(rho_n + 0.5 * h * k2r, p_n + 0.5 * h * k2p)
        k4r, k4p = rhs(rho_n + h * k3r, p_n + h * k3p)
        rho_n += (h / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
        p_n += (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)

    worst = 0.0
    worst_semi = 0.0
    for idx in range(n):
        rr, pp = k.source_cell(rho0[idx], u_r[idx], u_z[idx], p0[idx],
                               gam[idx], pinf[idx], r[idx], dt[idx])
        worst = max(worst,
                    abs(rr - rho_n[idx]) / rho_n[idx],
                    abs(pp - p_n[idx]) / (abs(p_n[idx]) + pinf[idx]))
        # semigroup: two half steps equal one full step
        r1, p1 = k.source_cell(rho0[idx], u_r[idx], u_z[idx], p0[idx],
                               gam[idx], pinf[idx], r[idx], 0.5 * dt[idx])
        r2, p2 = k.source_cell(r1, u_r[idx], u_z[idx], p1,
                               gam[idx], pinf[idx], r[idx], 0.5 * dt[idx])
        worst_semi = max(worst_semi,
                         abs(r2 - rr) / rr,
                         abs(p2 - pp) / (abs(pp) + pinf[idx]))
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and worst_semi <= 1e-12 and elapsed < 10.0
    _report("source-step exactness", ok,
            f"worst rel err vs RK4(1e4 substeps) {worst:.2e} (<=1e-8); "
            f"semigroup {worst_semi:.2e} (<=1e-12); runtime {elapsed:.1f}s (<10s)")


# ---------------------------------------------------------------------------
# 6. conservation on a closed reflecting box
# ---------------------------------------------------------------------------

def test_criterion_conservation():
    from shockcell.domain import GridSpec, uniform_material_map
    from shockcell.stepper import (SolverOptions, apply_boundaries,
                                   homogeneous_step, stable_dt,
                                   state_from_primitive_fields)

    t0 = time.time()
    bcs = {"rmin": "reflect", "rmax": "reflect", "zmin": "reflect", "zmax": "reflect"}
    grid = GridSpec(40, 40, 1e-4, 1e-4)
    mm = uniform_material_map(grid, air(), bcs)
    rr, zz = np.meshgrid(grid.r_centers, grid.z_centers, indexing="ij")
    p = P_ATM * (1.0 + 0.4 * np.exp(-((rr - 2e-3) ** 2 + (zz - 2e-3) ** 2) / (6e-4) ** 2))
    rho = 1.2 * (p / P_ATM) ** (1 / 1.4)
    st = state_from_primitive_fields(grid, mm, rho, np.zeros_like(p),
                                     np.zeros_like(p), p,
                                     SolverOptions(source=False), bcs)
    m0, e0 = st.total_mass_energy()
    m_prev, e_prev = m0, e0
    worst_m = worst_e = 0.0
    for _ in range(500):
        apply_boundaries(st)
        homogeneous_step(st, stable_dt(st))
        m, e = st.total_mass_energy()
        worst_m = max(worst_m, abs(m - m_prev) / m0)
        worst_e = max(worst_e, abs(e - e_prev) / e0)
        m_prev, e_prev = m, e
    elapsed = time.time() - t0
    ok = worst_m <= 1e-12 and worst_e <= 1e-11 and elapsed < 60.0
    _report("conservation (closed box, 500 steps)", ok,
            f"max per-step drift: mass {worst_m:.2e} (<=1e-12), "
            f"energy {worst_e:.2e} (<=1e-11); runtime {elapsed:.1f}s (<1min)")


# ---------------------------------------------------------------------------
# 7 + 8. full-scale scenario runs (shared fixture) and determinism
# ---------------------------------------------------------------------------

def _cli(args, timeout=900):
    env = dict(os.environ)
    env.pop("SHOCKCELL_THREADS", None)
    t0 = time.time()
    proc = subprocess.run([sys.executable, "-m", "shockcell.cli", *args],
                          capture_output=True, text=True, env=env, timeout=timeout)
    elapsed = time.time() - t0
    assert proc.returncode == 0, f"CLI failed ({args}): {proc.stderr}"
    return elapsed


@pytest.fixture(scope="module")
def scenario_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("scenario")
    base1 = root / "base_t1"
    base8 = root / "base_t8"
    hyd = root / "hyd_t8"
    times = {
        "base1": _cli(["run", "--output-dir", str(base1), "--threads", "1"]),
        "base8": _cli(["run", "--output-dir", str(base8), "--threads", "8"]),
        "hyd": _cli(["run", "--output-dir", str(hyd), "--threads", "8",
                     "--with-hydrophone"]),
    }
    from shockcell.verification import run_matched_1d
    z1d, profs = run_matched_1d(400, 13.0, [30e-6])
    return {"base1": base1, "base8": base8, "hyd": hyd,
            "oned": (z1d, profs[0]), "times": times}


def test_criterion_scenario_qualitative(scenario_runs):
    base1 = scenario_runs["base1"]
    hyd = scenario_runs["hyd"]
    times = scenario_runs["times"]

    # (a) baseline minimum water pressure below vapor within t in [60, 95] us
    cav = np.genfromtxt(base1 / "cavitation.csv", delimiter=",", names=True)
    win = (cav["t_us"] >= 60.0) & (cav["t_us"] <= 95.0)
    min_p_window = cav["min_p_water_pa"][win].min()
    ok_a = min_p_window < 2339.0

    # (b) hydrophone run: gauges 2 and 3 never cross the vapor line
    # (and do cross it in the baseline run, per the reported comparison)
    g2 = read_gauge_series(str(hyd / "gauge_gauge2.csv"))
    g3 = read_gauge_series(str(hyd / "gauge_gauge3.csv"))
    b2 = read_gauge_series(str(base1 / "gauge_gauge2.csv"))
    b3 = read_gauge_series(str(base1 / "gauge_gauge3.csv"))
    ok_b = (g2["p_abs_pa"].min() > 2339.0 and g3["p_abs_pa"].min() > 2339.0
            and b2["p_abs_pa"].min() < 2339.0 and b3["p_abs_pa"].min() < 2339.0)

    # (c) 2D axis pressure behind the transmitted shock decays vs matched 1D
    axis = np.genfromtxt(base1 / "axis_0000.csv", delimiter=",", names=True)
    z1d, prof1d = scenario_runs["oned"]
    p1d = prof1d[2]
    sel = (axis["z_m"] >= 0.011) & (axis["z_m"] <= 0.016)
    ratio = axis["p_abs_pa"][sel].mean() / p1d[sel].mean()
    ok_c = ratio <= 0.95

    # six frames at the requested times
    manifest = json.load(open(base1 / "manifest.json"))
    n_frames = len(manifest["frame_files"])
    ok_frames = n_frames == 6

    ok_time = all(t <= 900.0 for t in times.values())
    ok = ok_a and ok_b and ok_c and ok_frames and ok_time
    _report("scenario qualitative reproduction", ok,
            f"(a) min water p in [60,95]us = {min_p_window:.0f} Pa (<2339: {ok_a}); "
            f"(b) hyd gauge2 min {g2['p_abs_pa'].min():.0f} Pa, "
            f"gauge3 min {g3['p_abs_pa'].min():.0f} Pa (>2339: {ok_b}); "
            f"(c) 2D/1D axis ratio {ratio:.3f} (<=0.95: {ok_c}); "
            f"frames {n_frames}/6; wall times {times} (<=900s each)")


def test_criterion_determinism_thread_count(scenario_runs):
    base1 = scenario_runs["base1"]
    base8 = scenario_runs["base8"]
    identical = []
    for gid in ("gauge1", "gauge2", "gauge3"):
        b1 = (base1 / f"gauge_{gid}.csv").read_bytes()
        b8 = (base8 / f"gauge_{gid}.csv").read_bytes()
        identical.append(b1 == b8)
    frames_same = ((base1 / "frame_0005.bin").read_bytes()
                   == (base8 / "frame_0005.bin").read_bytes())
    ok = all(identical) and frames_same
    _report("determinism across thread counts", ok,
            f"gauge CSVs byte-identical: {identical}; final frame identical: {frames_same}")
