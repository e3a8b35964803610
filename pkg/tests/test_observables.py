import os

import numpy as np
import pytest

from shockcell.domain import (
    ConfigError,
    GridSpec,
    SimulationConfig,
    build_scenario,
    uniform_material_map,
)
from shockcell.eos import P_ATM, PA_PER_PSI, air
from shockcell.observables import (
    GaugeSpec,
    RunRecorder,
    cavitation_metrics,
    read_frame,
    read_gauge_series,
    resolve_gauges,
    sample_gauges,
    write_frame,
    write_gauge_series,
    GaugeSeries,
)
from shockcell.stepper import SolverOptions, quiescent_state, run

_REFLECT_ALL = {"rmin": "reflect", "rmax": "reflect",
                "zmin": "reflect", "zmax": "reflect"}


def _small_scenario(hydrophone=False):
    cfg = SimulationConfig.default()
    cfg.raw["grid"]["n_r"] = 40
    cfg.raw["grid"]["n_z"] = 80
    cfg.raw["geometry"]["hydrophone"]["enabled"] = hydrophone
    grid, mm, geo = build_scenario(cfg)
    st = quiescent_state(grid, mm, P_ATM, SolverOptions())
    return cfg, grid, mm, geo, st


def test_gauge_resolution_and_out_of_domain():
    cfg, grid, mm, geo, st = _small_scenario()
    specs = [GaugeSpec("a", 0.0, 0.011), GaugeSpec("b", 0.0, 0.0185)]
    res = resolve_gauges(grid, mm, specs)
    assert res[0].cell == grid.nearest_cell(0.0, 0.011)
    with pytest.raises(ConfigError):
        resolve_gauges(grid, mm, [GaugeSpec("x", 0.0, 1.0)])


def test_gauge_inside_rod_flagged_irrelevant_but_recorded():
    cfg, grid, mm, geo, st = _small_scenario(hydrophone=True)
    z_mid_rod = 0.5 * (geo.hydrophone_z[0] + geo.hydrophone_z[1])
    res = resolve_gauges(grid, mm, [GaugeSpec("in_rod", 0.0, z_mid_rod),
                                    GaugeSpec("in_water", 0.005, 0.015)])
    assert res[0].irrelevant is True
    assert res[1].irrelevant is False
    vals = sample_gauges(st, res)
    assert vals[0] == pytest.approx(P_ATM, rel=1e-12)  # still recorded


def test_quiescent_gauges_constant_ambient(tmp_path):
    cfg, grid, mm, geo, st = _small_scenario()
    rec = RunRecorder(str(tmp_path), grid, mm,
                      [GaugeSpec("g", 0.0, 0.02)], p_vapor=2339.0)
    bcs = dict(_REFLECT_ALL)
    st.bcs = bcs
    run(st, 6 * stable_dt_of(st), recorder=rec)
    rec.finalize()
    data = read_gauge_series(str(tmp_path / "gauge_g.csv"))
    assert np.allclose(data["p_abs_pa"], P_ATM, rtol=1e-12)
    assert np.allclose(data["p_gauge_psi"], 0.0, atol=1e-12)
    assert np.all(np.diff(data["t_us"]) > 0)


def stable_dt_of(st):
    from shockcell.stepper import apply_boundaries, stable_dt
    apply_boundaries(st)
    return stable_dt(st)


def test_psi_conversion_exact():
    s = GaugeSeries("x", False, [0.0], [P_ATM + PA_PER_PSI])
    assert s.p_gauge_psi()[0] == (P_ATM + PA_PER_PSI - P_ATM) / PA_PER_PSI


def test_cavitation_metrics_thresholds():
    cfg, grid, mm, geo, st = _small_scenario()
    pmin, count, mask = cavitation_metrics(st, 2339.0)
    assert count == 0
    assert pmin == pytest.approx(P_ATM, rel=1e-12)
    # raising the threshold above ambient flags every water cell
    pmin2, count2, _ = cavitation_metrics(st, 2.0 * P_ATM)
    assert count2 == int((mm.ids == 1).sum())
    assert count2 >= count
    with pytest.raises(ValueError):
        cavitation_metrics(st, -1.0)


def test_cavitation_monotone_in_threshold(rng):
    cfg, grid, mm, geo, st = _small_scenario()
    jj, ii = np.nonzero(mm.ids == 1)
    # perturb water energies downward a little
    for j, i in zip(jj[::7], ii[::7]):
        st.q[j + 2, i + 2, 3] *= 1.0 - 1e-6 * rng.uniform(0.5, 1.0)
    counts = [cavitation_metrics(st, pv)[1] for pv in (500.0, 2339.0, 5e4, 1e5, 2e5)]
    assert counts == sorted(counts)


def test_frame_round_trip(tmp_path):
    cfg, grid, mm, geo, st = _small_scenario()
    st.t = 1.25e-5
    bin_path, json_path = write_frame(str(tmp_path), 3, st)
    assert os.path.getsize(bin_path) == 5 * grid.n_r * grid.n_z * 8
    meta, fields = read_frame(str(tmp_path), 3)
    assert meta["shape_rz"] == [grid.n_r, grid.n_z]
    assert meta["time_s"] == 1.25e-5
    assert np.array_equal(fields["rho"], st.interior(0))
    assert np.array_equal(fields["p"], st.pressure_field())


def test_gauge_csv_round_trips_floats(tmp_path):
    ts = [1.234567890123456e-6, 2.2e-6, 3.000000000000001e-6]
    ps = [101325.0, 99999.99999999999, 1.2345678901234567e5]
    path = write_gauge_series(str(tmp_path), GaugeSeries("rt", False, ts, ps))
    data = read_gauge_series(path)
    assert np.array_equal(data["t_us"], np.array(ts) * 1e6)
    assert np.array_equal(data["p_abs_pa"], np.array(ps))


def test_axis_slice_rows(tmp_path):
    cfg, grid, mm, geo, st = _small_scenario()
    from shockcell.observables import write_axis_slice
    path = write_axis_slice(str(tmp_path), 0, st)
    rows = open(path).read().strip().splitlines()
    assert len(rows) == grid.n_z + 1  # header + one row per z cell


def test_gauges_strictly_non_invasive():
    cfg, grid, mm, geo, st1 = _small_scenario()
    _, _, _, _, st2 = _small_scenario()
    profile = cfg.shock_profile()
    rec = RunRecorder("/tmp/shockcell-noninvasive", grid, mm,
                      [GaugeSpec(g["id"], g["r"], g["z"]) for g in cfg.gauge_positions()],
                      p_vapor=2339.0)
    run(st1, 3e-6, profile=profile, recorder=rec)
    run(st2, 3e-6, profile=profile)
    assert np.array_equal(st1.q, st2.q)


def test_run_recorder_outputs(tmp_path):
    cfg, grid, mm, geo, st = _small_scenario()
    profile = cfg.shock_profile()
    rec = RunRecorder(str(tmp_path), grid, mm,
                      [GaugeSpec("g1", 0.0, 0.011)], p_vapor=2339.0)
    run(st, 8e-6, frame_times=[4e-6, 8e-6], profile=profile, recorder=rec)
    summary = rec.finalize()
    assert (tmp_path / "frame_0000.bin").exists()
    assert (tmp_path / "frame_0001.json").exists()
    assert (tmp_path / "axis_0001.csv").exists()
    assert (tmp_path / "cavitation.csv").exists()
    assert (tmp_path / "materials.bin").exists()
    assert summary["gauges"][0]["id"] == "g1"
    cav = np.genfromtxt(tmp_path / "cavitation.csv", delimiter=",", names=True)
    assert cav["t_us"].size == st.step_count + 1  # one row per accepted step + t0
