import math

import numpy as np
import pytest

from shockcell.axisource import source_step_exact, source_step_primitive
from shockcell.eos import (
    ConservedState,
    InvalidStateError,
    PrimitiveState,
    air,
    energy_from_primitive,
    polystyrene,
    pressure_from_conserved,
    water,
)

_MATS = [air(), water(), polystyrene()]


def rk4_oracle(rho0, u_r, u_z, p0, g, pf, r, dt, substeps=10_000):
    """High-order explicit integration of the source ODEs with u frozen."""
    a = u_r / r
    k = 0.5 * (u_r * u_r + u_z * u_z)

    def rhs(y):
        rho, p = y
        return np.array([-a * rho, -a * (g * (p + pf) + (g - 1.0) * k * rho)])

    y = np.array([rho0, p0], dtype=float)
    h = dt / substeps
    for _ in range(substeps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y[0], y[1]


def test_zero_radial_velocity_is_identity():
    m = water()
    w = PrimitiveState(1000.0, 0.0, 12.0, 2.5e5)
    out = source_step_primitive(w, m, 0.004, 1e-6)
    assert out == w  # bitwise: all exponentials equal one


def test_density_factor_example():
    m = water()
    w = PrimitiveState(1000.0, 1.0, 0.0, 101325.0)
    out = source_step_primitive(w, m, 0.01, 1e-6)
    assert out.rho == pytest.approx(999.9000049998333, rel=1e-14)
    assert out.u_r == 1.0 and out.u_z == 0.0


def test_matches_rk4_oracle_single():
    m = water()
    w = PrimitiveState(998.0, 3.5, -6.0, 1.8e5)
    r, dt = 0.004, 2e-6
    out = source_step_primitive(w, m, r, dt)
    rho_ref, p_ref = rk4_oracle(w.rho, w.u_r, w.u_z, w.p, m.gamma, m.p_inf, r, dt)
    assert out.rho == pytest.approx(rho_ref, rel=1e-10)
    assert out.p == pytest.approx(p_ref, rel=1e-10)


def test_velocities_bit_identical_primitive():
    m = air()
    w = PrimitiveState(1.31, 17.3330001, -42.0000007, 1.4e5)
    out = source_step_primitive(w, m, 0.002, 5e-7)
    assert out.u_r == w.u_r
    assert out.u_z == w.u_z


def test_conserved_round_trip_consistency():
    m = polystyrene()
    w = PrimitiveState(1050.0, 2.0, 5.0, 3.0e5)
    q = energy_from_primitive(w, m)
    q2 = source_step_exact(q, m, 0.003, 1e-6)
    w2 = source_step_primitive(w, m, 0.003, 1e-6)
    assert q2.rho == pytest.approx(w2.rho, rel=1e-14)
    assert pressure_from_conserved(q2, m) == pytest.approx(w2.p, rel=1e-11)
    # velocities survive the conserved encoding to within an ulp
    assert q2.mom_r / q2.rho == pytest.approx(w.u_r, rel=4e-16)
    assert q2.mom_z / q2.rho == pytest.approx(w.u_z, rel=4e-16)


def test_semigroup_property(rng):
    for _ in range(200):
        m = _MATS[rng.integers(0, 3)]
        w = PrimitiveState(m.rho_ref * rng.uniform(0.5, 2.0),
                           rng.uniform(-50, 50), rng.uniform(-50, 50),
                           101325.0 * rng.uniform(0.5, 5.0))
        r = rng.uniform(1e-3, 2e-2)
        dt1 = rng.uniform(1e-8, 5e-7)
        dt2 = rng.uniform(1e-8, 5e-7)
        two = source_step_primitive(source_step_primitive(w, m, r, dt1), m, r, dt2)
        one = source_step_primitive(w, m, r, dt1 + dt2)
        assert two.rho == pytest.approx(one.rho, rel=1e-12)
        assert two.p == pytest.approx(one.p, rel=1e-12, abs=1e-12 * (one.p + m.p_inf))


def test_ideal_gas_limit_drops_pinf_term():
    g = 1.4
    m = air()
    w = PrimitiveState(1.2, 4.0, 0.0, 101325.0)
    r, dt = 0.005, 1e-6
    out = source_step_primitive(w, m, r, dt)
    b = dt * w.u_r / r
    e1, eg = math.exp(-b), math.exp(-g * b)
    expected = eg * w.p - 0.5 * w.rho * (w.u_r ** 2) * (e1 - eg)
    assert out.p == pytest.approx(expected, rel=1e-14)


def test_invalid_output_raises():
    m = air()
    # enormous outward expansion drains the pressure below zero
    w = PrimitiveState(1.2, 500.0, 0.0, 2000.0)
    with pytest.raises(InvalidStateError):
        source_step_primitive(w, m, 1e-4, 5e-6)


def test_radius_must_be_positive():
    with pytest.raises(ValueError):
        source_step_primitive(PrimitiveState(1.2, 0, 0, 1e5), air(), 0.0, 1e-6)


def test_conserved_api_matches_oracle(rng):
    for _ in range(50):
        m = _MATS[rng.integers(0, 3)]
        w = PrimitiveState(m.rho_ref * rng.uniform(0.5, 2.0),
                           rng.uniform(-30, 30), rng.uniform(-30, 30),
                           101325.0 * rng.uniform(0.5, 3.0))
        r = rng.uniform(2e-3, 2e-2)
        dt = rng.uniform(1e-8, 1e-6)
        q = energy_from_primitive(w, m)
        q2 = source_step_exact(q, m, r, dt)
        rho_ref, p_ref = rk4_oracle(w.rho, w.u_r, w.u_z, w.p, m.gamma, m.p_inf,
                                    r, dt, substeps=2000)
        assert q2.rho == pytest.approx(rho_ref, rel=1e-9)
        assert pressure_from_conserved(q2, m) == pytest.approx(
            p_ref, rel=1e-9, abs=1e-9 * (p_ref + m.p_inf))
