import math

import numpy as np
import pytest

from fracto.analysis import breather_preset, kink_preset
from fracto.fsg import (
    CFLError,
    FieldParams,
    FieldState,
    cfl_bound,
    cfl_check,
    default_dt,
    fsg_rhs,
    simulate_fsg,
    step_central,
    step_rk4_field,
)
from fracto.kernel import a_alpha, continuum_symbol, riemann_zeta
from fracto.lattice import ModelParams
from fracto.riesz import EdgePolicy, Scheme

BREATHER = ModelParams(1.21, 0.01, 0.1, 0.1)


def field(model=BREATHER, n=101, L=50.0, **kw):
    return FieldParams(model, n, L, **kw)


def test_field_params_validation():
    with pytest.raises(ValueError):
        field(ModelParams(1.0, 0.01, 0.1, 0.1))
    with pytest.raises(ValueError):
        field(ModelParams(2.5, 0.01, 0.1, 0.1))
    with pytest.raises(ValueError):
        field(n=100)
    with pytest.raises(ValueError):
        field(h_ratio=0)


def test_derived_constants():
    p = field()
    assert p.dx == pytest.approx(100.0 / 101)
    assert p.h == pytest.approx(p.dx / 2)
    assert p.jbar0 == pytest.approx(0.01 * p.dx**1.21, rel=1e-15)
    assert p.coupling == pytest.approx(p.jbar0 * a_alpha(1.21), rel=1e-15)
    assert p.onsite_linear == 0.1
    z = field(zero_mode=True)
    assert z.onsite_linear == pytest.approx(0.1 + 0.02 * riemann_zeta(2.21), rel=1e-15)


def test_rhs_at_rest_and_at_pi():
    p = field()
    assert not fsg_rhs(FieldState(0.0, np.zeros(101)), p).any()
    q = field(ModelParams(1.21, 0.01, 0.0, 0.1))
    acc = fsg_rhs(FieldState(0.0, np.full(101, math.pi)), q)
    assert np.max(np.abs(acc)) <= 1e-12


@pytest.mark.parametrize("alpha", [1.21, 1.51, 1.91])
def test_single_mode_linear_response(alpha):
    model = ModelParams(alpha, 0.01, 0.1, 0.1)
    p = field(model, n=401, L=200.0, scheme=Scheme.SPECTRAL, h_ratio=1)
    x = p.x
    k = 2 * math.pi * 5 / 400.0
    eps = 1e-6
    u = eps * np.cos(k * (x + 200.0 - p.dx / 2))
    acc = fsg_rhs(FieldState(0.0, u), p)
    factor = 0.1 + 0.1 + p.jbar0 * continuum_symbol(alpha, k)
    np.testing.assert_allclose(acc, -factor * u, atol=1e-12 * eps)
    # a_alpha < 0: the fractional term lowers the frequency
    assert factor < 0.2


def test_single_mode_gl_matches_symbol_at_long_wavelength():
    p = field(n=401, L=200.0, scheme=Scheme.GL)
    k = 2 * math.pi * 5 / 400.0
    u = 1e-6 * np.cos(k * (p.x + 200.0 - p.dx / 2))
    acc = fsg_rhs(FieldState(0.0, u), p)
    fractional = -p.jbar0 * continuum_symbol(1.21, k) * u
    expected = -0.2 * u + fractional
    # first-order GL error plus interpolation damping, relative to the fractional part
    assert np.max(np.abs(acc - expected)) <= 0.25 * np.max(np.abs(fractional))


def test_cfl_check_examples():
    dx = 2 * 500 / 1001
    assert cfl_bound(dx, 1.21) == pytest.approx(0.4993957, abs=1e-7)
    assert cfl_check(0.4993, dx, 1.21)
    assert not cfl_check(0.4994, dx, 1.21)
    assert not cfl_check(0.6, 1.0, 1.5)
    assert cfl_check(1e-12, 1.0, 1.5)
    assert cfl_check(0.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        cfl_check(0.1, 0.0, 1.5)


def test_default_time_steps():
    p = field()
    assert default_dt(p, "rk4") == 0.01
    assert default_dt(p, "central") == min(0.01, 0.45 * p.dx**1.21)
    fine = field(n=1001, L=5.0)
    assert default_dt(fine, "central") == pytest.approx(0.45 * 0.01**1.21 / (1001 / 1000) ** 1.21, rel=1e-12)


def test_central_refuses_cfl_violation_unless_forced():
    p = field()
    u0 = np.zeros(101)
    with pytest.raises(CFLError):
        simulate_fsg(p, u0, 1.0, dt=0.6, stepper="central")
    traj = simulate_fsg(p, u0, 1.2, dt=0.6, stepper="central", force=True)
    assert traj.trace_t[-1] == pytest.approx(1.2)
    with pytest.raises(ValueError):
        simulate_fsg(p, u0, 1.0, stepper="euler")


def test_central_rest_state_persists():
    p = field(n=41, L=20.0)
    s = FieldState(0.0, np.zeros(41), np.zeros(41))
    for step in range(1, 10_001):
        s = step_central(s, p, 0.1, step)
    assert np.max(np.abs(s.u)) <= 1e-12


def test_central_static_when_rhs_vanishes():
    p = field(ModelParams(1.5, 0.0, 0.0, 0.0))
    u = np.linspace(0, 1, 101)
    s = step_central(FieldState(0.0, u, u_prev=u.copy()), p, 0.1)
    np.testing.assert_array_equal(s.u, u)


@pytest.mark.parametrize("stepper, order", [("central", 2), ("rk4", 4)])
def test_pointwise_harmonic_reduction(stepper, order):
    p = field(ModelParams(1.5, 0.0, 1.0, 0.0), n=21, L=10.0)
    u0 = np.cos(0.3 * p.x)
    errs = []
    for dt in (0.1, 0.05):
        traj = simulate_fsg(p, u0, 2.0, dt=dt, stepper=stepper, snapshot_every=10**6)
        errs.append(np.max(np.abs(traj.u[-1] - u0 * math.cos(2.0))))
    assert errs[0] / errs[1] == pytest.approx(2.0**order, rel=0.2)


def test_rk4_zero_step_identity():
    p = field()
    u = np.random.default_rng(1).normal(size=101)
    s = step_rk4_field(FieldState(0.0, u, np.zeros(101)), p, 0.0)
    np.testing.assert_array_equal(s.u, u)


def test_zero_duration_and_determinism():
    p = field()
    u0 = breather_preset().resized(101, 50.0).initial_state().u
    traj = simulate_fsg(p, u0, 0.0)
    assert traj.times == [0.0]
    a = simulate_fsg(p, u0, 2.0, snapshot_every=50)
    b = simulate_fsg(p, u0, 2.0, snapshot_every=50)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.u, b.u))
    assert a.trace_u == b.trace_u


def test_initial_field_length_checked():
    with pytest.raises(ValueError):
        simulate_fsg(field(), np.zeros(7), 1.0)


@pytest.mark.parametrize("scenario", [breather_preset(), kink_preset()], ids=["breather", "kink"])
def test_steppers_agree(scenario):
    sc = scenario.resized(401, 200.0)
    p = FieldParams(sc.model, 401, 200.0, edge_policy=sc.edge_policy)
    u0 = sc.initial_state().u
    a = simulate_fsg(p, u0, 50.0, 0.01, "rk4", 10**6)
    b = simulate_fsg(p, u0, 50.0, 0.01, "central", 10**6)
    assert np.max(np.abs(a.u[-1] - b.u[-1])) <= 0.01 * np.max(np.abs(a.u[-1]))


def test_kink_field_stays_bounded():
    # J1 u is not 2 pi periodic, so the far plateau at 2 pi is not an equilibrium
    sc = kink_preset().resized(401, 200.0)
    p = FieldParams(sc.model, 401, 200.0, edge_policy=EdgePolicy.KINK)
    traj = simulate_fsg(p, sc.initial_state().u, 20.0, snapshot_every=500)
    assert np.max(np.abs(traj.u[-1])) <= 4 * math.pi
