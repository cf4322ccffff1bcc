import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracto.analysis import breather_preset, kink_preset
from fracto.lattice import (
    BlowUpError,
    ChainParams,
    ChainState,
    ModelParams,
    build_kernel,
    chain_energy,
    chain_rhs,
    init_breather,
    init_kink,
    rk4_step,
    simulate_chain,
)


def brute_energy(state, model):
    u, v = state.u, state.v
    n = u.size
    h = 0.0
    for i in range(n):
        h += 0.5 * v[i] ** 2 + 0.5 * model.j1 * u[i] ** 2 + model.j2 * (1 - math.cos(u[i]))
        for j in range(n):
            if i != j:
                h += 0.5 * model.j0 * u[i] * u[j] / abs(i - j) ** (1 + model.alpha.alpha)
    return h


def test_chain_geometry():
    c = ChainParams(1001, 500.0)
    assert c.dx * 1001 == pytest.approx(1000.0, rel=1e-15)
    assert c.x[c.center] == 0.0
    assert c.indices[0] == -500 and c.indices[-1] == 500
    for bad in (1000, 1, 2):
        with pytest.raises(ValueError):
            ChainParams(bad, 10.0)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1.21, -0.01, 0.1, 0.1)
    with pytest.raises(ValueError):
        ModelParams(4.5, 0.01, 0.1, 0.1)


@pytest.mark.parametrize("alpha, d, expected", [(1.0, 2, 0.25), (1.21, 1, 1.0), (1.21, 10, 10**-2.21)])
def test_kernel_weights(alpha, d, expected):
    k = build_kernel(ChainParams(21, 10.0), alpha)
    assert k.weights[d - 1] == pytest.approx(expected, rel=1e-14)
    assert np.all(k.weights > 0) and np.all(np.diff(k.weights) < 0)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 50).map(lambda m: 2 * m + 1),
    alpha=st.floats(0.1, 3.9),
    seed=st.integers(0, 2**31 - 1),
)
def test_fft_matvec_equals_double_loop(n, alpha, seed):
    u = np.random.default_rng(seed).normal(size=n)
    k = build_kernel(ChainParams(n, 1.0), alpha)
    fast, slow = k.apply(u), k.apply_naive(u)
    assert np.max(np.abs(fast - slow)) <= 1e-12 * max(1.0, np.max(np.abs(slow)))


def test_rhs_equilibrium():
    c = ChainParams(11, 5.0)
    m = ModelParams(1.21, 0.01, 0.1, 0.1)
    du, dv = chain_rhs(ChainState(0.0, np.zeros(11), np.zeros(11)), m, build_kernel(c, 1.21))
    assert not du.any() and not dv.any()


def test_rhs_single_displaced_site():
    eps, alpha = 1e-3, 1.21
    c = ChainParams(11, 5.0)
    m = ModelParams(alpha, 0.3, 0.0, 0.0)
    u = np.zeros(11)
    u[c.center] = eps
    _, dv = chain_rhs(ChainState(0.0, u, np.zeros(11)), m, build_kernel(c, alpha))
    for n in c.indices:
        if n != 0:
            assert dv[c.center + n] == pytest.approx(-0.3 * eps / abs(n) ** (1 + alpha), rel=1e-12)


def test_rhs_three_sites_by_hand():
    # weights 1/d**2: site 0 sees 2/1 + (-1)/4, site 1 sees 1 + (-1), site 2 sees 1/4 + 2
    c = ChainParams(3, 1.5)
    m = ModelParams(1.0, 1.0, 0.0, 0.0)
    u = np.array([1.0, 2.0, -1.0])
    du, dv = chain_rhs(ChainState(0.0, u, np.array([0.5, 0.0, -0.5])), m, build_kernel(c, 1.0))
    np.testing.assert_allclose(dv, [-1.75, 0.0, -2.25], atol=1e-14)
    np.testing.assert_array_equal(du, [0.5, 0.0, -0.5])


def test_energy_examples():
    c = ChainParams(5, 2.5)
    m = ModelParams(1.5, 0.0, 0.0, 1.0)
    k = build_kernel(c, 1.5)
    assert chain_energy(ChainState(0.0, np.zeros(5), np.zeros(5)), m, k) == 0.0
    u = np.zeros(5)
    u[2] = math.pi
    assert chain_energy(ChainState(0.0, u, np.zeros(5)), m, k) == pytest.approx(2.0, abs=1e-15)


def test_energy_matches_double_sum_on_kink():
    scen = kink_preset().resized(101, 50.0)
    state = scen.initial_state()
    state.v[:] = np.random.default_rng(3).normal(scale=0.1, size=101)
    k = build_kernel(scen.chain, scen.model.alpha)
    assert chain_energy(state, scen.model, k) == pytest.approx(brute_energy(state, scen.model), rel=1e-12)


def test_rk4_harmonic_single_step():
    c = ChainParams(3, 1.5)
    m = ModelParams(1.21, 0.0, 1.0, 0.0)
    s = rk4_step(ChainState(0.0, np.ones(3), np.zeros(3)), m, build_kernel(c, 1.21), 0.1)
    np.testing.assert_allclose(s.u, math.cos(0.1), atol=1e-7)
    np.testing.assert_allclose(s.v, -math.sin(0.1), atol=1e-7)
    assert s.t == pytest.approx(0.1)


def test_rk4_zero_step_is_identity_and_negative_rejected():
    c = ChainParams(5, 2.5)
    m = ModelParams(1.21, 0.01, 0.1, 0.1)
    k = build_kernel(c, 1.21)
    s = init_breather(c)
    same = rk4_step(s, m, k, 0.0)
    np.testing.assert_array_equal(same.u, s.u)
    assert same.u is not s.u
    with pytest.raises(ValueError):
        rk4_step(s, m, k, -0.1)


def test_rk4_fourth_order_on_kink():
    scen = kink_preset().resized(201, 100.0)
    t_end = 4.0

    def final(dt):
        return simulate_chain(scen.chain, scen.model, scen.initial_state(), t_end, dt, 10**6, False).u[-1]

    ref = final(0.4 / 8)
    e1 = np.max(np.abs(final(0.4) - ref))
    e2 = np.max(np.abs(final(0.2) - ref))
    assert 13.0 <= e1 / e2 <= 19.0


def test_init_kink_limits_and_center():
    c = ChainParams(1001, 500.0)
    s = init_kink(c, kappa=0.001)
    assert s.u[0] == pytest.approx(0.0, abs=1e-12)
    assert s.u[-1] == pytest.approx(2 * math.pi, abs=1e-12)
    assert not s.v.any()
    assert init_kink(ChainParams(3, 1.5), kappa=1.0).u[1] == pytest.approx(math.pi, abs=1e-15)


def test_init_kink_no_overflow_on_huge_domain():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        s = init_kink(ChainParams(2001, 1.0e5), kappa=0.001)
    assert np.all(np.isfinite(s.u))
    assert np.all(np.diff(s.u) >= 0)


def test_init_breather_profile():
    c = ChainParams(1001, 500.0)
    s = init_breather(c, nu=1.0, kappa=0.05)
    assert s.u[c.center] == pytest.approx(4 * math.atan(20.0), abs=1e-14)
    assert s.u[c.center] == pytest.approx(6.083352, abs=1e-6)
    assert s.u[0] < 1e-200
    np.testing.assert_array_equal(s.u, s.u[::-1])
    with pytest.raises(ValueError):
        init_breather(c, nu=0.0)


def test_parity_preserved_by_dynamics():
    scen = breather_preset().resized(201, 100.0)
    traj = simulate_chain(scen.chain, scen.model, scen.initial_state(), 20.0, 0.05, 40)
    for u in traj.u:
        assert np.max(np.abs(u - u[::-1])) <= 1e-10


def test_energy_drift_short_run():
    scen = breather_preset().resized(101, 50.0)
    traj = simulate_chain(scen.chain, scen.model, scen.initial_state(), 20.0, 0.02, 100)
    h = np.array([e for _, e in traj.energy])
    assert np.max(np.abs(h - h[0])) / abs(h[0]) <= 1e-6


def test_zero_duration_keeps_initial_snapshot_only():
    scen = breather_preset().resized(21, 10.0)
    traj = simulate_chain(scen.chain, scen.model, scen.initial_state(), 0.0)
    assert traj.times == [0.0] and len(traj.trace_t) == 1


def test_simulation_is_bit_reproducible():
    scen = kink_preset().resized(101, 50.0)
    a = simulate_chain(scen.chain, scen.model, scen.initial_state(), 5.0, 0.05, 20)
    b = simulate_chain(scen.chain, scen.model, scen.initial_state(), 5.0, 0.05, 20)
    assert a.times == b.times and a.trace_u == b.trace_u
    for x, y in zip(a.u, b.u):
        assert x.tobytes() == y.tobytes()


def test_blowup_reports_step_and_partial():
    c = ChainParams(5, 2.5)
    m = ModelParams(1.21, 0.0, 1.0e4, 0.0)
    s = ChainState(0.0, np.ones(5), np.zeros(5))
    with pytest.raises(BlowUpError) as info:
        simulate_chain(c, m, s, 100.0, dt=1.0, snapshot_every=1)
    err = info.value
    assert err.step >= 1
    assert err.partial is not None and len(err.partial.times) == err.step
    assert np.all(np.isfinite(err.last_state.u))
