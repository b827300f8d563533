import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_state
from phonoline.hilbert import DensityMatrix, Layout, embed, partial_trace, spin_op, destroy
from phonoline.lindblad import (
    Liouvillian, SteadyStateError, TruncationError, build_liouvillian, evolve, steady_state,
    unvec, vec,
)
from phonoline.metrics import trace_distance
from phonoline.model import (
    Dissipator, SystemParams, build_dissipators, build_hamiltonian, coherent_state,
    joint_initial_state, spin_superposition, thermal_state,
)


def direct_rhs(h, dissipators, rho):
    out = -1j * (h @ rho - rho @ h)
    for d in dissipators:
        j = d.jump.matrix
        jd = j.conj().T
        out += d.rate * (2 * j @ rho @ jd - jd @ j @ rho - rho @ jd @ j)
    return out


def lossy_params(**kw):
    base = dict(n_spins=1, d=6, delta=0.3, omega_drive=0.2, g=0.33, gamma_b=0.05,
                nbar_b=0.1, gamma_s=0.02, nbar_s=0.05, gamma_phi=0.01)
    base.update(kw)
    return SystemParams(**base)


def test_vec_column_stacking(rng):
    a, x, b = (rng.normal(size=(3, 3)) for _ in range(3))
    np.testing.assert_allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x), atol=1e-12)
    np.testing.assert_array_equal(unvec(vec(x), 3), x)


def test_zero_generator():
    liou = build_liouvillian(np.zeros((4, 4)))
    np.testing.assert_array_equal(liou.matrix, np.zeros((16, 16)))


def test_single_mode_decay_by_hand():
    gamma = 0.7
    b = destroy(2)
    liou = build_liouvillian(np.zeros((2, 2)), [Dissipator(gamma / 2, b)])
    one = np.diag([0.0, 1.0])
    np.testing.assert_allclose(liou.apply(one), gamma * np.diag([1.0, -1.0]), atol=1e-15)
    np.testing.assert_allclose(unvec(liou.matrix @ vec(one), 2), gamma * np.diag([1.0, -1.0]), atol=1e-15)


def test_superoperator_matches_direct_rhs(rng):
    p = lossy_params(n_spins=2, d=4)
    h = build_hamiltonian(p)
    dis = build_dissipators(p)
    liou = build_liouvillian(h, dis)
    for _ in range(3):
        rho = random_state(16, rng)
        ref = direct_rhs(h.matrix, dis, rho)
        np.testing.assert_allclose(unvec(liou.matrix @ vec(rho), 16), ref, atol=1e-12)
        np.testing.assert_allclose(liou.apply(rho), ref, atol=1e-12)


def test_generator_trace_and_hermiticity(rng):
    p = lossy_params()
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    for _ in range(5):
        x = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        x = x + x.conj().T
        out = liou.apply(x)
        assert abs(np.trace(out)) < 1e-10
        assert np.max(np.abs(out - out.conj().T)) < 1e-10


def test_layout_mismatch_rejected():
    h = build_hamiltonian(SystemParams(d=4))
    bad = Dissipator(0.1, embed(destroy(3), -1, Layout([2, 3])))
    with pytest.raises(ValueError):
        build_liouvillian(h, [bad])


def test_evolve_zero_generator_is_static(rng):
    rho0 = DensityMatrix(random_state(4, rng), [2, 2])
    traj = evolve(rho0, build_liouvillian(np.zeros((4, 4))), np.linspace(0, 5, 6))
    for s in traj.states:
        np.testing.assert_allclose(s.matrix, rho0.matrix, atol=1e-14)


def test_pure_decay_matches_exponential():
    gamma_s = 0.3
    liou = build_liouvillian(np.zeros((2, 2)), [Dissipator(gamma_s / 2, spin_op("minus"))])
    times = np.linspace(0, 10, 51)
    traj = evolve(DensityMatrix(np.diag([1.0, 0.0])), liou, times,
                  observables={"pe": lambda t, r: r.matrix[0, 0].real})
    np.testing.assert_allclose(traj["pe"], np.exp(-gamma_s * times), atol=1e-6)


def test_invariants_along_lossy_trajectory():
    p = lossy_params(n_spins=2, d=6, gamma_b=0.02)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = joint_initial_state([spin_superposition(0.6, 0.8)] * 2, thermal_state(6, 0.01))
    traj = evolve(rho0, liou, np.linspace(0, 30, 61), truncation_tol=None)
    for s in traj.states:
        m = s.matrix
        assert abs(np.trace(m) - 1) < 1e-8
        assert np.max(np.abs(m - m.conj().T)) < 1e-9
        assert s.purity() <= 1 + 1e-8
        assert s.eigenvalues()[0] > -1e-8


def test_unitary_limit_conserves_spectrum():
    p = SystemParams(n_spins=1, d=12, delta=0.4, omega_drive=0.43, g=0.33)
    liou = build_liouvillian(build_hamiltonian(p))
    rho0 = joint_initial_state([spin_superposition(0.8, 0.6)], thermal_state(12, 0.05))
    traj = evolve(rho0, liou, np.linspace(0, 40, 81), truncation_tol=None)
    lam0 = rho0.eigenvalues()
    for s in traj.states:
        assert abs(s.purity() - rho0.purity()) < 1e-7
        np.testing.assert_allclose(s.eigenvalues(), lam0, atol=1e-6)


def test_propagator_agrees_with_runge_kutta():
    p = lossy_params()
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = joint_initial_state([spin_superposition(0.6, 0.8)], thermal_state(6, 0.01))
    times = np.arange(0, 81) * 0.25
    a = evolve(rho0, liou, times, method="propagator", truncation_tol=None)
    b = evolve(rho0, liou, times, truncation_tol=None)
    for x, y in zip(a.states, b.states):
        np.testing.assert_allclose(x.matrix, y.matrix, atol=1e-8)


def test_propagator_exchange_reduction_matches_full():
    p = lossy_params(n_spins=2, d=5, gamma_b=0.05, nbar_b=0.02)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    sym = joint_initial_state([spin_superposition(0.6, 0.8)] * 2, thermal_state(5, 0.01))
    times = np.array([0, 1, 3, 8, 64]) * 0.5
    reduced = evolve(sym, liou, times, method="propagator", truncation_tol=None)
    full = evolve(sym, Liouvillian.from_matrix(liou.matrix), times, method="propagator",
                  truncation_tol=None)
    for x, y in zip(reduced.states, full.states):
        np.testing.assert_allclose(x.matrix, y.matrix, atol=1e-10)


def test_propagator_requires_lattice_times():
    liou = build_liouvillian(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        evolve(DensityMatrix(np.eye(2) / 2), liou, [0, 1.0, 2.5], method="propagator")


def test_time_grid_errors_and_empty():
    liou = build_liouvillian(np.zeros((2, 2)))
    rho = DensityMatrix(np.eye(2) / 2)
    empty = evolve(rho, liou, [], observables={"x": lambda t, r: 0.0})
    assert len(empty) == 0 and empty["x"].size == 0
    with pytest.raises(ValueError):
        evolve(rho, liou, [1.0, 2.0])
    with pytest.raises(ValueError):
        evolve(rho, liou, [0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        evolve(DensityMatrix(np.eye(3) / 3), liou, [0.0])


def test_truncation_failure_is_reported():
    p = SystemParams(n_spins=1, d=4, g=0.0)
    liou = build_liouvillian(build_hamiltonian(p))
    rho0 = joint_initial_state([spin_superposition(1, 0)], coherent_state(4, 1.0))
    with pytest.raises(TruncationError, match="increase the truncation"):
        evolve(rho0, liou, [0.0, 1.0])


def test_steady_state_dark_state():
    p = SystemParams(n_spins=1, d=5, g=0.0, gamma_s=0.1, gamma_b=0.1)
    ss = steady_state(build_liouvillian(build_hamiltonian(p), build_dissipators(p)))
    target = np.zeros(10)
    target[5] = 1.0  # |g, 0>
    np.testing.assert_allclose(ss.matrix, np.outer(target, target), atol=1e-10)


def test_steady_state_displaced_dark_state():
    # with coupling the |g> sector sees (b - g)^+(b - g); the damped mode settles
    # in the coherent state beta = g / (1 - i r), r = gamma_b / 2
    g, gb, d = 0.33, 0.1, 14
    p = SystemParams(n_spins=1, d=d, g=g, gamma_s=0.1, gamma_b=gb)
    ss = steady_state(build_liouvillian(build_hamiltonian(p), build_dissipators(p)))
    beta = g / (1 - 0.5j * gb)
    expected = np.kron(np.diag([0.0, 1.0]), coherent_state(d, beta).matrix)
    np.testing.assert_allclose(ss.matrix, expected, atol=1e-9)


def test_steady_state_thermal_mode():
    d, nbar, gb = 15, 0.003, 0.01
    b = destroy(d)
    dis = [Dissipator(gb / 2 * (1 + nbar), b), Dissipator(gb / 2 * nbar, b.dag())]
    liou = build_liouvillian(b.dag() @ b, dis)
    ss = steady_state(liou)
    np.testing.assert_allclose(ss.matrix, thermal_state(d, nbar).matrix, atol=1e-8)
    assert np.max(np.abs(liou.apply(ss))) < 1e-9


def test_steady_state_degenerate_kernel():
    p = SystemParams(n_spins=1, d=4, g=0.2)
    with pytest.raises(SteadyStateError):
        steady_state(build_liouvillian(build_hamiltonian(p)))


def test_steady_state_residual_on_driven_system():
    p = lossy_params(n_spins=2, d=6)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    ss = steady_state(liou)
    assert np.max(np.abs(liou.apply(ss))) < 1e-9
    assert ss.eigenvalues()[0] > -1e-8


def test_steady_state_equals_long_time_limit():
    # relaxation towards the fixed point is limited by the 1e-5 spin rates,
    # so the comparison is made at t = 2e5 rather than 1e5
    p = SystemParams(n_spins=2, d=10, delta=-0.98, omega_drive=0.61, g=0.33, gamma_s=1e-5,
                     gamma_phi=1e-5, gamma_b=1e-3, nbar_b=0.003)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = joint_initial_state([spin_superposition(1, 0)] * 2, thermal_state(10, 0.003))
    h = 1e5 / 2**17
    traj = evolve(rho0, liou, np.array([0, 1, 2**18]) * h, method="propagator", truncation_tol=None)
    assert trace_distance(traj.states[-1], steady_state(liou)) < 1e-4


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 0.1), st.floats(0.0, 0.1), st.floats(0.0, 0.3))
def test_random_parameters_keep_states_physical(omega, gb, gs, nb):
    p = SystemParams(n_spins=1, d=8, omega_drive=omega, g=0.2, gamma_b=gb, gamma_s=gs,
                     gamma_phi=gs, nbar_b=nb)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = joint_initial_state([spin_superposition(0.6, 0.8)], thermal_state(8, 0.01))
    traj = evolve(rho0, liou, np.linspace(0, 5, 11), truncation_tol=None)
    for s in traj.states:
        assert s.eigenvalues()[0] > -1e-8
        assert abs(np.trace(s.matrix) - 1) < 1e-8
