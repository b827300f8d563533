import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_state, random_unitary
from phonoline.analytic import BellDiagonalSpec, bd_state
from phonoline.metrics import (
    UndefinedMetricError, concurrence, discord_x, entropy, fock_distribution, fock_fidelity, g2_zero,
    is_x_form, pure_target_fidelity, state_fidelity, trace_distance, wigner,
)
from phonoline.model import coherent_state, fock_state, thermal_state

PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)
PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


# -- independent discord oracle --------------------------------------------------

def _h(p):
    p = np.clip(p, 0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0)


def brute_force_discord(rho, n_theta=720, n_phi=720):
    """Mutual information minus classical correlation, measuring qubit B on a full angle grid."""
    theta = np.linspace(0, np.pi, n_theta)
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    n = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    t = rho.reshape(2, 2, 2, 2)
    s_cond = 0.0
    for sign in (1, -1):
        proj = 0.5 * (np.eye(2)[:, :, None, None] + sign * np.einsum("kij,k...->ij...", PAULI, n))
        # unnormalized conditional state of A: Tr_B[(I x P) rho]
        a = np.einsum("ajbl,lj...->ab...", t, proj)
        p = np.real(a[0, 0] + a[1, 1])
        det = np.real(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
        disc = np.sqrt(np.clip(p**2 - 4 * det, 0, None))
        s_cond = s_cond + _h(0.5 * (p + disc)) + _h(0.5 * (p - disc)) - _h(p)
    rb = np.einsum("iaib->ab", t)
    s_b = _h(np.linalg.eigvalsh(rb)).sum()
    s_ab = _h(np.linalg.eigvalsh(rho)).sum()
    return s_b - s_ab + s_cond.min()


def random_x_state(rng):
    p = rng.dirichlet(np.ones(4) * 0.7)
    m = np.diag(p).astype(complex)
    for (i, j) in ((0, 3), (1, 2)):
        c = rng.uniform(0, 1) * np.sqrt(p[i] * p[j]) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        m[i, j], m[j, i] = c, np.conj(c)
    return m


# -- phonon witnesses ------------------------------------------------------------

def test_g2_examples():
    assert g2_zero(fock_state(10, 1)) == pytest.approx(0, abs=1e-15)
    assert g2_zero(fock_state(10, 2)) == pytest.approx(0.5, abs=1e-15)
    assert g2_zero(thermal_state(60, 0.2)) == pytest.approx(2, abs=1e-6)
    assert g2_zero(coherent_state(40, 1.3 + 0.4j)) == pytest.approx(1, abs=1e-6)
    with pytest.raises(UndefinedMetricError):
        g2_zero(fock_state(5, 0))


def test_fock_fidelity_examples():
    assert fock_fidelity(fock_state(5, 1), 1) == 1.0
    assert fock_fidelity(thermal_state(15, 0.003), 0) == pytest.approx(0.99850, abs=5e-6)
    with pytest.raises(ValueError):
        fock_fidelity(fock_state(5, 1), 5)


def test_fock_distribution(rng):
    np.testing.assert_array_equal(fock_distribution(fock_state(4, 1)), [0, 1, 0, 0])
    nbar = 0.3
    q = nbar / (1 + nbar)
    p = fock_distribution(thermal_state(60, nbar))
    np.testing.assert_allclose(p, q ** np.arange(60) / (1 + nbar), rtol=1e-12, atol=1e-300)
    m = random_state(8, rng)
    for n in range(8):
        others = sum(fock_distribution(m)[k] for k in range(8) if k != n)
        assert fock_fidelity(m, n) ** 2 + others == pytest.approx(1, abs=1e-8)


def test_pure_target_fidelity():
    psi = np.array([1, 1, 0]) / np.sqrt(2)
    assert pure_target_fidelity(np.outer(psi, psi), psi) == pytest.approx(1)
    assert pure_target_fidelity(np.eye(3) / 3, psi) == pytest.approx(1 / np.sqrt(3))
    with pytest.raises(ValueError):
        pure_target_fidelity(np.eye(2) / 2, psi)


def test_state_fidelity(rng):
    r = random_state(4, rng)
    assert state_fidelity(r, r) == pytest.approx(1, abs=1e-9)
    assert state_fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(0, abs=1e-12)
    assert state_fidelity(np.eye(2) / 2, np.diag([1.0, 0])) == pytest.approx(2 ** -0.5, abs=1e-12)
    s = random_state(4, rng)
    assert abs(state_fidelity(r, s) - state_fidelity(s, r)) < 1e-9
    psi = random_unitary(4, rng)[:, 0]
    assert state_fidelity(r, np.outer(psi, psi.conj())) == pytest.approx(pure_target_fidelity(r, psi), abs=1e-9)
    with pytest.raises(ValueError):
        state_fidelity(np.eye(2), np.eye(2) / 2)


def test_trace_distance():
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1)
    assert trace_distance(np.eye(2) / 2, np.eye(2) / 2) == 0


# -- Wigner ------------------------------------------------------------------------

def test_wigner_center_values():
    origin = [0.0]
    assert wigner(fock_state(6, 0), origin, origin).values[0, 0] == pytest.approx(2 / np.pi, abs=1e-8)
    assert wigner(fock_state(6, 1), origin, origin).values[0, 0] == pytest.approx(-2 / np.pi, abs=1e-8)
    nbar = 0.4
    w = wigner(thermal_state(60, nbar), origin, origin).values[0, 0]
    assert w == pytest.approx((2 / np.pi) / (2 * nbar + 1), abs=1e-8)


def test_wigner_matches_gaussian_for_coherent_state():
    alpha = 0.7 - 0.3j
    grid = wigner(coherent_state(30, alpha), extent=3, points=31)
    a = grid.re_axis[None, :] + 1j * grid.im_axis[:, None]
    ref = (2 / np.pi) * np.exp(-2 * np.abs(a - alpha) ** 2)
    np.testing.assert_allclose(grid.values, ref, atol=1e-10)


def test_wigner_normalization_and_rotational_symmetry():
    rho = 0.6 * fock_state(8, 1).matrix + 0.4 * fock_state(8, 2).matrix
    grid = wigner(rho, extent=5, points=101)
    assert grid.normalization == pytest.approx(1, abs=0.02)
    grid.check_normalization()
    assert grid.minimum < 0
    for r in (0.3, 0.9, 1.7):
        ang = np.linspace(0, 2 * np.pi, 13)
        vals = [wigner(rho, [r * np.cos(a)], [r * np.sin(a)]).values[0, 0] for a in ang]
        assert np.ptp(vals) < 1e-8


def test_wigner_coarse_grid_is_flagged():
    with pytest.raises(ValueError):
        wigner(fock_state(8, 3), extent=1.0, points=11).check_normalization()


# -- concurrence -------------------------------------------------------------------

def test_concurrence_examples(rng):
    assert concurrence(np.outer(PHI_PLUS, PHI_PLUS)) == pytest.approx(1, abs=1e-10)
    prod = np.kron(random_state(2, rng, rank=1), random_state(2, rng))
    assert concurrence(prod) == pytest.approx(0, abs=1e-8)
    p = 0.9
    werner = p * np.outer(PHI_PLUS, PHI_PLUS) + (1 - p) * np.eye(4) / 4
    assert concurrence(werner) == pytest.approx(0.85, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_concurrence_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(4, rng, rank=2)
    u = np.kron(random_unitary(2, rng), random_unitary(2, rng))
    assert abs(concurrence(u @ rho @ u.conj().T) - concurrence(rho)) < 1e-8
    assert 0 <= concurrence(rho) <= 1


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1))
def test_werner_closed_form(p):
    werner = p * np.outer(PHI_PLUS, PHI_PLUS) + (1 - p) * np.eye(4) / 4
    assert concurrence(werner) == pytest.approx(max(0, (3 * p - 1) / 2), abs=1e-8)


# -- discord -----------------------------------------------------------------------

def test_discord_examples():
    assert discord_x(bd_state(BellDiagonalSpec(0, 0, 0))) == pytest.approx(0, abs=1e-12)
    assert discord_x(np.outer(PHI_PLUS, PHI_PLUS)) == pytest.approx(1, abs=1e-9)
    classical = np.diag([0.4, 0.1, 0.2, 0.3])
    assert discord_x(classical) == 0.0


def test_discord_bell_diagonal_against_grid_oracle():
    rho = bd_state(BellDiagonalSpec(1, -0.9, 0.9)).matrix
    assert discord_x(rho) == pytest.approx(brute_force_discord(rho), abs=1e-4)


def test_discord_random_x_states_against_grid_oracle():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        rho = random_x_state(rng)
        qd = discord_x(rho)
        assert qd >= 0
        worst = max(worst, abs(qd - brute_force_discord(rho, 360, 360)))
    assert worst < 1e-4


def test_discord_rejects_non_x_states(rng):
    with pytest.raises(ValueError):
        discord_x(random_state(4, rng))
    assert is_x_form(bd_state(BellDiagonalSpec(0.3, -0.2, 0.5)).matrix)


def test_entropy_bits():
    assert entropy(np.eye(4) / 4) == pytest.approx(2)
    assert entropy(np.diag([1.0, 0.0])) == 0
