import numpy as np
import pytest

from phonoline.analytic import BellDiagonalSpec, bd_evolution, bd_state, coherence_factor, x_state
from phonoline.hilbert import partial_trace
from phonoline.lindblad import build_liouvillian, evolve
from phonoline.metrics import concurrence, discord_x
from phonoline.model import SystemParams, build_dissipators, build_hamiltonian, spin_block_with_phonon, thermal_state

FREEZE = BellDiagonalSpec(1, -0.9, 0.9)
G0, NBAR = 0.33, 0.003


def gaussian_oracle(t, g0, nbar):
    """Thermal expectation of a displacement by 4 g0 (1 - e^{-it})."""
    return np.exp(-0.5 * (4 * g0) ** 2 * abs(1 - np.exp(-1j * t)) ** 2 * (2 * nbar + 1))


def test_bd_state_examples():
    np.testing.assert_allclose(bd_state(BellDiagonalSpec(0, 0, 0)).matrix, np.eye(4) / 4, atol=1e-15)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(bd_state(BellDiagonalSpec(1, -1, 1)).matrix, np.outer(phi, phi), atol=1e-15)
    ev = np.sort(np.linalg.eigvalsh(bd_state(FREEZE).matrix))
    np.testing.assert_allclose(ev, [0, 0, 0.05, 0.95], atol=1e-12)


def test_invalid_spec_names_the_negative_weight():
    with pytest.raises(ValueError, match="psi-"):
        BellDiagonalSpec(1, 1, 1)
    with pytest.raises(ValueError):
        BellDiagonalSpec(1.5, 0, 0)


@pytest.mark.parametrize("t", [0.0, 2 * np.pi, 4 * np.pi])
def test_full_revival(t):
    assert coherence_factor(t, G0, NBAR) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("g0,nbar", [(0.33, 0.003), (0.1, 0.5), (0.45, 0.0)])
def test_coherence_factor_matches_gaussian_oracle(g0, nbar):
    for t in np.linspace(0, 2 * np.pi, 9):
        assert coherence_factor(t, g0, nbar) == pytest.approx(gaussian_oracle(t, g0, nbar), abs=1e-8)


def test_coherence_factor_periodic_and_bounded():
    for t in np.linspace(0.1, 6, 13):
        a = coherence_factor(t, G0, NBAR)
        assert 0 < a <= 1
        assert abs(a - coherence_factor(t + 2 * np.pi, G0, NBAR)) < 1e-9


def test_coherence_factor_detects_truncation():
    with pytest.raises(ValueError, match="truncation"):
        coherence_factor(np.pi, 0.8, 0.5, d=8)


def test_equal_coefficients_are_stationary():
    spec = BellDiagonalSpec(0.3, 0.3, -0.2)
    ref = bd_state(spec).matrix
    for t in (0.7, 2.0, 3.3):
        np.testing.assert_allclose(bd_evolution(spec, t, G0, NBAR).matrix, ref, atol=1e-15)


def test_uncoupled_state_is_constant():
    for t in (0.5, 3.0):
        np.testing.assert_allclose(bd_evolution(FREEZE, t, 0.0, NBAR).matrix, bd_state(FREEZE).matrix, atol=1e-12)


def test_x_state_at_unit_factor_is_bell_diagonal():
    np.testing.assert_allclose(x_state(FREEZE, 1.0), bd_state(FREEZE).matrix, atol=1e-15)


def test_evolution_stays_physical_and_revives():
    for t in np.linspace(0, 4 * np.pi, 41):
        assert np.linalg.eigvalsh(bd_evolution(FREEZE, t, G0, NBAR).matrix).min() > -1e-10
    c0 = concurrence(bd_evolution(FREEZE, 0.0, G0, NBAR))
    assert concurrence(bd_evolution(FREEZE, 2 * np.pi, G0, NBAR)) == pytest.approx(c0, abs=1e-6)


def test_matches_master_equation():
    p = SystemParams(n_spins=2, d=15, g=G0, nbar_b=NBAR)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = spin_block_with_phonon(bd_state(FREEZE), thermal_state(15, NBAR))
    times = np.linspace(0, 4 * np.pi, 9)
    traj = evolve(rho0, liou, times)
    for t, rho in zip(times, traj.states):
        spins = partial_trace(rho, [0, 1]).matrix
        np.testing.assert_allclose(spins, bd_evolution(FREEZE, t, G0, NBAR).matrix, atol=1e-6)


def _dominant_branch(a):
    c1, c2, c3 = FREEZE.c
    c1t = 0.5 * ((c1 + c2) + (c1 - c2) * a)
    c2t = 0.5 * ((c1 + c2) - (c1 - c2) * a)
    return int(np.argmax([abs(c1t), abs(c2t), abs(c3)]))


def test_discord_nearly_freezes_between_branch_switches():
    times = np.linspace(0, 4 * np.pi, 801)
    a = np.array([coherence_factor(t, G0, NBAR) for t in times])
    qd = np.array([discord_x(x_state(FREEZE, v)) for v in a])
    branch = np.array([_dominant_branch(v) for v in a])
    edges = np.flatnonzero(np.diff(branch)) + 1
    windows = [w for w in np.split(np.arange(times.size), edges) if w.size > 2]
    # while c1 dominates the classical correlation the discord barely moves,
    # although the coherence factor falls from 1 to about 0.9
    frozen = [w for w in windows if branch[w[0]] == 0]
    assert len(frozen) >= 2
    for w in frozen:
        assert np.ptp(qd[w]) < 5e-3
    assert max(np.ptp(a[w]) for w in frozen) > 0.09
    moving = [w for w in windows if branch[w[0]] != 0]
    assert min(np.ptp(qd[w]) for w in moving) > 0.5
