"""Deterministic density-matrix emulation of the two-emitter noise circuit.

Qubit ``|0>`` is identified with the excited state ``|e>`` so that matrices
match the spin basis used elsewhere; amplitude damping therefore moves
population from index 0 to index 1.

Stages: (I) Bell-diagonal preparation, (II) phonon-induced dephasing driven
by the coherence factor, (III) amplitude damping of each emitter, (IV)
read-out of the full two-qubit density matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .analytic import BellDiagonalSpec, coherence_factor
from .hilbert import DensityMatrix, Layout, as_matrix, check_state

log = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
# controlled-X with the second qubit as control, used in the preparation stage
CX_REVERSED = np.array([
    [1, 0, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
], dtype=complex)
CNOT = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=complex)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    ops: tuple[np.ndarray, ...]

    def __init__(self, ops, tol: float = 1e-10):
        ops = tuple(np.asarray(k, dtype=complex) for k in ops)
        dim = ops[0].shape[0]
        total = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(total - np.eye(dim)))
        if err > tol:
            raise ValueError(f"Kraus operators are not complete: deviation {err:.2e}")
        object.__setattr__(self, "ops", ops)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.ops[0].shape[0])))

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)


def _lift(op: np.ndarray, targets, n: int) -> np.ndarray:
    """Full-register matrix of ``op`` acting on ``targets`` (in that order)."""
    targets = list(targets)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"gate of shape {op.shape} does not act on {k} qubit(s)")
    if len(set(targets)) != k or min(targets) < 0 or max(targets) >= n:
        raise ValueError(f"invalid targets {targets} for a {n}-qubit register")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** (n - k)))
    # full acts on order targets + rest; permute into register order
    order = targets + rest
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)


def _register_size(m: np.ndarray) -> int:
    n = int(round(np.log2(m.shape[0])))
    if 2**n != m.shape[0]:
        raise ValueError("register dimension must be a power of two")
    return n


def apply_gate(state, gate, targets) -> DensityMatrix:
    """``rho -> U rho U^+`` with ``U`` acting on ``targets``."""
    m = as_matrix(state)
    u = np.asarray(gate, dtype=complex)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
        raise ValueError("gate is not unitary")
    n = _register_size(m)
    if np.isscalar(targets):
        targets = [targets]
    full = _lift(u, targets, n)
    return DensityMatrix(full @ m @ full.conj().T, Layout((2,) * n), validate=False)


def apply_channel(state, channel: KrausChannel, targets) -> DensityMatrix:
    """Apply ``channel`` to ``targets``.

    A single-qubit channel given several targets acts independently on each.
    """
    m = as_matrix(state)
    n = _register_size(m)
    if np.isscalar(targets):
        targets = [targets]
    targets = list(targets)
    groups = [[q] for q in targets] if channel.n_qubits == 1 else [targets]
    for group in groups:
        lifted = [_lift(k, group, n) for k in channel]
        m = sum(k @ m @ k.conj().T for k in lifted)
    return DensityMatrix(m, Layout((2,) * n), validate=False)


def prep_angles(spec: BellDiagonalSpec):
    """Ancilla rotation angles and Bell weights ``p_jk`` for a Bell-diagonal state.

    Returns ``(phi_a, phi_b, p)`` with ``p = {"00": ..., "01": ..., "10": ..., "11": ...}``.
    """
    c1, c2, c3 = spec.c
    p = {
        "00": (1 + c1 - c2 + c3) / 4,
        "01": (1 - c1 + c2 + c3) / 4,
        "10": (1 + c1 + c2 - c3) / 4,
        "11": (1 - c1 - c2 - c3) / 4,
    }
    for key, v in p.items():
        if v < -1e-12 or v > 1 + 1e-12:
            raise ValueError(f"p_{key} = {v} outside [0, 1]")
        p[key] = min(max(v, 0.0), 1.0)
    phi_a = 2 * np.arccos(np.sqrt(min(p["00"] + p["01"], 1.0)))
    phi_b = 2 * np.arccos(np.sqrt(min(p["00"] + p["10"], 1.0)))
    return float(phi_a), float(phi_b), p


# Pauli applied to the first qubit of |phi+> for each Bell label
_BELL_PAULI = {"00": I2, "01": Z, "10": X, "11": X @ Z}


def bell_state(label: str) -> np.ndarray:
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.kron(_BELL_PAULI[label], I2) @ phi


def prepare_bell_diagonal(spec: BellDiagonalSpec) -> DensityMatrix:
    """Stage I: |phi+> by H and controlled-X, then a Pauli mixture weighted by ``p_jk``."""
    _, _, p = prep_angles(spec)
    rho = DensityMatrix(np.diag([1, 0, 0, 0]).astype(complex), Layout((2, 2)))
    rho = apply_gate(rho, H, 1)
    rho = apply_gate(rho, CX_REVERSED, [0, 1])
    mix = KrausChannel([np.sqrt(p[k]) * _BELL_PAULI[k] for k in ("00", "01", "10", "11")])
    return apply_channel(rho, mix, [0])


def prepare_bell_diagonal_ancilla(spec: BellDiagonalSpec) -> DensityMatrix:
    """Gate-level preparation with two ancillas rotated by ``R_y``.

    Register order is ``[A, B, anc_a, anc_b]``; ancilla ``a`` controls a bit
    flip and ancilla ``b`` a phase flip on ``A``.  The ancillas are
    independent, so this reproduces the Bell weights only when they factorize,
    ``p_jk = (p_j0 + p_j1)(p_0k + p_1k)``.
    """
    phi_a, phi_b, _ = prep_angles(spec)
    psi = np.zeros(16, dtype=complex)
    psi[0] = 1
    rho = DensityMatrix.from_ket(psi, Layout((2,) * 4))
    rho = apply_gate(rho, H, 1)
    rho = apply_gate(rho, CX_REVERSED, [0, 1])
    rho = apply_gate(rho, ry(phi_a), 2)
    rho = apply_gate(rho, ry(phi_b), 3)
    # ancilla in |1> = excited-index 1 triggers the flip
    ctrl_x = np.eye(4, dtype=complex)
    ctrl_x[2:, 2:] = X
    ctrl_z = np.eye(4, dtype=complex)
    ctrl_z[2:, 2:] = Z
    rho = apply_gate(rho, ctrl_z, [3, 0])
    rho = apply_gate(rho, ctrl_x, [2, 0])
    reduced = np.einsum("abijcdij->abcd", as_matrix(rho).reshape([2] * 8)).reshape(4, 4)
    return DensityMatrix(reduced, Layout((2, 2)), validate=False)


def dephasing_channel(theta_param: float) -> KrausChannel:
    """Single-qubit phase damping: ``E0 = sqrt((1+T)/2) I``, ``E1 = sqrt((1-T)/2) Z``."""
    if not 0 <= theta_param <= 1:
        raise ValueError(f"dephasing parameter {theta_param} outside [0, 1]")
    return KrausChannel([np.sqrt((1 + theta_param) / 2) * I2,
                         np.sqrt((1 - theta_param) / 2) * Z])


def collective_dephasing_channel(a: float) -> KrausChannel:
    """Two-qubit phase flip by ``CZ``.

    Scales the ``|00><11|`` coherence by ``a`` and leaves ``|01><10|``
    untouched, as the collective coupling to one phonon mode does.
    """
    if not 0 <= a <= 1:
        raise ValueError(f"coherence factor {a} outside [0, 1]")
    return KrausChannel([np.sqrt((1 + a) / 2) * np.eye(4), np.sqrt((1 - a) / 2) * CZ])


def amplitude_damping_channel(p: float) -> KrausChannel:
    """Decay of ``|e>`` (index 0) to ``|g>`` with excited survival probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError(f"survival parameter {p} outside [0, 1]")
    e0 = np.array([[np.sqrt(p), 0], [0, 1]], dtype=complex)
    e1 = np.array([[0, 0], [np.sqrt(1 - p), 0]], dtype=complex)
    return KrausChannel([e0, e1])


def p_ad(t: float, gamma_s: float) -> float:
    """Excited-state survival used for the damping stage."""
    if gamma_s == 0:
        return 1.0
    if not 0 < gamma_s < 2:
        raise ValueError(f"gamma_s = {gamma_s} outside (0, 2); the oscillation rate would be complex")
    if t < 0:
        raise ValueError("t must be >= 0")
    r = np.sqrt(2 * gamma_s - gamma_s**2)
    val = np.exp(-gamma_s * t) * ((gamma_s / r) * np.sin(r * t / 2) + np.cos(r * t / 2)) ** 2
    if val < -1e-12:
        raise ValueError(f"p_AD evaluated to {val}")
    return float(min(max(val, 0.0), 1.0))


def dephasing_angle(theta_param: float) -> float:
    """Controlled-RX angle that realizes the dephasing channel on an ancilla."""
    return float(2 * np.arccos(theta_param))


def damping_angle(p: float) -> float:
    return float(2 * np.arccos(np.sqrt(p)))


def run_protocol(spec: BellDiagonalSpec, t: float, g0: float, nbar: float,
                 gamma_s: float, *, dephasing: str = "collective",
                 order: str = "dephasing-first", d: int = 40) -> DensityMatrix:
    """Two-qubit state produced by the emulated circuit at time ``t``.

    ``dephasing="collective"`` applies the CZ phase flip with the coherence
    factor ``A``; ``"local"`` applies the single-qubit channel with
    ``sqrt(A)`` to each qubit, which also damps the ``|01><10|`` coherence.
    """
    if order not in ("dephasing-first", "damping-first"):
        raise ValueError(f"unknown stage order {order!r}")
    rho = prepare_bell_diagonal(spec)
    a = min(max(coherence_factor(t, g0, nbar, d), 0.0), 1.0)
    if dephasing == "collective":
        stage2 = (collective_dephasing_channel(a), [0, 1])
    elif dephasing == "local":
        stage2 = (dephasing_channel(np.sqrt(a)), [0, 1])
    else:
        raise ValueError(f"unknown dephasing mode {dephasing!r}")
    stage3 = (amplitude_damping_channel(p_ad(t, gamma_s)), [0, 1])
    stages = [stage2, stage3] if order == "dephasing-first" else [stage3, stage2]
    for channel, targets in stages:
        rho = apply_channel(rho, channel, targets)
    m = as_matrix(rho)
    check_state(m)
    return DensityMatrix(m, Layout((2, 2)), validate=False)


def ordering_sensitivity(spec: BellDiagonalSpec, times, g0: float, nbar: float,
                         gamma_s: float, **kw) -> float:
    """Largest trace distance between the two stage orderings over ``times``."""
    from .metrics import trace_distance

    worst = 0.0
    for t in times:
        a = run_protocol(spec, t, g0, nbar, gamma_s, order="dephasing-first", **kw)
        b = run_protocol(spec, t, g0, nbar, gamma_s, order="damping-first", **kw)
        worst = max(worst, trace_distance(a, b))
    log.info("stage ordering sensitivity: max trace distance %.3e", worst)
    return worst
