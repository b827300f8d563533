"""Rotating-frame spin-boson model: Hamiltonian, dissipators, initial states.

All quantities are in units of the phonon frequency, which is therefore 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.special import gammaln

from .hilbert import DensityMatrix, Layout, Operator, destroy, embed, spin_op

TAIL_TOL = 1e-9


def _per_spin(value, n: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * n
    out = tuple(float(v) for v in value)
    if len(out) != n:
        raise ValueError(f"{name} has {len(out)} entries, expected n_spins={n}")
    return out


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters in units of the phonon frequency.

    Per-spin quantities (``delta``, ``g``, ``omega_drive``) accept a scalar,
    which is broadcast to every emitter.
    """

    n_spins: int = 1
    d: int = 15
    delta: tuple[float, ...] = 0.0
    g: tuple[float, ...] = 0.33
    omega_drive: tuple[float, ...] = 0.0
    gamma_b: float = 0.0
    gamma_s: float = 0.0
    gamma_phi: float = 0.0
    nbar_b: float = 0.0
    nbar_s: float = 0.0

    def __post_init__(self):
        n = int(self.n_spins)
        if n < 1:
            raise ValueError("n_spins must be positive")
        if self.d < 2:
            raise ValueError("phonon truncation d must be >= 2")
        object.__setattr__(self, "n_spins", n)
        object.__setattr__(self, "d", int(self.d))
        for name in ("delta", "g", "omega_drive"):
            object.__setattr__(self, name, _per_spin(getattr(self, name), n, name))
        for name in ("gamma_b", "gamma_s", "gamma_phi", "nbar_b", "nbar_s"):
            v = float(getattr(self, name))
            if v < 0 or not np.isfinite(v):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)

    @property
    def layout(self) -> Layout:
        return Layout.spins_and_mode(self.n_spins, self.d)

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class Dissipator:
    """One Lindblad term ``rate * (2 J rho J^+ - J^+J rho - rho J^+J)``."""

    rate: float
    jump: Operator
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"dissipator rate must be >= 0, got {self.rate}")


def build_hamiltonian(p: SystemParams) -> Operator:
    """Time-independent rotating-frame Hamiltonian on ``[spins..., phonon]``."""
    layout = p.layout
    b = embed(destroy(p.d), -1, layout).matrix
    h = b.conj().T @ b
    x = b + b.conj().T
    sz, sx = spin_op("z").matrix, spin_op("x").matrix
    for j in range(p.n_spins):
        z = embed(sz, j, layout).matrix
        h = h + 0.5 * p.delta[j] * z + p.g[j] * (z @ x) + p.omega_drive[j] * embed(sx, j, layout).matrix
    # exact Hermitian by construction up to rounding in the products
    h = 0.5 * (h + h.conj().T)
    return Operator(h, layout)


def build_dissipators(p: SystemParams) -> list[Dissipator]:
    """Lindblad terms in the fixed order: phonon loss, phonon gain, then per
    spin decay, excitation and dephasing.  Zero-rate terms are dropped."""
    layout = p.layout
    b = embed(destroy(p.d), -1, layout)
    terms = [
        (0.5 * p.gamma_b * (1 + p.nbar_b), b, "b"),
        (0.5 * p.gamma_b * p.nbar_b, b.dag(), "b+"),
    ]
    for j in range(p.n_spins):
        terms += [
            (0.5 * p.gamma_s * (1 + p.nbar_s), embed(spin_op("minus"), j, layout), f"sm{j}"),
            (0.5 * p.gamma_s * p.nbar_s, embed(spin_op("plus"), j, layout), f"sp{j}"),
            (0.5 * p.gamma_phi, embed(spin_op("z"), j, layout), f"sz{j}"),
        ]
    return [Dissipator(rate, op, label) for rate, op, label in terms if rate > 0]


def bose_einstein(omega: float, kT: float) -> float:
    """Mean thermal occupation ``1 / (exp(omega/kT) - 1)``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if kT < 0:
        raise ValueError("kT must be >= 0")
    if kT == 0:
        return 0.0
    return float(1.0 / np.expm1(omega / kT))


def thermal_state(d: int, nbar: float) -> DensityMatrix:
    """Truncated thermal state, diagonal in the Fock basis."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if d < 2:
        raise ValueError("truncation d must be >= 2")
    if nbar == 0:
        p = np.zeros(d)
        p[0] = 1.0
    else:
        q = nbar / (1.0 + nbar)
        tail = q ** d
        if tail >= TAIL_TOL:
            raise ValueError(
                f"truncation d={d} too small for nbar={nbar}: discarded weight {tail:.2e}"
            )
        p = q ** np.arange(d) / (1.0 + nbar)
        p /= p.sum()
    return DensityMatrix(np.diag(p), Layout((d,)))


def fock_state(d: int, n: int) -> DensityMatrix:
    if not 0 <= n < d:
        raise ValueError(f"Fock index {n} outside truncation {d}")
    psi = np.zeros(d)
    psi[n] = 1.0
    return DensityMatrix.from_ket(psi, Layout((d,)))


def coherent_state(d: int, alpha: complex) -> DensityMatrix:
    """Coherent state from its Fock amplitudes, renormalized after truncation."""
    if alpha == 0:
        return fock_state(d, 0)
    n = np.arange(d)
    amp = np.exp(n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) + 1j * np.angle(alpha) * n)
    return DensityMatrix.from_ket(amp / np.linalg.norm(amp), Layout((d,)))


def spin_superposition(alpha: complex, beta: complex) -> DensityMatrix:
    """Projector onto ``alpha|g> + beta|e>`` written in the ``(|e>, |g>)`` basis."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"|alpha|^2 + |beta|^2 = {norm} is not 1")
    return DensityMatrix.from_ket([beta, alpha], Layout((2,)))


def joint_initial_state(spin_states, phonon) -> DensityMatrix:
    """``rho_s1 x ... x rho_sN x rho_b`` on the standard layout."""
    spin_states = list(spin_states)
    if not spin_states:
        raise ValueError("at least one spin state is required")
    mats = []
    for k, s in enumerate(spin_states):
        m = np.asarray(getattr(s, "matrix", s))
        if m.shape != (2, 2):
            raise ValueError(f"spin state {k} has shape {m.shape}, expected (2, 2)")
        mats.append(m)
    pm = np.asarray(getattr(phonon, "matrix", phonon))
    if pm.ndim != 2 or pm.shape[0] != pm.shape[1]:
        raise ValueError("phonon state must be a square matrix")
    full = reduce(np.kron, mats + [pm])
    return DensityMatrix(full, Layout.spins_and_mode(len(mats), pm.shape[0]))


def spin_block_with_phonon(spin_block, phonon) -> DensityMatrix:
    """Joint state from an already-correlated multi-spin block and a phonon state."""
    sb = np.asarray(getattr(spin_block, "matrix", spin_block))
    pm = np.asarray(getattr(phonon, "matrix", phonon))
    n = int(round(np.log2(sb.shape[0])))
    if 2 ** n != sb.shape[0]:
        raise ValueError("spin block dimension must be a power of two")
    return DensityMatrix(np.kron(sb, pm), Layout.spins_and_mode(n, pm.shape[0]))
