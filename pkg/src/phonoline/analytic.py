"""Exact lossless dynamics of two undriven emitters prepared in a Bell-diagonal state.

With no drive and no losses the collective coupling ``g0 (sz1 + sz2)(b + b^+)``
leaves the two-spin state in X form; the only time dependence is a real
coherence factor multiplying the ``|ee><gg|`` corner.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .hilbert import DensityMatrix, Layout, destroy
from .model import thermal_state

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class BellDiagonalSpec:
    """Correlation coefficients ``c_i`` of ``(I + sum_i c_i s_i x s_i) / 4``."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            v = float(getattr(self, name))
            if not -1 - 1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name} = {v} outside [-1, 1]")
            object.__setattr__(self, name, v)
        for label, w in self.bell_weights().items():
            if w < -1e-12:
                raise ValueError(f"Bell weight {label} = {w:.3g} is negative; not a state")

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    def bell_weights(self) -> dict[str, float]:
        """Populations of the four Bell states (phi+, phi-, psi+, psi-)."""
        c1, c2, c3 = self.c
        return {
            "phi+": (1 + c1 - c2 + c3) / 4,
            "phi-": (1 - c1 + c2 + c3) / 4,
            "psi+": (1 + c1 + c2 - c3) / 4,
            "psi-": (1 - c1 - c2 - c3) / 4,
        }


def bd_state(spec: BellDiagonalSpec) -> DensityMatrix:
    m = np.eye(4, dtype=complex)
    for c, s in zip(spec.c, _SIGMA):
        m = m + c * np.kron(s, s)
    return DensityMatrix(m / 4, Layout((2, 2)))


def _coherence_trace(t: float, g0: float, nbar: float, d: int) -> complex:
    b = destroy(d).matrix
    eta = 1 - np.exp(-1j * t)
    disp = sla.expm(4 * g0 * (eta * b.conj().T - np.conj(eta) * b))
    free = np.exp(-1j * t * np.arange(d))
    rho_b = thermal_state(d, nbar).matrix
    rotated = free[:, None] * rho_b * free.conj()[None, :]
    return complex(np.trace(disp @ rotated))


def coherence_factor(t: float, g0: float, nbar: float, d: int = 40, *,
                     check_tol: float = 1e-8) -> float:
    """Thermal trace of the displaced, freely rotated phonon state.

    Evaluated in a truncated Fock space; the result at ``d + 5`` must agree
    to ``check_tol`` or a ``ValueError`` is raised.
    """
    a = _coherence_trace(t, g0, nbar, d)
    a_check = _coherence_trace(t, g0, nbar, d + 5)
    if abs(a - a_check) > check_tol:
        raise ValueError(
            f"truncation d={d} inadequate for g0={g0}, nbar={nbar} at t={t}: "
            f"|A(d) - A(d+5)| = {abs(a - a_check):.2e}"
        )
    if abs(a.imag) > 1e-10:
        raise ValueError(f"coherence factor has imaginary part {a.imag:.2e}")
    return float(a.real)


def x_state(spec: BellDiagonalSpec, a: float) -> np.ndarray:
    """Bell-diagonal X matrix with its outer corners scaled by ``a``."""
    c1, c2, c3 = spec.c
    m = np.diag([1 + c3, 1 - c3, 1 - c3, 1 + c3]).astype(complex)
    m[0, 3] = m[3, 0] = (c1 - c2) * a
    m[1, 2] = m[2, 1] = c1 + c2
    return m / 4


def bd_evolution(spec: BellDiagonalSpec, t: float, g0: float, nbar: float,
                 d: int = 40) -> DensityMatrix:
    """Two-spin state at time ``t`` for the lossless, undriven model."""
    a = coherence_factor(t, g0, nbar, d)
    return DensityMatrix(x_state(spec, a), Layout((2, 2)), trace_tol=1e-10)
