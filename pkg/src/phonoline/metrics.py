"""State witnesses and correlation measures.

Fidelities follow the square-root convention ``F = sqrt(<psi|rho|psi>)``;
many references report the square of this number instead.  Entropies are
in bits.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import eval_genlaguerre, gammaln

from .hilbert import as_matrix, check_state

log = logging.getLogger(__name__)

_SY2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
_PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class UndefinedMetricError(ValueError):
    """The requested quantity does not exist for this state."""


def _mode(rho) -> np.ndarray:
    m = as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square single-mode density matrix")
    return m


def fock_distribution(rho_b) -> np.ndarray:
    """Populations of the Fock states ``|0>, |1>, ...``."""
    return np.real(np.diagonal(_mode(rho_b))).copy()


def g2_zero(rho_b) -> float:
    """Equal-time second-order correlation ``<b+^2 b^2> / <b+b>^2``."""
    p = fock_distribution(rho_b)
    n = np.arange(p.size)
    mean = float(np.dot(n, p))
    if mean <= 1e-12:
        raise UndefinedMetricError("g2(0) is undefined for a state with zero mean occupation")
    return float(np.dot(n * (n - 1), p) / mean**2)


def fock_fidelity(rho_b, n: int) -> float:
    """``sqrt(<n|rho|n>)``."""
    p = fock_distribution(rho_b)
    if not 0 <= n < p.size:
        raise ValueError(f"Fock index {n} outside truncation {p.size}")
    return float(np.sqrt(max(p[n], 0.0)))


def pure_target_fidelity(rho, psi) -> float:
    """``sqrt(<psi|rho|psi>)`` for a normalized target ket."""
    m = as_matrix(rho)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != m.shape[0]:
        raise ValueError(f"target of length {psi.size} does not match state dimension {m.shape[0]}")
    if abs(np.vdot(psi, psi) - 1) > 1e-10:
        raise ValueError("target state is not normalized")
    return float(np.sqrt(max(np.real(np.vdot(psi, m @ psi)), 0.0)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    # round-off eigenvalues of order 1e-16 would otherwise contribute 1e-8
    w = np.where(w > 1e-13 * max(w.max(), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho, sigma, validate: bool = True) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``.

    Evaluated as the nuclear norm of ``sqrt(rho) sqrt(sigma)``, which is
    symmetric in its arguments.
    """
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if validate:
        check_state(a, trace_tol=1e-8, herm_tol=1e-9)
        check_state(b, trace_tol=1e-8, herm_tol=1e-9)
    s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(min(s.sum(), 1.0))


def trace_distance(rho, sigma) -> float:
    diff = as_matrix(rho) - as_matrix(sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def purity(rho) -> float:
    m = as_matrix(rho)
    return float(np.real(np.einsum("ij,ji->", m, m)))


# -- Wigner function ---------------------------------------------------------

@dataclass(frozen=True)
class WignerGrid:
    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray  # values[i, j] at re_axis[j] + 1j * im_axis[i]

    @property
    def normalization(self) -> float:
        dx = self.re_axis[1] - self.re_axis[0]
        dy = self.im_axis[1] - self.im_axis[0]
        return float(self.values.sum() * dx * dy)

    def check_normalization(self, tol: float = 0.02) -> None:
        if abs(self.normalization - 1) > tol:
            raise ValueError(
                f"Wigner grid integrates to {self.normalization:.4f}; grid too coarse or too small"
            )

    @property
    def minimum(self) -> float:
        return float(self.values.min())


def _displacement_elements(beta: np.ndarray, d: int):
    """``<m|D(beta)|n>`` for all ``m, n < d`` on an array of ``beta``.

    Uses the generalized Laguerre closed form, exact in the truncated space.
    """
    x = np.abs(beta) ** 2
    gauss = np.exp(-0.5 * x)
    out = np.empty((d, d) + beta.shape, dtype=complex)
    for m in range(d):
        for n in range(d):
            lo, hi = min(m, n), max(m, n)
            k = hi - lo
            pref = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)))
            factor = beta**k if m >= n else (-np.conj(beta)) ** k
            out[m, n] = pref * factor * gauss * eval_genlaguerre(lo, k, x)
    return out


def wigner(rho_b, re_axis=None, im_axis=None, *, extent: float = 4.0, points: int = 81) -> WignerGrid:
    """Wigner function ``W(a) = (2/pi) Tr[rho D(a) P D(a)^+]`` with parity ``P``.

    Normalized so that the integral over the complex plane is one.
    """
    m = _mode(rho_b)
    d = m.shape[0]
    if re_axis is None:
        re_axis = np.linspace(-extent, extent, points)
    if im_axis is None:
        im_axis = np.linspace(-extent, extent, points)
    re_axis = np.asarray(re_axis, float)
    im_axis = np.asarray(im_axis, float)
    alpha = re_axis[None, :] + 1j * im_axis[:, None]
    # D(a) P D(a)^+ = D(2a) P, so W = (2/pi) sum_{m,n} rho_nm (-1)^n <m|D(2a)|n>
    occupied = np.nonzero(np.abs(m) > 1e-15)
    values = np.zeros(alpha.shape)
    if occupied[0].size:
        dmax = int(max(occupied[0].max(), occupied[1].max())) + 1
        el = _displacement_elements(2 * alpha, dmax)
        acc = np.zeros(alpha.shape, dtype=complex)
        for n, mm in zip(*occupied):
            acc += m[n, mm] * (-1) ** n * el[mm, n]
        values = (2 / np.pi) * acc.real
    grid = WignerGrid(re_axis, im_axis, values)
    if re_axis.size > 1 and im_axis.size > 1 and abs(grid.normalization - 1) > 0.02:
        log.warning("Wigner grid integrates to %.4f; enlarge or refine the grid", grid.normalization)
    return grid


# -- two-qubit correlations ----------------------------------------------------

def concurrence(rho_2q) -> float:
    """Wootters concurrence of a two-qubit state."""
    m = as_matrix(rho_2q)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 state, got {m.shape}")
    check_state(m, trace_tol=1e-8, herm_tol=1e-9)
    flipped = _SY2 @ m.conj() @ _SY2
    root = _psd_sqrt(m)
    # same spectrum as rho * rho_tilde, but Hermitian
    ev = np.linalg.eigvalsh(root @ flipped @ root)
    if ev.min() < -1e-10:
        raise ValueError(f"rho * rho_tilde has eigenvalue {ev.min():.2e} < 0")
    lam = np.sort(np.sqrt(np.clip(ev, 0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))


def entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    return _entropy_bits(np.linalg.eigvalsh(as_matrix(rho)))


def _entropy_bits(p) -> float:
    p = np.clip(np.real(p), 0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def _xlog2x(x):
    x = np.clip(x, 0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log2(np.where(x > 0, x, 1)), 0.0)


def _xlog2x_scalar(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def is_x_form(m, tol: float = 1e-8) -> bool:
    mask = np.ones((4, 4), bool)
    mask[np.arange(4), np.arange(4)] = False
    mask[np.arange(4), 3 - np.arange(4)] = False
    return bool(np.max(np.abs(np.asarray(m)[mask])) <= tol)


class _ConditionalEntropy:
    """Post-measurement entropy of qubit A when qubit B is measured along n."""

    def __init__(self, m: np.ndarray):
        t = m.reshape(2, 2, 2, 2)
        self.rho_a = np.einsum("ajbj->ab", t)
        # Tr_B[rho (I x sigma_k)] for k = x, y, z
        self.mk = np.einsum("ajbl,klj->kab", t, _PAULI)

    def scalar(self, theta: float, phi: float) -> float:
        """Same as ``__call__`` for one angle pair, in plain floats (used by the polisher)."""
        st = math.sin(theta)
        n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
        ra, mk = self.rho_a, self.mk
        p00 = sum(n[k] * mk[k, 0, 0].real for k in range(3))
        p11 = sum(n[k] * mk[k, 1, 1].real for k in range(3))
        p01 = sum(n[k] * complex(mk[k, 0, 1]) for k in range(3))
        total = 0.0
        for sign in (1.0, -1.0):
            a = 0.5 * (ra[0, 0].real + sign * p00)
            d = 0.5 * (ra[1, 1].real + sign * p11)
            b = 0.5 * (complex(ra[0, 1]) + sign * p01)
            tr = a + d
            disc = math.sqrt(max((a - d) ** 2 + 4 * abs(b) ** 2, 0.0))
            total += _xlog2x_scalar(tr) - _xlog2x_scalar(0.5 * (tr + disc)) \
                - _xlog2x_scalar(0.5 * (tr - disc))
        return total

    def __call__(self, theta, phi):
        theta = np.asarray(theta, float)
        phi = np.asarray(phi, float)
        n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
        proj = np.einsum("k...,kab->...ab", n, self.mk)
        total = 0.0
        for sign in (1, -1):
            s = 0.5 * (self.rho_a + sign * proj)
            tr = np.real(s[..., 0, 0] + s[..., 1, 1])
            det = np.real(s[..., 0, 0] * s[..., 1, 1] - s[..., 0, 1] * s[..., 1, 0])
            disc = np.sqrt(np.clip(tr**2 - 4 * det, 0, None))
            mu1, mu2 = 0.5 * (tr + disc), 0.5 * (tr - disc)
            total = total - _xlog2x(mu1) - _xlog2x(mu2) + _xlog2x(tr)
        return total


def discord_x(rho_2q, *, grid: tuple[int, int] = (91, 180), validate: bool = True) -> float:
    """Quantum discord (bits) of an X-form two-qubit state, measuring qubit B.

    The candidate measurements along z and in the x-y plane are evaluated
    first; a coarse angle grid followed by local polishing guards against
    states whose optimum lies elsewhere.
    """
    m = as_matrix(rho_2q)
    if m.shape != (4, 4):
        raise ValueError(f"discord needs a 4x4 state, got {m.shape}")
    if validate:
        check_state(m, trace_tol=1e-8, herm_tol=1e-9)
        if not is_x_form(m):
            raise ValueError("state is not of X form")
    cond = _ConditionalEntropy(m)
    t = m.reshape(2, 2, 2, 2)
    s_b = _entropy_bits(np.linalg.eigvalsh(np.einsum("iaib->ab", t)))
    s_ab = _entropy_bits(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))

    phis = np.linspace(0, 2 * np.pi, grid[1], endpoint=False)
    # candidates: sigma_z measurement and the equatorial family
    cands = [(0.0, 0.0)] + [(np.pi / 2, p) for p in phis]
    th, ph = np.meshgrid(np.linspace(0, np.pi / 2, grid[0]), phis, indexing="ij")
    vals = cond(th, ph).ravel()
    order = np.argsort(vals)[:3]
    starts = [(th.ravel()[i], ph.ravel()[i]) for i in order] + cands[:1]
    best = min(vals.min(), float(np.min(cond(*np.array(cands).T))))
    for x0 in starts:
        res = minimize(lambda x: cond.scalar(x[0], x[1]), x0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 2000})
        best = min(best, float(res.fun))
    qd = s_b - s_ab + best
    return float(min(max(qd, 0.0), 1.0))
