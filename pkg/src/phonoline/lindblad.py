"""Liouvillian construction, time integration and steady states.

Density matrices are vectorized by column stacking, ``vec(A X B) =
(B^T kron A) vec(X)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .hilbert import DensityMatrix, Layout, Operator, StateValidationError, as_matrix, check_state
from .model import Dissipator

log = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
TRUNCATION_TOL = 1e-6


class IntegrationError(RuntimeError):
    """The ODE solver stopped before reaching the final time."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t = {t_reached:.6g})")
        self.t_reached = t_reached


class TruncationError(RuntimeError):
    """The phonon occupation leaked into the top of the truncated Fock space."""


class SteadyStateError(RuntimeError):
    """The Liouvillian kernel is degenerate or its element is not a state."""


def vec(rho) -> np.ndarray:
    return np.asarray(as_matrix(rho)).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Generator of the master equation.

    The dense ``matrix`` (``D^2 x D^2``) is built on first access; integration
    uses the Hamiltonian and jump operators directly, which is much cheaper
    than superoperator products.
    """

    hamiltonian: np.ndarray
    rates: tuple[float, ...]
    jumps: tuple[np.ndarray, ...]
    layout: Layout | None = None
    _sparse: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        if self._sparse is not None:
            return self._sparse
        d = self.dim
        eye = sp.identity(d, dtype=complex, format="csr")
        h = sp.csr_matrix(self.hamiltonian)
        out = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
        for r, j in zip(self.rates, self.jumps):
            js = sp.csr_matrix(j)
            jdj = (js.conj().T @ js).tocsr()
            out = out + r * (2 * sp.kron(js.conj(), js) - sp.kron(eye, jdj) - sp.kron(jdj.T, eye))
        return sp.csr_matrix(out)

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.sparse.toarray()

    @cached_property
    def _effective(self):
        heff = self.hamiltonian.astype(complex)
        for r, j in zip(self.rates, self.jumps):
            heff = heff - 1j * r * (j.conj().T @ j)
        pairs = [(2.0 * r, j, j.conj().T) for r, j in zip(self.rates, self.jumps)]
        return heff, heff.conj().T, pairs

    def apply(self, rho) -> np.ndarray:
        """Right-hand side of the master equation evaluated on a matrix."""
        rho = as_matrix(rho)
        if self._sparse is not None:
            return unvec(self._sparse @ vec(rho), self.dim)
        heff, heff_dag, pairs = self._effective
        out = -1j * (heff @ rho - rho @ heff_dag)
        for r, j, jd in pairs:
            out += r * (j @ rho @ jd)
        return out

    @classmethod
    def from_matrix(cls, matrix, layout=None) -> "Liouvillian":
        """Wrap an explicit superoperator (column-stacking convention)."""
        m = sp.csr_matrix(np.asarray(matrix, dtype=complex))
        dim = int(round(np.sqrt(m.shape[0])))
        if dim * dim != m.shape[0] or m.shape[0] != m.shape[1]:
            raise ValueError("superoperator must be square with a perfect-square size")
        return cls(np.zeros((dim, dim), complex), (), (), layout, m)


def build_liouvillian(hamiltonian, dissipators: Sequence[Dissipator] = ()) -> Liouvillian:
    """Generator of ``-i[H, rho] + sum_k r_k (2 J rho J^+ - J^+J rho - rho J^+J)``."""
    h = as_matrix(hamiltonian).astype(complex)
    layout = hamiltonian.layout if isinstance(hamiltonian, Operator) else None
    rates, jumps = [], []
    for dis in dissipators:
        j = dis.jump
        if isinstance(j, Operator) and layout is not None and j.layout != layout:
            raise ValueError(f"jump layout {j.dims} does not match Hamiltonian {layout.dims}")
        jm = as_matrix(j).astype(complex)
        if jm.shape != h.shape:
            raise ValueError(f"jump shape {jm.shape} does not match Hamiltonian {h.shape}")
        rates.append(float(dis.rate))
        jumps.append(jm)
    h.setflags(write=False)
    return Liouvillian(h, tuple(rates), tuple(jumps), layout)


@dataclass
class Trajectory:
    """Sampled solution of the master equation.

    ``states`` is ``None`` in observable-only mode; ``observables`` maps a
    name to one value per sample time.
    """

    times: np.ndarray
    states: list[DensityMatrix] | None
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.observables[name]


def _check_truncation(m: np.ndarray, layout: Layout, t: float, tol: float) -> None:
    d = layout.dims[-1]
    rest = m.shape[0] // d
    pops = np.einsum("aiai->i", m.reshape(rest, d, rest, d)).real
    top = pops[-2:].max()
    if top > tol:
        raise TruncationError(
            f"top Fock populations reached {top:.2e} at t = {t:.6g} with d = {d}; "
            "increase the truncation"
        )


def _validated(m, layout, t, validate, truncation_tol):
    m = 0.5 * (m + m.conj().T)
    if validate:
        try:
            check_state(m, trace_tol=1e-8, herm_tol=1e-9)
        except StateValidationError as exc:
            raise StateValidationError(f"invalid state at t = {t:.6g}: {exc}") from None
    if truncation_tol is not None and layout is not None and len(layout) > 1 and layout.dims[-1] > 2:
        _check_truncation(m, layout, t, truncation_tol)
    return m


def evolve(rho0, liouvillian: Liouvillian, times, *,
           observables: Mapping[str, Callable[[float, DensityMatrix], float]] | None = None,
           store_states: bool = True, method: str = "DOP853",
           rtol: float = RTOL, atol: float = ATOL, validate: bool = True,
           truncation_tol: float | None = TRUNCATION_TOL) -> Trajectory:
    """Integrate the master equation and sample it at ``times``.

    ``method`` is any adaptive explicit Runge-Kutta scheme known to
    :func:`scipy.integrate.solve_ivp`, or ``"propagator"`` for exact
    exponential stepping on a grid of integer multiples of ``times[1]``.
    """
    times = np.asarray(times, dtype=float)
    layout = rho0.layout if isinstance(rho0, Operator) else liouvillian.layout
    m0 = as_matrix(rho0).astype(complex)
    dim = m0.shape[0]
    if dim != liouvillian.dim:
        raise ValueError(f"state dimension {dim} does not match Liouvillian {liouvillian.dim}")
    observables = dict(observables or {})
    if times.size == 0:
        return Trajectory(times, [] if store_states else None,
                          {k: np.empty(0) for k in observables})
    if times[0] != 0:
        raise ValueError("times must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    if method == "propagator":
        raw = _propagate(m0, liouvillian, times)
    else:
        raw = _integrate(m0, liouvillian, times, method, rtol, atol)

    states = [] if store_states else None
    values = {k: np.empty(times.size) for k in observables}
    for k, (t, m) in enumerate(zip(times, raw)):
        m = _validated(m, layout, t, validate, truncation_tol)
        rho = DensityMatrix(m, layout, validate=False)
        if store_states:
            states.append(rho)
        for name, fn in observables.items():
            values[name][k] = fn(t, rho)
    return Trajectory(times, states, values)


def _integrate(m0, liou, times, method, rtol, atol):
    dim = m0.shape[0]
    if times.size == 1:
        yield m0
        return

    def rhs(_t, y):
        return liou.apply(y.reshape(dim, dim)).reshape(-1)

    sol = solve_ivp(rhs, (times[0], times[-1]), m0.reshape(-1), method=method,
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        reached = float(sol.t[-1]) if sol.t.size else float(times[0])
        raise IntegrationError(f"integrator failed: {sol.message}", reached)
    for k in range(times.size):
        yield sol.y[:, k].reshape(dim, dim)


def _swap_basis(liou: Liouvillian, v0: np.ndarray):
    """Orthonormal basis of swap-invariant operators, or ``None``.

    When the first two factors of the layout are spins, the generator
    commutes with their exchange and the initial state is exchange
    symmetric, the dynamics never leave the subspace of operators with
    ``S X S = X``.  For two spins next to a mode of size ``d`` that subspace
    has dimension ``10 d^2`` instead of ``16 d^2``.
    """
    layout = liou.layout
    if layout is None or len(layout.dims) < 2 or layout.dims[:2] != (2, 2):
        return None
    dim = liou.dim
    s = np.arange(dim).reshape(layout.dims).swapaxes(0, 1).ravel()
    # column stacking: vec index i + dim * j holds X[i, j]
    perm = (s[:, None] + dim * s[None, :]).T.ravel()
    if np.max(np.abs(v0[perm] - v0)) > 1e-14:
        return None
    k = np.arange(dim * dim)
    fixed = k[perm == k]
    lo = k[perm > k]
    rows = np.concatenate([fixed, lo, perm[lo]])
    cols = np.concatenate([np.arange(fixed.size), fixed.size + np.arange(lo.size),
                           fixed.size + np.arange(lo.size)])
    vals = np.concatenate([np.ones(fixed.size), np.full(2 * lo.size, 2 ** -0.5)])
    basis = sp.csr_matrix((vals, (rows, cols)), shape=(dim * dim, fixed.size + lo.size))
    big = liou.sparse
    # L commutes with the exchange iff it maps invariant vectors to invariant vectors
    image = big @ basis
    if spla.norm(image[perm] - image, np.inf) > 1e-12 * max(1.0, spla.norm(big, np.inf)):
        return None
    return basis


def _propagate(m0, liou, times):
    """Exact stepping with ``expm(L h)`` and repeated squaring.

    Every sample time must be an integer multiple of ``h = times[1]``; sample
    ``n h`` is reached by multiplying the binary powers of the base propagator
    selected by the bits of ``n``.  Exchange symmetry between the first two
    spins is used to shrink the dense propagator when it applies.
    """
    dim = m0.shape[0]
    if times.size == 1:
        return [m0]
    h = times[1]
    steps = np.rint(times / h).astype(np.int64)
    if np.max(np.abs(steps * h - times)) > 1e-9 * max(1.0, times[-1]):
        raise ValueError("propagator stepping needs sample times on a uniform multiple of times[1]")
    v0 = vec(m0)
    basis = _swap_basis(liou, v0)
    if basis is None:
        gen, x0 = liou.matrix, v0
    else:
        gen = (basis.T @ (liou.sparse @ basis)).toarray()
        x0 = basis.T @ v0
        log.info("propagating in the exchange-symmetric subspace (%d of %d)", x0.size, v0.size)
    prop = sla.expm(gen * h)
    vecs = [x0.copy() for _ in steps]
    remaining = steps.copy()
    while np.any(remaining):
        for i in np.nonzero(remaining & 1)[0]:
            vecs[i] = prop @ vecs[i]
        remaining >>= 1
        if np.any(remaining):
            prop = prop @ prop
    if basis is not None:
        vecs = [basis @ x for x in vecs]
    return [unvec(v, dim) for v in vecs]


def steady_state(liouvillian: Liouvillian, *, cond_limit: float = 1e13,
                 residual_tol: float = 1e-9) -> DensityMatrix:
    """Unique trace-one fixed point of the Liouvillian.

    One row of ``L`` (a diagonal-element equation, redundant because the
    generator is trace preserving) is replaced by the trace functional and
    the system is solved by sparse LU.  A 1-norm condition estimate of that
    system detects a degenerate kernel.
    """
    dim = liouvillian.dim
    n = dim * dim
    a = liouvillian.sparse.tolil(copy=True)
    trace_row = np.zeros(n, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    a[0, :] = trace_row
    a = a.tocsc()
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise SteadyStateError(f"degenerate Liouvillian kernel: {exc}") from None
    x = lu.solve(rhs)
    inv = spla.LinearOperator(a.shape, matvec=lu.solve,
                              rmatvec=lambda v: lu.solve(v, trans="H"), dtype=complex)
    cond = spla.norm(a, 1) * spla.onenormest(inv)
    if not np.isfinite(cond) or cond > cond_limit or not np.all(np.isfinite(x)):
        raise SteadyStateError(
            f"degenerate Liouvillian kernel (condition estimate {cond:.2e}); "
            "the steady state is not unique"
        )
    m = unvec(x, dim)
    m = 0.5 * (m + m.conj().T)
    m /= np.trace(m).real
    residual = np.max(np.abs(liouvillian.sparse @ vec(m)))
    if residual > residual_tol:
        raise SteadyStateError(f"steady-state residual {residual:.2e} exceeds {residual_tol:g}")
    try:
        check_state(m, trace_tol=1e-10, herm_tol=1e-10)
    except StateValidationError as exc:
        raise SteadyStateError(f"kernel element is not a physical state: {exc}") from None
    return DensityMatrix(m, liouvillian.layout, validate=False)
