"""Operator algebra on a truncated Fock mode tensored with qubits.

Subsystem ordering is ``[spin 1, ..., spin N, phonon]``.  Spin factors use
the basis ``(|e>, |g>)`` so that ``sigma_z = diag(+1, -1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8


class StateValidationError(ValueError):
    """Raised when a matrix fails the density-matrix checks."""


@dataclass(frozen=True)
class Layout:
    """Ordered subsystem dimensions of a composite Hilbert space."""

    dims: tuple[int, ...]

    def __init__(self, dims):
        dims = tuple(int(x) for x in dims)
        if not dims:
            raise ValueError("a layout needs at least one subsystem")
        if any(x < 2 for x in dims):
            raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    @classmethod
    def spins_and_mode(cls, n_spins: int, d: int) -> "Layout":
        return cls((2,) * n_spins + (d,))


def _as_layout(layout) -> Layout:
    return layout if isinstance(layout, Layout) else Layout(layout)


def _frozen(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix tagged with the layout it acts on."""

    matrix: np.ndarray
    layout: Layout

    def __init__(self, matrix, layout=None):
        m = _frozen(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        layout = Layout((m.shape[0],)) if layout is None else _as_layout(layout)
        if layout.size != m.shape[0]:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match layout {layout.dims}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "layout", layout)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    @property
    def shape(self):
        return self.matrix.shape

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) < tol)

    def _check(self, other: "Operator"):
        if self.layout != other.layout:
            raise ValueError(f"layout mismatch: {self.dims} vs {other.dims}")

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix @ other.matrix, self.layout)
        return self.matrix @ other

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix + other.matrix, self.layout)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix - other.matrix, self.layout)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(scalar * self.matrix, self.layout)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.matrix, self.layout)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator.

    Construction validates the state; ``validate=False`` skips the checks
    for intermediate results that are known to be physical.
    """

    def __init__(self, matrix, layout=None, *, validate: bool = True,
                 trace_tol: float = TRACE_TOL, herm_tol: float = HERMITIAN_TOL,
                 pos_tol: float = POSITIVITY_TOL):
        super().__init__(matrix, layout)
        if validate:
            check_state(self.matrix, trace_tol=trace_tol, herm_tol=herm_tol,
                        pos_tol=pos_tol)

    @classmethod
    def from_ket(cls, psi, layout=None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(np.outer(psi, psi.conj()), layout)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return np.linalg.eigvalsh(h)


def check_state(matrix, *, trace_tol=TRACE_TOL, herm_tol=HERMITIAN_TOL,
                pos_tol=POSITIVITY_TOL) -> None:
    """Raise :class:`StateValidationError` if ``matrix`` is not a valid state."""
    m = np.asarray(matrix)
    herm = np.max(np.abs(m - m.conj().T), initial=0.0)
    if herm > herm_tol:
        raise StateValidationError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(m)
    if abs(tr - 1.0) > trace_tol:
        raise StateValidationError(f"trace {tr.real:.12f} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    if lam < pos_tol:
        raise StateValidationError(f"smallest eigenvalue {lam:.3e} below {pos_tol:g}")


def as_matrix(x) -> np.ndarray:
    """Plain ndarray view of an Operator or array-like."""
    if isinstance(x, Operator):
        return x.matrix
    return np.asarray(x)


def destroy(d: int) -> Operator:
    """Annihilation operator on a mode truncated to ``d`` Fock states."""
    if d < 2:
        raise ValueError(f"truncation d must be >= 2, got {d}")
    return Operator(np.diag(np.sqrt(np.arange(1, d)), 1), Layout((d,)))


def number(d: int) -> Operator:
    return Operator(np.diag(np.arange(d, dtype=float)), Layout((d,)))


_SPIN = {
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def spin_op(kind: str) -> Operator:
    """Pauli or ladder matrix in the ``(|e>, |g>)`` basis.

    ``kind`` is one of ``z``, ``plus``, ``minus``, ``x``, ``y``.
    """
    try:
        return Operator(_SPIN[kind], Layout((2,)))
    except KeyError:
        raise ValueError(f"unknown spin operator {kind!r}; expected one of {sorted(_SPIN)}") from None


def identity(layout) -> Operator:
    layout = _as_layout(layout)
    return Operator(np.eye(layout.size), layout)


def embed(op, site: int, layout) -> Operator:
    """Place a single-subsystem operator on factor ``site`` of ``layout``."""
    layout = _as_layout(layout)
    n = len(layout)
    if not -n <= site < n:
        raise IndexError(f"site {site} out of range for layout {layout.dims}")
    site %= n
    m = as_matrix(op)
    if m.shape != (layout.dims[site],) * 2:
        raise ValueError(
            f"operator of shape {m.shape} cannot act on factor {site} of dimension "
            f"{layout.dims[site]}"
        )
    factors = [np.eye(k) for k in layout.dims]
    factors[site] = m
    return Operator(reduce(np.kron, factors), layout)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of matrices, left to right."""
    return reduce(np.kron, [as_matrix(o) for o in ops])


def partial_trace(rho, keep, layout=None) -> DensityMatrix:
    """Reduced state on the subsystems in ``keep`` (kept in ascending order)."""
    if layout is None:
        if not isinstance(rho, Operator):
            raise ValueError("a layout is required when passing a bare array")
        layout = rho.layout
    layout = _as_layout(layout)
    if np.isscalar(keep):
        keep = [keep]
    keep = sorted({int(k) for k in keep})
    n = len(layout)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"keep indices {keep} out of range for {n} subsystems")
    m = as_matrix(rho)
    dims = layout.dims
    t = m.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # contract each traced factor's row and column index together
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for k in traced:
        cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    kd = tuple(dims[k] for k in keep)
    size = int(np.prod(kd))
    return DensityMatrix(reduced.reshape(size, size), Layout(kd), validate=False)


def expect(op, rho) -> complex:
    """``Tr(op @ rho)``."""
    if isinstance(op, Operator) and isinstance(rho, Operator) and op.layout != rho.layout:
        raise ValueError(f"layout mismatch: {op.dims} vs {rho.dims}")
    a, r = as_matrix(op), as_matrix(rho)
    if a.shape != r.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {r.shape}")
    return complex(np.einsum("ij,ji->", a, r))
