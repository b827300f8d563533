"""Electron-phonon couplings from excited-state forces projected on phonon modes.

Input files are plain text exported from an external phonon/DFT workflow:

* forces: one force component per line (meV/Angstrom), ``3N`` lines, ``#`` comments allowed.
* modes: a header line ``# frequencies: w_1 w_2 ...`` (meV), an optional
  ``# labels: l_1 l_2 ...`` line, then one whitespace-separated row per mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ForceField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0 or v.size % 3:
            raise ValueError(f"force vector length {v.size} is not a positive multiple of 3")
        object.__setattr__(self, "values", v)

    @property
    def n_atoms(self) -> int:
        return self.values.size // 3


@dataclass(frozen=True)
class ModeBasis:
    """Phonon eigenvectors as rows, with frequencies (meV) and optional labels."""

    modes: np.ndarray
    frequencies: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.modes, dtype=float))
        f = np.asarray(self.frequencies, dtype=float).ravel()
        if f.size != m.shape[0]:
            raise ValueError(f"{f.size} frequencies for {m.shape[0]} modes")
        norms = np.linalg.norm(m, axis=1)
        bad = np.nonzero(np.abs(norms - 1) > 1e-8)[0]
        if bad.size:
            raise ValueError(f"mode {bad[0]} has norm {norms[bad[0]]:.10f}; rows must be normalized")
        if self.labels is not None and len(self.labels) != m.shape[0]:
            raise ValueError("one label per mode is required")
        object.__setattr__(self, "modes", m)
        object.__setattr__(self, "frequencies", f)


def project_forces(forces: ForceField, basis: ModeBasis) -> np.ndarray:
    """Signed coupling ``g_k = sum_j F_j r_kj`` for every mode ``k``."""
    if basis.modes.shape[1] != forces.values.size:
        raise ValueError(
            f"modes have {basis.modes.shape[1]} components but forces have {forces.values.size}"
        )
    return basis.modes @ forces.values


def reconstruct_forces(couplings, basis: ModeBasis) -> np.ndarray:
    return np.asarray(couplings) @ basis.modes


def scale_to_energy(g_mev_a, lattice_a: float = 2.5):
    """Divide by the lattice parameter to turn meV*A into meV.

    An order-of-magnitude convention, not a rigorous unit transformation.
    """
    if lattice_a <= 0:
        raise ValueError("lattice parameter must be positive")
    return np.asarray(g_mev_a) / lattice_a if np.ndim(g_mev_a) else float(g_mev_a) / lattice_a


def _header(lines, key):
    for line in lines:
        s = line.strip()
        if s.startswith("#") and s[1:].strip().lower().startswith(key + ":"):
            return s[1:].split(":", 1)[1].split()
    return None


def read_forces(path) -> ForceField:
    data = np.loadtxt(path, comments="#", ndmin=1)
    return ForceField(data.ravel())


def read_modes(path) -> ModeBasis:
    lines = Path(path).read_text().splitlines()
    freqs = _header(lines, "frequencies")
    if freqs is None:
        raise ValueError(f"{path}: missing '# frequencies:' header line")
    labels = _header(lines, "labels")
    rows = np.loadtxt(path, comments="#", ndmin=2)
    return ModeBasis(rows, np.array(freqs, dtype=float), tuple(labels) if labels else None)


def extract_couplings(forces: ForceField, basis: ModeBasis, lattice_a: float = 2.5,
                      select_label: str | None = None):
    """Rows of ``(mode index, frequency, g_k, |g_k|, g_k / lattice)``."""
    g = project_forces(forces, basis)
    idx = np.arange(g.size)
    if select_label is not None:
        if basis.labels is None:
            raise ValueError("mode file has no labels to select from")
        idx = np.array([k for k, lab in enumerate(basis.labels) if lab == select_label], dtype=int)
    return [(int(k), float(basis.frequencies[k]), float(g[k]), float(abs(g[k])),
             float(scale_to_energy(g[k], lattice_a))) for k in idx]
