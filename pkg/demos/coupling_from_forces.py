"""
Per-mode couplings from excited-state forces
============================================

When an emitter is excited, the surrounding atoms feel a force.  Projecting
that force vector on each phonon eigenvector gives how strongly the mode is
pushed, in meV per angstrom; dividing by a lattice length gives a rough
energy scale that can be fed to the dynamics as ``g``.

The bundled demo files hold a small synthetic set of six modes.
"""

from importlib import resources

import numpy as np

import phonoline as pl

data = resources.files("phonoline") / "scenarios" / "data"
forces = pl.read_forces(data / "demo_forces.txt")
modes = pl.read_modes(data / "demo_modes.txt")

# %%
# Every mode, then only the topological line (label ``TPL``).
print("mode  label     freq(meV)  g(meV/A)   g(meV)")
for k, freq, g, _, g_e in pl.extract_couplings(forces, modes):
    print(f"{k:>4}  {modes.labels[k]:<8}  {freq:8.2f}  {g:+.5f}  {g_e:+.5f}")

(row,) = pl.extract_couplings(forces, modes, select_label="TPL")
print(f"TPL coupling: {row[2]:.4f} meV/A -> {row[4]:.4f} meV")

# %%
# The modes form an orthonormal basis, so the projections conserve the
# squared force (Parseval) and the force can be rebuilt from them.
g = pl.project_forces(forces, modes)
print(f"|F|^2 = {np.sum(forces.values ** 2):.6f}, sum g_k^2 = {np.sum(g ** 2):.6f}")
