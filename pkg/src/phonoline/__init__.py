"""Quantum state generation with emitters coupled to a single phonon line.

The package models one or two driven two-level emitters coupled to one
bosonic phonon mode, integrates the Lindblad master equation, and evaluates
state witnesses (Fock and qubit fidelities, g2, Wigner function,
concurrence, discord).  Closed-form lossless dynamics and a Kraus-channel
circuit emulation serve as cross-checks.
"""
from .analytic import BellDiagonalSpec, bd_evolution, bd_state, coherence_factor
from .circuit import run_protocol
from .config import ConfigError, load_scenario, scenario_names
from .coupling import extract_couplings, project_forces, read_forces, read_modes
from .hilbert import DensityMatrix, Layout, Operator, StateValidationError, partial_trace
from .lindblad import (
    IntegrationError, Liouvillian, SteadyStateError, Trajectory, TruncationError,
    build_liouvillian, evolve, steady_state,
)
from .metrics import (
    UndefinedMetricError, concurrence, discord_x, fock_fidelity, g2_zero, purity,
    state_fidelity, wigner,
)
from .model import (
    SystemParams, build_dissipators, build_hamiltonian, coherent_state, fock_state,
    joint_initial_state, spin_block_with_phonon, spin_superposition, thermal_state,
)
from .runner import run_scenario, run_sweep, simulate

__version__ = "0.1.0"

__all__ = [
    "BellDiagonalSpec", "ConfigError", "DensityMatrix", "IntegrationError", "Layout",
    "Liouvillian", "Operator", "StateValidationError", "SteadyStateError", "SystemParams",
    "Trajectory", "TruncationError", "UndefinedMetricError",
    "bd_evolution", "bd_state", "build_dissipators", "build_hamiltonian", "build_liouvillian",
    "coherence_factor", "coherent_state", "concurrence", "discord_x", "evolve",
    "extract_couplings", "fock_fidelity", "fock_state", "g2_zero", "joint_initial_state",
    "load_scenario", "partial_trace", "project_forces", "purity", "read_forces", "read_modes",
    "run_protocol", "run_scenario", "run_sweep", "scenario_names", "simulate",
    "spin_block_with_phonon", "spin_superposition", "state_fidelity", "steady_state",
    "thermal_state", "wigner",
]
