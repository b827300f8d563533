"""Scenario execution: dynamics, parameter sweeps, coupling extraction and CSV output."""
from __future__ import annotations

import csv
import re
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, circuit, coupling, metrics
from .config import Axis, ScenarioConfig
from .hilbert import DensityMatrix, partial_trace
from .lindblad import build_liouvillian, evolve, steady_state
from .model import (
    SystemParams, build_dissipators, build_hamiltonian, joint_initial_state,
    spin_block_with_phonon, spin_superposition, thermal_state,
)

log = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    name: str
    times: np.ndarray
    columns: dict[str, np.ndarray]
    summary: dict[str, float] = field(default_factory=dict)
    wigner: metrics.WignerGrid | None = None
    steady: dict[str, float] = field(default_factory=dict)


@dataclass
class SweepGrid:
    """Scalar observable on a 2-D parameter grid; ``values[i, j]`` at ``(x[i], y[j])``."""

    x_name: str
    y_name: str
    x_values: np.ndarray
    y_values: np.ndarray
    values: np.ndarray
    observable: str
    failures: int = 0


# -- initial states ----------------------------------------------------------

def initial_state(p: SystemParams, initial: dict) -> DensityMatrix:
    phonon = thermal_state(p.d, p.nbar_b)
    kind = initial.get("kind", "ground")
    if kind == "ground":
        return joint_initial_state([spin_superposition(1, 0)] * p.n_spins, phonon)
    if kind == "superposition":
        alpha = initial.get("alpha", 2 ** -0.5)
        alphas = [alpha] * p.n_spins if np.isscalar(alpha) else list(alpha)
        if len(alphas) != p.n_spins:
            raise ValueError("one alpha per emitter is required")
        spins = [spin_superposition(a, np.sqrt(max(1 - abs(a) ** 2, 0.0))) for a in alphas]
        return joint_initial_state(spins, phonon)
    if kind == "bell_diagonal":
        spec = analytic.BellDiagonalSpec(*initial["c"])
        return spin_block_with_phonon(analytic.bd_state(spec), phonon)
    raise ValueError(f"unknown initial state kind {kind!r}")


# -- observables ---------------------------------------------------------------

class _Reduced:
    """Per-sample cache of the reduced phonon and spin states."""

    def __init__(self, n_spins: int, keep_phonon: bool):
        self.n = n_spins
        self.keep_phonon = keep_phonon
        self._t = None
        self.phonon_history: list[np.ndarray] = []

    def _update(self, t, rho):
        if t != self._t:
            self._t = t
            self.phonon = partial_trace(rho, [self.n])
            self.spins = partial_trace(rho, list(range(self.n))) if self.n == 2 else None
            if self.keep_phonon:
                self.phonon_history.append(self.phonon.matrix.copy())

    def mode(self, t, rho):
        self._update(t, rho)
        return self.phonon

    def pair(self, t, rho):
        self._update(t, rho)
        if self.spins is None:
            raise ValueError("two-spin observables need n_spins = 2")
        return self.spins


def _qubit_target(d):
    psi = np.zeros(d)
    psi[:2] = 2 ** -0.5
    return psi


def _safe(fn):
    def wrapped(*a):
        try:
            return fn(*a)
        except metrics.UndefinedMetricError:
            return float("nan")
    return wrapped


def observable_columns(cfg: ScenarioConfig, p: SystemParams, cache: _Reduced) -> dict:
    """Map CSV column names to ``f(t, rho)``."""
    cols = {}
    spec = (analytic.BellDiagonalSpec(*cfg.initial["c"])
            if cfg.initial.get("kind") == "bell_diagonal" else None)

    def need_spec(name):
        if spec is None:
            raise ValueError(f"observable {name!r} needs a Bell-diagonal initial state")
        return spec

    for name in cfg.observables:
        if name.startswith("fock_fidelity:"):
            n = int(name.split(":")[1])
            cols[name] = lambda t, r, n=n: metrics.fock_fidelity(cache.mode(t, r), n)
        elif name == "qubit_fidelity":
            target = _qubit_target(p.d)
            cols[name] = lambda t, r: metrics.pure_target_fidelity(cache.mode(t, r), target)
        elif name == "g2":
            cols[name] = _safe(lambda t, r: metrics.g2_zero(cache.mode(t, r)))
        elif name == "mean_phonons":
            cols[name] = lambda t, r: float(np.dot(np.arange(p.d), metrics.fock_distribution(cache.mode(t, r))))
        elif name == "fock_distribution":
            for k in range(p.d):
                cols[f"p{k}"] = lambda t, r, k=k: float(metrics.fock_distribution(cache.mode(t, r))[k])
        elif name == "populations":
            for j in range(p.n_spins):
                cols[f"excited_{j + 1}"] = lambda t, r, j=j: float(
                    np.real(partial_trace(r, [j]).matrix[0, 0]))
        elif name == "purity":
            cols[name] = lambda t, r: metrics.purity(r)
        elif name == "concurrence":
            cols[name] = lambda t, r: metrics.concurrence(cache.pair(t, r))
        elif name == "discord":
            cols[name] = lambda t, r: metrics.discord_x(cache.pair(t, r))
        elif name in ("concurrence_analytic", "discord_analytic"):
            s = need_spec(name)
            fn = metrics.concurrence if name.startswith("conc") else metrics.discord_x
            cols[name] = lambda t, r, s=s, fn=fn: fn(analytic.bd_evolution(s, t, p.g[0], p.nbar_b))
        elif name in ("circuit_fidelity", "circuit_fidelity_local"):
            s = need_spec(name)
            mode = "local" if name.endswith("local") else "collective"
            cols[name] = lambda t, r, s=s, mode=mode: metrics.state_fidelity(
                cache.pair(t, r),
                circuit.run_protocol(s, t, p.g[0], p.nbar_b, p.gamma_s, dephasing=mode))
        elif name in ("discord_circuit", "concurrence_circuit"):
            s = need_spec(name)
            fn = metrics.discord_x if name.startswith("disc") else metrics.concurrence
            cols[name] = lambda t, r, s=s, fn=fn: fn(
                circuit.run_protocol(s, t, p.g[0], p.nbar_b, p.gamma_s))
        elif name == "wigner":
            continue
        else:
            raise ValueError(f"unknown observable {name!r}")
    return cols


# -- dynamics ------------------------------------------------------------------

def _run_dynamics(cfg: ScenarioConfig, p: SystemParams):
    want_wigner = "wigner" in cfg.observables
    cache = _Reduced(p.n_spins, keep_phonon=want_wigner)
    cols = observable_columns(cfg, p, cache)
    liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
    rho0 = initial_state(p, cfg.initial)
    traj = evolve(rho0, liou, cfg.times, observables=cols, store_states=False, method=cfg.method)
    return traj, cache, liou


def simulate(cfg: ScenarioConfig) -> ScenarioResult:
    """Run a dynamics scenario and return its columns without writing files."""
    if cfg.kind != "dynamics":
        raise ValueError(f"simulate() runs dynamics scenarios, not {cfg.kind!r}")
    traj, cache, liou = _run_dynamics(cfg, cfg.params)
    columns = dict(traj.observables)
    for v in cfg.variants:
        vp = cfg.params.replace(**{k: val for k, val in v.items() if k != "label"})
        vtraj, _, _ = _run_dynamics(cfg, vp)
        for name, values in vtraj.observables.items():
            columns[f"{name}@{v['label']}"] = values
    result = ScenarioResult(cfg.name, traj.times, columns)

    if cfg.peak_observable and np.any(np.isfinite(columns.get(cfg.peak_observable, []))):
        values = columns[cfg.peak_observable]
        mask = np.ones(values.size, bool)
        if cfg.peak_window is not None:
            mask = (traj.times >= cfg.peak_window[0]) & (traj.times <= cfg.peak_window[1])
        if not np.any(mask & np.isfinite(values)):
            log.warning("no finite %s samples inside the peak window %s", cfg.peak_observable,
                        cfg.peak_window)
            mask = np.isfinite(values)
        idx = np.flatnonzero(mask)[np.nanargmax(values[mask])]
        result.summary.update(peak_value=float(values[idx]), peak_time=float(traj.times[idx]),
                              global_max=float(np.nanmax(values)),
                              global_max_time=float(traj.times[np.nanargmax(values)]))
        if "g2" in columns:
            result.summary["g2_at_peak"] = float(columns["g2"][idx])

    if "wigner" in cfg.observables and traj.times.size:
        if cfg.wigner_time is not None:
            idx = int(np.argmin(np.abs(traj.times - cfg.wigner_time)))
        elif "peak_time" in result.summary:
            idx = int(np.argmin(np.abs(traj.times - result.summary["peak_time"])))
        else:
            idx = traj.times.size - 1
        result.wigner = metrics.wigner(cache.phonon_history[idx], extent=cfg.wigner_extent,
                                       points=cfg.wigner_points)
        result.summary.update(wigner_time=float(traj.times[idx]),
                              wigner_min=result.wigner.minimum)

    if cfg.steady:
        ss = steady_state(liou)
        result.steady = scalar_observables(ss, cfg.params, cfg.observables)
    return result


def scalar_observables(rho: DensityMatrix, p: SystemParams, names) -> dict[str, float]:
    """Time-independent scalar observables of one full state."""
    out = {}
    phonon = partial_trace(rho, [p.n_spins])
    spins = partial_trace(rho, list(range(p.n_spins))) if p.n_spins == 2 else None
    for name in names:
        if name.startswith("fock_fidelity:"):
            out[name] = metrics.fock_fidelity(phonon, int(name.split(":")[1]))
        elif name == "qubit_fidelity":
            out[name] = metrics.pure_target_fidelity(phonon, _qubit_target(p.d))
        elif name == "g2":
            try:
                out[name] = metrics.g2_zero(phonon)
            except metrics.UndefinedMetricError:
                out[name] = float("nan")
        elif name == "mean_phonons":
            out[name] = float(np.dot(np.arange(p.d), metrics.fock_distribution(phonon)))
        elif name == "purity":
            out[name] = metrics.purity(rho)
        elif name in ("concurrence", "discord"):
            if spins is None:
                raise ValueError(f"{name} needs n_spins = 2")
            fn = metrics.concurrence if name == "concurrence" else metrics.discord_x
            out[name] = fn(spins)
    return out


# -- sweeps ------------------------------------------------------------------------

def _cell(args):
    params, initial, xaxis, xv, yaxis, yv, mode, observable, t_final, method = args
    try:
        p = params.replace(**{k: xv for k in xaxis}, **{k: yv for k in yaxis})
        liou = build_liouvillian(build_hamiltonian(p), build_dissipators(p))
        if mode == "steady":
            rho = steady_state(liou)
        else:
            traj = evolve(initial_state(p, initial), liou, [0.0, t_final], method=method)
            rho = traj.states[-1]
        return float(scalar_observables(rho, p, [observable])[observable])
    except Exception as exc:  # per-cell failures become NaN sentinels
        log.warning("sweep cell %s=%g, %s=%g failed: %s", "=".join(xaxis), xv,
                    "=".join(yaxis), yv, exc)
        return float("nan")


def run_sweep(cfg: ScenarioConfig, threads: int = 1) -> SweepGrid:
    """Evaluate the sweep observable on every grid cell (cells are independent)."""
    if cfg.kind != "sweep":
        raise ValueError(f"run_sweep() needs a sweep scenario, not {cfg.kind!r}")
    x, y = cfg.x_axis, cfg.y_axis
    jobs = [(cfg.params, cfg.initial, x.params, float(xv), y.params, float(yv),
             cfg.sweep_mode, cfg.sweep_observable, cfg.sweep_time, cfg.method)
            for xv in x.values for yv in y.values]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        flat = [_cell(j) for j in jobs]
    values = np.array(flat).reshape(x.values.size, y.values.size)
    failures = int(np.isnan(values).sum())
    return SweepGrid(x.name, y.name, x.values, y.values, values, cfg.sweep_observable, failures)


# -- output ----------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_timeseries(path: Path, result: ScenarioResult) -> None:
    names = list(result.columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + names)
        for k, t in enumerate(result.times):
            w.writerow([_fmt(t)] + [_fmt(result.columns[n][k]) for n in names])


def write_wigner(path: Path, grid: metrics.WignerGrid) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im", "W"])
        for i, im in enumerate(grid.im_axis):
            for j, re in enumerate(grid.re_axis):
                w.writerow([_fmt(re), _fmt(im), _fmt(grid.values[i, j])])


def write_sweep(path: Path, grid: SweepGrid) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([grid.x_name, grid.y_name, "value"])
        for i, xv in enumerate(grid.x_values):
            for j, yv in enumerate(grid.y_values):
                w.writerow([_fmt(xv), _fmt(yv), _fmt(grid.values[i, j])])


def write_pairs(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def run_coupling(cfg: ScenarioConfig, out_path: Path) -> list:
    c = cfg.coupling
    rows = coupling.extract_couplings(coupling.read_forces(c["forces"]),
                                      coupling.read_modes(c["modes"]),
                                      float(c.get("lattice", 2.5)), c.get("select_label"))
    write_pairs(out_path, ["mode", "frequency_meV", "g_meVA", "abs_g_meVA", "g_meV"], rows)
    return rows


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> tuple[list[Path], dict]:
    """Execute any scenario kind and write its CSV files into ``out_dir``.

    Returns the written paths and a summary dictionary.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    summary: dict = {}
    if cfg.kind == "dynamics":
        result = simulate(cfg)
        path = out / f"{cfg.name}.csv"
        write_timeseries(path, result)
        paths.append(path)
        if result.wigner is not None:
            path = out / f"{cfg.name}_wigner.csv"
            write_wigner(path, result.wigner)
            paths.append(path)
        if result.steady:
            path = out / f"{cfg.name}_steady.csv"
            write_pairs(path, ["observable", "value"], [(k, float(v)) for k, v in result.steady.items()])
            paths.append(path)
            summary.update({f"steady_{k}": v for k, v in result.steady.items()})
        summary.update(result.summary)
        for name, values in result.columns.items():
            if values.size and not re.match(r"p\d+(@|$)", name):
                summary.setdefault(f"max_{name}", float(np.nanmax(values)) if np.any(np.isfinite(values)) else float("nan"))
    elif cfg.kind == "sweep":
        grid = run_sweep(cfg, threads)
        path = out / f"{cfg.name}.csv"
        write_sweep(path, grid)
        paths.append(path)
        summary.update(failures=grid.failures,
                       max=float(np.nanmax(grid.values)) if grid.failures < grid.values.size else float("nan"))
    else:
        path = out / f"{cfg.name}.csv"
        rows = run_coupling(cfg, path)
        paths.append(path)
        summary["modes"] = len(rows)
    return paths, summary
