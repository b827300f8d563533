"""Scenario configuration files (TOML) and the built-in registry."""
from __future__ import annotations

import difflib
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .model import SystemParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


KINDS = ("dynamics", "sweep", "coupling")
SWEEPABLE = ("delta", "g", "omega_drive", "gamma_b", "gamma_s", "gamma_phi", "nbar_b", "nbar_s")
SCALAR_OBSERVABLES = (
    "qubit_fidelity", "g2", "concurrence", "discord", "purity", "mean_phonons",
    "concurrence_analytic", "discord_analytic", "circuit_fidelity", "circuit_fidelity_local",
    "discord_circuit", "concurrence_circuit",
)
EXPANDING_OBSERVABLES = ("fock_distribution", "populations")

_TOP_KEYS = {"name", "kind", "description", "params", "initial", "time", "output",
             "reference", "variants", "sweep", "steady", "coupling", "approximate_axes"}
_PARAM_KEYS = {"n_spins", "d", "delta", "g", "omega_drive", "gamma_b", "gamma_s",
               "gamma_phi", "nbar_b", "nbar_s"}
_INITIAL_KEYS = {"kind", "alpha", "c"}
_TIME_KEYS = {"stop", "samples_per_unit", "points", "spacing", "log_start", "method", "step"}
_OUTPUT_KEYS = {"observables", "peak_observable", "peak_window", "wigner_extent",
                "wigner_points", "wigner_time"}
_SWEEP_KEYS = {"mode", "observable", "x", "y", "time"}
_AXIS_KEYS = {"param", "min", "max", "points", "spacing"}
_COUPLING_KEYS = {"forces", "modes", "lattice", "select_label"}


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{where}]")


@dataclass(frozen=True)
class Axis:
    params: tuple[str, ...]
    values: np.ndarray

    @property
    def name(self) -> str:
        return "=".join(self.params)


@dataclass
class ScenarioConfig:
    name: str
    kind: str
    params: SystemParams
    description: str = ""
    initial: dict[str, Any] = field(default_factory=lambda: {"kind": "ground"})
    times: np.ndarray | None = None
    method: str = "DOP853"
    observables: tuple[str, ...] = ()
    peak_observable: str | None = None
    peak_window: tuple[float, float] | None = None
    wigner_extent: float = 4.0
    wigner_points: int = 81
    wigner_time: float | None = None
    variants: tuple[dict, ...] = ()
    steady: bool = False
    sweep_mode: str = "steady"
    sweep_observable: str = "concurrence"
    sweep_time: float | None = None
    x_axis: Axis | None = None
    y_axis: Axis | None = None
    coupling: dict[str, Any] = field(default_factory=dict)
    reference: dict[str, Any] = field(default_factory=dict)
    source: Path | None = None


def _time_grid(t: dict, samples: int | None) -> np.ndarray:
    _check_keys(t, _TIME_KEYS, "time")
    stop = float(t.get("stop", 0.0))
    spacing = t.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"time spacing must be 'linear' or 'log', got {spacing!r}")
    if samples is not None:
        points = int(samples)
    elif "points" in t:
        points = int(t["points"])
    else:
        points = int(round(stop * float(t.get("samples_per_unit", 20)))) + 1
    if points < 0:
        raise ConfigError("number of time points must be >= 0")
    if points == 0:
        return np.empty(0)
    if points == 1 or stop == 0:
        return np.zeros(1)
    if spacing == "linear":
        return np.linspace(0.0, stop, points)
    # log spacing on a lattice of integer multiples of the base step, as
    # needed by propagator stepping; always includes t = 0
    step = float(t.get("step", stop / 2**17))
    start = float(t.get("log_start", step))
    raw = np.geomspace(start, stop, points - 1)
    n = np.unique(np.maximum(np.rint(raw / step), 1).astype(np.int64))
    return np.concatenate([[0.0], n * step])


def _axis(spec: dict, where: str, points: int | None) -> Axis:
    _check_keys(spec, _AXIS_KEYS, where)
    params = spec.get("param")
    params = (params,) if isinstance(params, str) else tuple(params or ())
    if not params:
        raise ConfigError(f"[{where}] needs 'param'")
    for p in params:
        if p not in SWEEPABLE:
            raise ConfigError(f"[{where}] cannot sweep {p!r}; choose from {SWEEPABLE}")
    try:
        lo, hi = float(spec["min"]), float(spec["max"])
    except KeyError as exc:
        raise ConfigError(f"[{where}] missing {exc.args[0]!r}") from None
    n = int(points if points is not None else spec.get("points", 41))
    if n < 1:
        raise ConfigError(f"[{where}] needs at least one point")
    spacing = spec.get("spacing", "linear")
    if spacing == "linear":
        values = np.linspace(lo, hi, n)
    elif spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"[{where}] log axis needs positive bounds")
        values = np.geomspace(lo, hi, n)
    else:
        raise ConfigError(f"[{where}] spacing must be 'linear' or 'log'")
    return Axis(params, values)


def _check_observable(name: str) -> None:
    if name.startswith("fock_fidelity:"):
        try:
            int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad Fock index in observable {name!r}") from None
        return
    if name in SCALAR_OBSERVABLES or name in EXPANDING_OBSERVABLES or name == "wigner":
        return
    raise ConfigError(f"unknown observable {name!r}")


def parse_config(data: dict, *, samples: int | None = None, truncation: int | None = None,
                 source: Path | None = None) -> ScenarioConfig:
    """Validate a decoded TOML document and build a :class:`ScenarioConfig`."""
    _check_keys(data, _TOP_KEYS, "top level")
    name = data.get("name") or (source.stem if source else "scenario")
    kind = data.get("kind", "dynamics")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    pdata = dict(data.get("params", {}))
    _check_keys(pdata, _PARAM_KEYS, "params")
    if truncation is not None:
        pdata["d"] = truncation
    try:
        params = SystemParams(**pdata)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [params]: {exc}") from None

    initial = dict(data.get("initial", {"kind": "ground"}))
    _check_keys(initial, _INITIAL_KEYS, "initial")
    ikind = initial.get("kind", "ground")
    if ikind not in ("ground", "superposition", "bell_diagonal"):
        raise ConfigError(f"unknown initial state kind {ikind!r}")
    if ikind == "bell_diagonal" and params.n_spins != 2:
        raise ConfigError("a Bell-diagonal initial state needs n_spins = 2")
    if ikind == "bell_diagonal" and len(initial.get("c", ())) != 3:
        raise ConfigError("[initial] bell_diagonal needs c = [c1, c2, c3]")

    cfg = ScenarioConfig(name=name, kind=kind, params=params,
                         description=data.get("description", ""), initial=initial,
                         reference=dict(data.get("reference", {})), source=source)

    out = dict(data.get("output", {}))
    _check_keys(out, _OUTPUT_KEYS, "output")
    cfg.observables = tuple(out.get("observables", ()))
    for obs in cfg.observables:
        _check_observable(obs)
    cfg.peak_observable = out.get("peak_observable")
    if "peak_window" in out:
        lo, hi = out["peak_window"]
        cfg.peak_window = (float(lo), float(hi))
    cfg.wigner_extent = float(out.get("wigner_extent", 4.0))
    cfg.wigner_points = int(out.get("wigner_points", 81))
    cfg.wigner_time = out.get("wigner_time")

    if kind == "dynamics":
        t = dict(data.get("time", {}))
        cfg.method = t.get("method", "DOP853")
        cfg.times = _time_grid(t, samples)
        cfg.steady = bool(data.get("steady", False))
        variants = []
        for k, v in enumerate(data.get("variants", [])):
            v = dict(v)
            if "label" not in v:
                raise ConfigError(f"variant {k} needs a label")
            _check_keys(v, _PARAM_KEYS | {"label"}, f"variants.{k}")
            try:
                SystemParams(**{**pdata, **{a: b for a, b in v.items() if a != "label"}})
            except ValueError as exc:
                raise ConfigError(f"invalid variant {v['label']}: {exc}") from None
            variants.append(v)
        cfg.variants = tuple(variants)
    elif kind == "sweep":
        s = dict(data.get("sweep", {}))
        _check_keys(s, _SWEEP_KEYS, "sweep")
        cfg.sweep_mode = s.get("mode", "steady")
        if cfg.sweep_mode not in ("steady", "final-time"):
            raise ConfigError("sweep mode must be 'steady' or 'final-time'")
        cfg.sweep_observable = s.get("observable", "concurrence")
        _check_observable(cfg.sweep_observable)
        if cfg.sweep_observable in EXPANDING_OBSERVABLES or cfg.sweep_observable == "wigner":
            raise ConfigError("sweep observable must be scalar-valued")
        if "x" not in s or "y" not in s:
            raise ConfigError("[sweep] needs x and y axes")
        cfg.x_axis = _axis(dict(s["x"]), "sweep.x", samples)
        cfg.y_axis = _axis(dict(s["y"]), "sweep.y", samples)
        if cfg.sweep_mode == "final-time":
            if "time" not in s:
                raise ConfigError("final-time sweeps need [sweep] time")
            cfg.sweep_time = float(s["time"])
    else:
        c = dict(data.get("coupling", {}))
        _check_keys(c, _COUPLING_KEYS, "coupling")
        base = source.parent if source else Path.cwd()
        for key in ("forces", "modes"):
            if key not in c:
                raise ConfigError(f"[coupling] needs {key!r}")
            c[key] = (base / c[key]).resolve()
        cfg.coupling = c
    return cfg


def load_config(path, **kw) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, source=path, **kw)


# -- registry -------------------------------------------------------------------

def _scenario_dir():
    return resources.files("phonoline") / "scenarios"


def scenario_names() -> list[str]:
    names = [p.name[:-5] for p in _scenario_dir().iterdir() if p.name.endswith(".toml")]
    return sorted(names, key=_natural_key)


def _natural_key(name: str):
    # figure reproductions first, in figure order, then the utilities
    parts = [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name)]
    return (not name.startswith("fig"), parts)


def scenario_path(name: str) -> Path:
    path = _scenario_dir() / f"{name}.toml"
    if not path.is_file():
        near = difflib.get_close_matches(name, scenario_names(), n=1)
        hint = f"; did you mean {near[0]!r}?" if near else ""
        raise ConfigError(f"unknown scenario {name!r}{hint}")
    return Path(str(path))


def load_scenario(name_or_path, **kw) -> ScenarioConfig:
    """Built-in scenario by name, or a config file by path."""
    p = Path(str(name_or_path))
    if p.suffix == ".toml" or p.exists():
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        return load_config(p, **kw)
    return load_config(scenario_path(str(name_or_path)), **kw)
