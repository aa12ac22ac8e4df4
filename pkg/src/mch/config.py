"""
Run configuration files.

Grammar: INI sections of ``key = value`` lines (``#`` and ``;`` start
comments).  Every key is typed; unknown sections or keys are errors.

======== ======================================================================
section  keys
======== ======================================================================
grid     dim (int), n (int), period (float; ``pi`` multiples such as ``2pi``)
u        kind, amplitude, width, center, separation, mode, mode_y, beta, seed,
         weights (comma-separated floats)
gamma    same keys as ``u``; omitted section means ``gamma = 0``
solver   dt, t_end, scheme (rk4 | picard), picard_depth, picard_tol, cfl_guard,
         sobolev_index
output   directory, stride (int), steepening_threshold (float or ``inf``)
run      seed (int)
scan     amplitudes (comma-separated floats, may be empty)
======== ======================================================================
"""

from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dynamics import State
from .initial_data import KINDS, InitialDataSpec, initial_state
from .solvers import SolverConfig
from .spectral import Grid

__all__ = ["ConfigError", "GridConfig", "OutputConfig", "RunConfig", "parse", "load", "dumps"]


class ConfigError(ValueError):
    pass


_PI = re.compile(r"^\s*([-+0-9.eE]*)\s*\*?\s*pi\s*$")


def _float(text: str) -> float:
    m = _PI.match(text)
    if m:
        coef = m.group(1)
        return (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * math.pi
    return float(text)


def _floats(text: str) -> tuple:
    return tuple(_float(t) for t in text.split(",") if t.strip())


def _int(text: str) -> int:
    return int(text)


def _str(text: str) -> str:
    return text.strip()


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    n: int = 256
    period: float = 1.0

    def build(self) -> Grid:
        return Grid(self.dim, self.n, self.period)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    stride: int = 100
    steepening_threshold: float = math.inf


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    u: InitialDataSpec = field(default_factory=InitialDataSpec)
    gamma: InitialDataSpec | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    amplitudes: tuple = ()

    def data_spec(self, spec: InitialDataSpec, amplitude: float | None = None) -> InitialDataSpec:
        """``spec`` with its seed mixed with the run seed (and amplitude overridden)."""
        mixed = int(np.random.SeedSequence([self.seed, spec.seed]).generate_state(1)[0])
        out = replace(spec, seed=mixed)
        return out if amplitude is None else replace(out, amplitude=amplitude)

    def initial_state(self, amplitude: float | None = None) -> State:
        grid = self.grid.build()
        gamma = None if self.gamma is None else self.data_spec(self.gamma)
        return initial_state(grid, self.data_spec(self.u, amplitude), gamma)

    def __call__(self, amplitude: float) -> State:
        # picklable initial-state factory for amplitude scans
        return self.initial_state(amplitude)


_DATA_TYPES = {
    "kind": _str, "amplitude": _float, "width": _float, "center": _float, "separation": _float,
    "mode": _int, "mode_y": _int, "beta": _float, "seed": _int, "weights": _floats,
}
_SCHEMA = {
    "grid": {"dim": _int, "n": _int, "period": _float},
    "u": _DATA_TYPES,
    "gamma": _DATA_TYPES,
    "solver": {"dt": _float, "t_end": _float, "scheme": _str, "picard_depth": _int, "picard_tol": _float,
               "cfl_guard": _float, "sobolev_index": _float},
    "output": {"directory": _str, "stride": _int, "steepening_threshold": _float},
    "run": {"seed": _int},
    "scan": {"amplitudes": _floats},
}


def _section(cp: configparser.ConfigParser, name: str) -> dict:
    out = {}
    if not cp.has_section(name):
        return out
    schema = _SCHEMA[name]
    for key, raw in cp.items(name):
        conv = schema.get(key)
        if conv is None:
            raise ConfigError(f"[{name}] {key}: unknown key (expected one of {', '.join(schema)})")
        try:
            out[key] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key}: cannot parse {raw!r} ({exc})") from None
    return out


def _build(name: str, cls, values: dict):
    try:
        return cls(**values)
    except (ValueError, TypeError) as exc:
        key = next((k for k in values if k in str(exc)), None)
        where = f"[{name}] {key}" if key else f"[{name}]"
        raise ConfigError(f"{where}: {exc}") from None


def parse(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for name in cp.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"[{name}]: unknown section (expected one of {', '.join(_SCHEMA)})")

    u = _section(cp, "u")
    if "kind" in u and u["kind"] not in KINDS:
        raise ConfigError(f"[u] kind: unknown initial-data kind {u['kind']!r}")
    gamma = _section(cp, "gamma") if cp.has_section("gamma") else None
    if gamma is not None and "kind" in gamma and gamma["kind"] not in KINDS:
        raise ConfigError(f"[gamma] kind: unknown initial-data kind {gamma['kind']!r}")

    grid = _build("grid", GridConfig, _section(cp, "grid"))
    try:
        grid.build()
    except ValueError as exc:
        raise ConfigError(f"[grid] {'n' if 'n ' in str(exc) else 'dim'}: {exc}") from None
    output = _build("output", OutputConfig, _section(cp, "output"))
    if output.stride < 1:
        raise ConfigError(f"[output] stride: must be >= 1, got {output.stride}")
    if not output.steepening_threshold > 1.0:
        raise ConfigError(f"[output] steepening_threshold: must exceed 1, got {output.steepening_threshold}")

    return RunConfig(
        grid=grid,
        u=_build("u", InitialDataSpec, u),
        gamma=None if gamma is None else _build("gamma", InitialDataSpec, gamma),
        solver=_build("solver", SolverConfig, _section(cp, "solver")),
        output=output,
        seed=_section(cp, "run").get("seed", 0),
        amplitudes=_section(cp, "scan").get("amplitudes", ()),
    )


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse(text)


def dumps(cfg: RunConfig) -> str:
    """Serialize every key explicitly; ``parse(dumps(c)) == c``."""
    cp = configparser.ConfigParser(interpolation=None)
    parts = [("grid", cfg.grid), ("u", cfg.u), ("gamma", cfg.gamma), ("solver", cfg.solver), ("output", cfg.output)]
    for name, obj in parts:
        if obj is None:
            continue
        cp[name] = {f.name: _fmt(getattr(obj, f.name)) for f in fields(obj)}
    cp["run"] = {"seed": str(cfg.seed)}
    cp["scan"] = {"amplitudes": _fmt(tuple(cfg.amplitudes))}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
