"""Initial-data catalog.

Every profile is dealiased before it is returned, so produced fields lie
inside the two-thirds band.  Centers are given as fractions of the period.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import spectral as sp
from .besov import random_field
from .dynamics import State
from .spectral import Grid

KINDS = ("zero", "gaussian_bump", "fourier_mode", "smoothed_peakon", "peakon_antipeakon", "random_bandlimited")


@dataclass(frozen=True)
class InitialDataSpec:
    """One scalar profile; vector fields scale it per component by ``weights``."""

    kind: str = "zero"
    amplitude: float = 1.0
    width: float = 0.1
    center: float = 0.5
    separation: float = 0.25
    mode: int = 1
    mode_y: int = 0
    beta: float = 2.0
    seed: int = 0
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial-data kind {self.kind!r}; expected one of {', '.join(KINDS)}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def _periodic_offset(x: np.ndarray, c: float, period: float) -> np.ndarray:
    """Signed minimum-image distance ``x - c`` in ``[-L/2, L/2)``."""
    return (x - c + 0.5 * period) % period - 0.5 * period


def _gaussian_smooth(grid: Grid, f: np.ndarray, width: float) -> np.ndarray:
    kernel = np.exp(-0.5 * grid.cache.xi_sq * width**2)
    return sp.inverse(grid, kernel * sp.forward(grid, f))


def periodic_peakon(grid: Grid, center: float) -> np.ndarray:
    """``cosh(|x - c| - L/2) / cosh(L/2)`` per axis product: the periodic Green's profile of ``1 - d_x^2``, peak 1."""
    L = grid.period
    out = np.ones(grid.shape)
    for x in grid.coords:
        r = np.abs(_periodic_offset(x, center * L, L))
        out = out * np.cosh(r - 0.5 * L) / np.cosh(0.5 * L)
    return out


def profile(grid: Grid, spec: InitialDataSpec) -> np.ndarray:
    L = grid.period
    a = spec.amplitude
    if spec.kind == "zero" or a == 0.0:
        return grid.zeros()
    if spec.kind == "gaussian_bump":
        r2 = sum(_periodic_offset(x, spec.center * L, L) ** 2 for x in grid.coords)
        f = a * np.exp(-0.5 * r2 / spec.width**2)
    elif spec.kind == "fourier_mode":
        phase = 2.0 * np.pi * spec.mode * grid.coords[0] / L
        if grid.dim == 2:
            phase = phase + 2.0 * np.pi * spec.mode_y * grid.coords[1] / L
        f = a * np.cos(phase)
    elif spec.kind == "smoothed_peakon":
        f = a * _gaussian_smooth(grid, periodic_peakon(grid, spec.center), spec.width)
    elif spec.kind == "peakon_antipeakon":
        left = periodic_peakon(grid, spec.center - 0.5 * spec.separation)
        right = periodic_peakon(grid, spec.center + 0.5 * spec.separation)
        f = a * _gaussian_smooth(grid, left - right, spec.width)
    else:  # random_bandlimited
        rng = np.random.default_rng(spec.seed)
        f = a * random_field(grid, rng, beta=spec.beta)
    return sp.dealias(grid, f)


def vector_profile(grid: Grid, spec: InitialDataSpec) -> np.ndarray:
    """Vector field ``weights[i] * profile``; weights default to all ones.

    ``random_bandlimited`` draws an independent field per component.
    """
    w = tuple(spec.weights) or (1.0,) * grid.dim
    if len(w) != grid.dim:
        raise ValueError(f"weights must have {grid.dim} entries, got {len(w)}")
    comps = []
    for i, wi in enumerate(w):
        sub = spec
        if spec.kind == "random_bandlimited":
            sub = InitialDataSpec(**{**spec.__dict__, "seed": spec.seed + 7919 * i})
        comps.append(wi * profile(grid, sub))
    return np.stack(comps)


def initial_state(grid: Grid, u_spec: InitialDataSpec, gamma_spec: InitialDataSpec | None = None) -> State:
    gamma = profile(grid, gamma_spec) if gamma_spec is not None else grid.zeros()
    return State(grid, vector_profile(grid, u_spec), gamma, 0.0)
