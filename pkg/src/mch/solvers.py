"""
Time advancement and a priori bound evaluators.

* :func:`step_rk4` / :func:`integrate` -- classical RK4 method of lines on the
  nonlocal form.
* :func:`transport_substep` -- one RK4 step of ``f_t + v.grad f = rhs`` with
  ``v`` and ``rhs`` frozen.
* :func:`picard_solve` -- the iteration ``(d_t + u^n.grad) u^{n+1} = F(u^n)``
  started from ``u^0 = gamma^0 = 0`` with low-pass initial data.
* :func:`gronwall_bound`, :func:`osgood_bound`,
  :func:`estimate_existence_time` -- closed-form bound evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import trapezoid

from . import besov as bv
from . import spectral as sp
from .dynamics import State, compute_F1, compute_F2, nonlocal_rhs

__all__ = [
    "SolverError",
    "BlowupSuspected",
    "CFLViolation",
    "IterationDiverged",
    "SolverConfig",
    "PicardTrace",
    "ExistenceTimeEstimate",
    "cfl_number",
    "step_rk4",
    "integrate",
    "step_count",
    "transport_substep",
    "picard_solve",
    "state_norm",
    "gronwall_bound",
    "osgood_bound",
    "estimate_existence_time",
]


class SolverError(RuntimeError):
    pass


class BlowupSuspected(SolverError):
    """Non-finite values appeared; ``state`` is the last finite state."""

    def __init__(self, message: str, state: State):
        super().__init__(message)
        self.state = state


class CFLViolation(SolverError):
    pass


class IterationDiverged(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "rk4"
    picard_depth: int = 30
    picard_tol: float = 1e-10
    cfl_guard: float = 0.5
    sobolev_index: float = 2.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.scheme not in ("rk4", "picard"):
            raise ValueError(f"scheme must be 'rk4' or 'picard', got {self.scheme!r}")
        if self.picard_depth < 1:
            raise ValueError(f"picard_depth must be >= 1, got {self.picard_depth}")


def cfl_number(s: State, dt: float) -> float:
    return float(sp.pointwise_magnitude(s.grid, s.u).max()) * dt / s.grid.spacing


def _check_cfl(s: State, dt: float, guard: float) -> None:
    c = cfl_number(s, dt)
    if c > guard:
        raise CFLViolation(f"CFL number {c:.3g} exceeds guard {guard} at t={s.time:.6g}")


def step_rk4(s: State, dt: float, cfl_guard: float = 0.5) -> State:
    """One classical RK4 step of the nonlocal system."""
    _check_cfl(s, dt, cfl_guard)
    u, g = s.u, s.gamma

    def rhs(uu, gg):
        du, dg = nonlocal_rhs(s.with_fields(uu, gg))
        if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dg))):
            raise BlowupSuspected(f"non-finite stage at t={s.time:.6g}", s)
        return du, dg

    k1u, k1g = rhs(u, g)
    k2u, k2g = rhs(u + 0.5 * dt * k1u, g + 0.5 * dt * k1g)
    k3u, k3g = rhs(u + 0.5 * dt * k2u, g + 0.5 * dt * k2g)
    k4u, k4g = rhs(u + dt * k3u, g + dt * k3g)
    un = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    gn = g + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    out = s.with_fields(un, gn, s.time + dt)
    if not out.is_finite():
        raise BlowupSuspected(f"non-finite state after t={s.time:.6g}", s)
    return out


def step_count(dt: float, t_end: float) -> int:
    steps = round(t_end / dt)
    if abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of steps of dt={dt}")
    return int(steps)


def integrate(s0: State, dt: float, t_end: float, cfl_guard: float = 0.5) -> Iterator[State]:
    """Yield the initial state and every RK4 step up to ``t_end``.

    Times are ``t0 + k * dt`` exactly, not accumulated sums.
    """
    steps = step_count(dt, t_end)
    s = s0
    yield s
    for k in range(1, steps + 1):
        s = step_rk4(s, dt, cfl_guard)
        s = s.with_fields(s.u, s.gamma, s0.time + k * dt)
        yield s


def transport_substep(grid, f: np.ndarray, v: np.ndarray, rhs: np.ndarray, dt: float) -> np.ndarray:
    """Advance ``f_t + v.grad f = rhs`` by one RK4 step with ``v`` and ``rhs`` frozen.

    ``f`` and ``rhs`` are both scalar fields or both vector fields.
    """
    if f.shape != rhs.shape:
        raise ValueError(f"f and rhs shapes differ: {f.shape} vs {rhs.shape}")

    def L(x):
        adv = _advect(grid, v, sp.gradient(grid, x), x.ndim - grid.dim)
        out = -sp.dealias(grid, adv) + rhs
        if not np.all(np.isfinite(out)):
            raise BlowupSuspected("non-finite transport stage", None)
        return out

    k1 = L(f)
    k2 = L(f + 0.5 * dt * k1)
    k3 = L(f + 0.5 * dt * k2)
    k4 = L(f + dt * k3)
    return f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advect(grid, v, grad, lead):
    # grad has shape lead + (dim,) + grid.shape; contract the derivative axis with v
    if lead == 0:
        return np.einsum("j...,j...->...", v, grad)
    return np.einsum("j...,ij...->i...", v, grad)


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


def state_norm(grid, u, gamma, s: float) -> float:
    """``||u||_{H^s} + ||gamma||_{H^s}`` (spectral weights)."""
    return sp.sobolev_norm(grid, u, s) + sp.sobolev_norm(grid, gamma, s)


@dataclass
class PicardTrace:
    """Per-iterate records of a Picard run.

    ``norms[n]`` holds ``||u^n(t)||_{H^s} + ||gamma^n(t)||_{H^s}`` at every time
    sample for iterate ``n`` (``norms[0]`` is the zero iterate).
    ``differences[n]`` is ``sup_t`` of the ``H^{s-1}`` distance between
    iterates ``n + 1`` and ``n``.
    """

    times: np.ndarray
    sobolev_index: float
    norms: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.differences)


def picard_solve(s0: State, cfg: SolverConfig) -> tuple[list[State], PicardTrace]:
    """Iterate the linear transport systems on ``[0, t_end]``.

    Iterate ``n + 1`` is advanced with the coefficients of iterate ``n``
    frozen at each step midpoint (average of the stored end values), which
    makes the fixed point a second-order discretisation in time.
    Stops after ``picard_depth`` iterates or once the successive difference
    drops below ``picard_tol``.  Raises :class:`IterationDiverged` when the
    difference grows three times in a row after the low-pass initial data
    has saturated.
    """
    grid = s0.grid
    dt = cfg.dt
    steps = step_count(dt, cfg.t_end)
    s_idx = cfg.sobolev_index
    times = s0.time + dt * np.arange(steps + 1)
    trace = PicardTrace(times=times, sobolev_index=s_idx)

    prev_u = np.zeros((steps + 1,) + s0.u.shape)
    prev_g = np.zeros((steps + 1,) + s0.gamma.shape)
    trace.norms.append(np.zeros(steps + 1))
    saturate = bv.q_max(grid)
    growth = 0

    for n in range(cfg.picard_depth):
        new_u = np.empty_like(prev_u)
        new_g = np.empty_like(prev_g)
        new_u[0] = bv.low_pass(grid, s0.u, n)
        new_g[0] = bv.low_pass(grid, s0.gamma, n)
        for k in range(steps):
            vu = 0.5 * (prev_u[k] + prev_u[k + 1])
            vg = 0.5 * (prev_g[k] + prev_g[k + 1])
            mid = State(grid, vu, vg, times[k] + 0.5 * dt)
            f1, f2 = compute_F1(mid), compute_F2(mid)
            try:
                new_u[k + 1] = transport_substep(grid, new_u[k], vu, f1, dt)
                new_g[k + 1] = transport_substep(grid, new_g[k], vu, f2, dt)
            except BlowupSuspected as exc:
                last = State(grid, new_u[k], new_g[k], times[k])
                raise BlowupSuspected(f"Picard iterate {n + 1} lost finiteness at t={times[k]:.6g}", last) from exc

        trace.norms.append(np.array([state_norm(grid, a, b, s_idx) for a, b in zip(new_u, new_g)]))
        diff = max(state_norm(grid, a, b, s_idx - 1.0)
                   for a, b in zip(new_u - prev_u, new_g - prev_g))
        trace.differences.append(diff)
        prev_u, prev_g = new_u, new_g

        if diff < cfg.picard_tol:
            trace.converged = True
            break
        if n > saturate and len(trace.differences) >= 2 and diff > trace.differences[-2]:
            growth += 1
            if growth >= 3:
                raise IterationDiverged(
                    f"successive differences grew for 3 iterates (last {diff:.3e}); try a smaller t_end")
        else:
            growth = 0

    traj = [State(grid, a, b, t) for a, b, t in zip(prev_u, prev_g, times)]
    return traj, trace


# ---------------------------------------------------------------------------
# Bound evaluators
# ---------------------------------------------------------------------------


def gronwall_bound(alpha: float, lam, dt: float) -> float:
    """``alpha * exp(int lambda)`` with the integral by the trapezoid rule."""
    lam = np.asarray(lam, dtype=float)
    integral = trapezoid(lam, dx=dt) if lam.size > 1 else 0.0
    return float(alpha * math.exp(integral))


def _invert_modulus(alpha: float, integral: float, modulus: str) -> float:
    if modulus == "linear":
        if not alpha > 0:
            raise ValueError(f"linear modulus needs alpha > 0, got {alpha}")
        return alpha * math.exp(integral)
    if modulus == "r(1-ln r)":
        # W(x) = -ln(1 - ln x) on (0, 1]
        if not 0 < alpha <= 1:
            raise ValueError(f"modulus r(1 - ln r) needs 0 < alpha <= 1, got {alpha}")
        return math.e * (alpha / math.e) ** math.exp(-integral)
    if modulus == "r ln r":
        # W(x) = ln ln x on [e, inf)
        if not alpha >= math.e:
            raise ValueError(f"modulus r ln r needs alpha >= e, got {alpha}")
        return alpha ** math.exp(integral)
    raise ValueError(f"unknown modulus {modulus!r}; expected 'linear', 'r(1-ln r)' or 'r ln r'")


def osgood_bound(alpha: float, lam, modulus: str, dt: float) -> float:
    """Bound on ``f`` from ``f <= alpha + int lambda mu(f)`` via ``W(f) <= W(alpha) + int lambda``.

    ``modulus`` is ``"linear"`` (``mu = r``), ``"r(1-ln r)"`` or ``"r ln r"``.
    """
    lam = np.asarray(lam, dtype=float)
    integral = float(trapezoid(lam, dx=dt)) if lam.size > 1 else 0.0
    return _invert_modulus(alpha, integral, modulus)


@dataclass(frozen=True)
class ExistenceTimeEstimate:
    c_cal: float
    initial_norm: float
    t_est: float


def estimate_existence_time(s0: State, c_cal: float, sobolev_index: float = 2.5) -> ExistenceTimeEstimate:
    """``T = 1 / (4 C^2 (||u0|| + ||gamma0||))``; infinite for zero data. Advisory only."""
    if not c_cal > 0:
        raise ValueError(f"calibrated constant must be positive, got {c_cal}")
    norm = state_norm(s0.grid, s0.u, s0.gamma, sobolev_index)
    t = math.inf if norm == 0.0 else 1.0 / (4.0 * c_cal**2 * norm)
    return ExistenceTimeEstimate(c_cal, norm, t)
