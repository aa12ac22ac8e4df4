"""
Right-hand sides of the modified multi-component Camassa-Holm system.

Two equivalent forms are provided:

* nonlocal (transport) form for ``(u, gamma)``::

      u_t + u.grad u         = F1(u, gamma)
      gamma_t + u.grad gamma = F2(u, gamma)

* momentum form for ``m = (I - Delta) u`` and ``rho = (I - Delta) gamma``::

      m_t + u.grad m + grad u^T . m + m div u + rho grad gamma = 0
      rho_t + div(rho u) = 0

``gamma`` is the averaged density with the reference level set to 0, so
``grad rhobar = grad gamma``.  Matrix conventions: ``J[i, j] = d_j u_i``,
``(div A)_i = sum_j d_j A_ij``, ``|A|^2 = A:A``.  Every pointwise product is
passed through the two-thirds mask before any further operator is applied.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import spectral as sp
from .spectral import Grid

__all__ = [
    "State",
    "MomentumState",
    "InconsistentMomentum",
    "compute_F1",
    "compute_F2",
    "nonlocal_rhs",
    "momentum_rhs",
    "appendix_consistency",
    "identity_residuals",
    "energy",
    "energy_spectral",
]


@dataclass(frozen=True)
class State:
    """Velocity ``u`` (shape ``(dim,) + grid.shape``) and ``gamma`` at ``time``."""

    grid: Grid
    u: np.ndarray
    gamma: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        g = self.grid
        u = np.asarray(self.u, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if g.dim == 1 and u.shape == g.shape:
            u = u[None]
        if u.shape != (g.dim,) + g.shape:
            raise ValueError(f"u must have shape {(g.dim,) + g.shape}, got {u.shape}")
        if gamma.shape != g.shape:
            raise ValueError(f"gamma must have shape {g.shape}, got {gamma.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "State":
        return cls(grid, grid.zeros(grid.dim), grid.zeros(), time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.gamma)))

    def with_fields(self, u, gamma, time=None) -> "State":
        return replace(self, u=u, gamma=gamma, time=self.time if time is None else time)

    def components(self) -> np.ndarray:
        """Stack ``(u_1, .., u_d, gamma)`` as used by snapshots."""
        return np.concatenate([self.u, self.gamma[None]])

    @classmethod
    def from_components(cls, grid: Grid, comps: np.ndarray, time: float = 0.0) -> "State":
        if comps.shape[0] != grid.dim + 1:
            raise ValueError(f"a state needs {grid.dim + 1} components, got {comps.shape[0]}")
        return cls(grid, comps[: grid.dim], comps[grid.dim], time)


class InconsistentMomentum(ValueError):
    pass


@dataclass(frozen=True)
class MomentumState:
    m: np.ndarray
    rho: np.ndarray

    @classmethod
    def from_state(cls, s: State) -> "MomentumState":
        return cls(sp.helmholtz(s.grid, s.u), sp.helmholtz(s.grid, s.gamma))


# ---------------------------------------------------------------------------
# Small tensor helpers.  All act on the leading component axes.
# ---------------------------------------------------------------------------


def _matmul(a, b):
    return np.einsum("ij...,jk...->ik...", a, b)


def _transpose(a):
    return np.swapaxes(a, 0, 1)


def _identity(grid: Grid, scalar):
    eye = np.eye(grid.dim).reshape((grid.dim, grid.dim) + (1,) * grid.dim)
    return eye * scalar


def _apply(a, v):
    """``(A v)_i = sum_j A_ij v_j``."""
    return np.einsum("ij...,j...->i...", a, v)


def _dot(v, w):
    return np.einsum("j...,j...->...", v, w)


def _outer(v, w):
    return np.einsum("i...,k...->ik...", v, w)


class _Kinematics:
    """Derivatives of a state shared by all right-hand-side groups."""

    def __init__(self, s: State):
        g = s.grid
        self.grid = g
        self.u = s.u
        self.gamma = s.gamma
        self.J = sp.jacobian(g, s.u)
        self.divu = np.trace(self.J, axis1=0, axis2=1)
        self.dg = sp.gradient(g, s.gamma)


def compute_F1(s: State) -> np.ndarray:
    k = _Kinematics(s)
    g, J, dg = k.grid, k.J, k.dg
    P = lambda a: sp.dealias(g, a)  # noqa: E731
    Hinv = lambda a: sp.helmholtz_inverse(g, a)  # noqa: E731
    JT = _transpose(J)

    stretch = _matmul(J, J + JT) - _matmul(JT, J) - J * k.divu
    pressure = _identity(g, 0.5 * (np.sum(J * J, axis=(0, 1)) + k.gamma**2 + _dot(dg, dg))) - _outer(dg, dg)
    lower = k.u * k.divu + _apply(JT, k.u)

    return (-Hinv(sp.matrix_divergence(g, P(stretch)))
            - Hinv(sp.matrix_divergence(g, P(pressure)))
            - Hinv(P(lower)))


def compute_F2(s: State) -> np.ndarray:
    k = _Kinematics(s)
    g, J, dg = k.grid, k.J, k.dg
    P = lambda a: sp.dealias(g, a)  # noqa: E731
    # (grad gamma grad u)_k = sum_j d_j gamma d_k u_j ; ((grad gamma).grad u)_k = sum_j d_j gamma d_j u_k
    flux = _apply(_transpose(J), dg) + _apply(J, dg) - dg * k.divu
    return (-sp.helmholtz_inverse(g, sp.divergence(g, P(flux)))
            - sp.helmholtz_inverse(g, P(k.gamma * k.divu)))


def nonlocal_rhs(s: State) -> tuple[np.ndarray, np.ndarray]:
    """``(du/dt, dgamma/dt) = (-u.grad u + F1, -u.grad gamma + F2)``."""
    g = s.grid
    J = sp.jacobian(g, s.u)
    dg = sp.gradient(g, s.gamma)
    du = -sp.dealias(g, _apply(J, s.u)) + compute_F1(s)
    dgam = -sp.dealias(g, _dot(s.u, dg)) + compute_F2(s)
    return du, dgam


def momentum_rhs(ms: MomentumState, s: State, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """``(dm/dt, drho/dt)`` of the momentum form.

    Raises :class:`InconsistentMomentum` when ``m`` or ``rho`` differs from the
    Helmholtz image of ``s`` by more than ``tol`` (relative, sup norm).
    """
    g = s.grid
    ref = MomentumState.from_state(s)
    for name, got, want in (("m", ms.m, ref.m), ("rho", ms.rho, ref.rho)):
        scale = max(1.0, float(np.abs(want).max()))
        err = float(np.abs(got - want).max()) / scale
        if err > tol:
            raise InconsistentMomentum(f"{name} differs from (I - Delta) of the state by {err:.3e}")
    P = lambda a: sp.dealias(g, a)  # noqa: E731
    J = sp.jacobian(g, s.u)
    divu = np.trace(J, axis1=0, axis2=1)
    Jm = sp.jacobian(g, ms.m)
    dg = sp.gradient(g, s.gamma)
    dm = -P(_apply(Jm, s.u)) - P(_apply(_transpose(J), ms.m)) - P(ms.m * divu) - P(ms.rho * dg)
    drho = -sp.divergence(g, P(ms.rho * s.u))
    return dm, drho


def _relative(a, b) -> float:
    diff = float(np.sqrt(np.sum((a - b) ** 2)))
    scale = max(float(np.sqrt(np.sum(a**2))), float(np.sqrt(np.sum(b**2))))
    return 0.0 if scale == 0.0 else diff / scale


def appendix_consistency(s: State) -> float:
    """Relative L^2 mismatch between ``(I - Delta)`` of the nonlocal RHS and the momentum RHS."""
    g = s.grid
    du, dgam = nonlocal_rhs(s)
    dm, drho = momentum_rhs(MomentumState.from_state(s), s)
    lhs = np.concatenate([sp.helmholtz(g, du), sp.helmholtz(g, dgam)[None]])
    rhs = np.concatenate([dm, drho[None]])
    return _relative(lhs, rhs)


def identity_residuals(s: State) -> dict[str, float]:
    """Relative residual of each rewriting identity, both sides assembled separately.

    Keys name the rewritten term: ``velocity-convection``, ``velocity-stretching``,
    ``velocity-expansion``, ``density-force``, ``density-convection``,
    ``density-expansion``.
    """
    g = s.grid
    P = lambda a: sp.dealias(g, a)  # noqa: E731
    div = lambda a: sp.matrix_divergence(g, a)  # noqa: E731
    u, gam = s.u, s.gamma
    J = sp.jacobian(g, u)
    JT = _transpose(J)
    divu = np.trace(J, axis1=0, axis2=1)
    grad_divu = sp.gradient(g, divu)
    lap_u = sp.laplacian(g, u)
    dg = sp.gradient(g, gam)
    lap_g = sp.laplacian(g, gam)
    lap = lambda a: sp.laplacian(g, a)  # noqa: E731

    out = {}
    left = P(_apply(sp.jacobian(g, lap_u), u)) - lap(P(_apply(J, u)))
    right = -div(P(_matmul(J, J) + _matmul(J, JT))) + P(_apply(J, grad_divu))
    out["velocity-convection"] = _relative(left, right)

    left = P(_apply(JT, lap_u))
    right = div(P(_matmul(JT, J) - _identity(g, 0.5 * np.sum(J * J, axis=(0, 1)))))
    out["velocity-stretching"] = _relative(left, right)

    left = P(_apply(J, grad_divu)) + P(lap_u * divu)
    right = div(P(J * divu))
    out["velocity-expansion"] = _relative(left, right)

    left = P(gam * dg) - P(lap_g * dg)
    right = div(P(_identity(g, 0.5 * (gam**2 + _dot(dg, dg))) - _outer(dg, dg)))
    out["density-force"] = _relative(left, right)

    left = P(_dot(u, sp.gradient(g, lap_g))) - lap(P(_dot(u, dg)))
    right = (-sp.divergence(g, P(_apply(JT, dg) + _apply(J, dg)))
             + P(_dot(dg, grad_divu)))
    out["density-convection"] = _relative(left, right)

    left = P(lap_g * divu)
    right = sp.divergence(g, P(dg * divu)) - P(_dot(dg, grad_divu))
    out["density-expansion"] = _relative(left, right)
    return out


def energy(s: State) -> float:
    """``H = int |u|^2 + |grad u|^2 + gamma^2 + |grad gamma|^2`` by grid quadrature."""
    g = s.grid
    J = sp.jacobian(g, s.u)
    dg = sp.gradient(g, s.gamma)
    total = np.sum(s.u**2) + np.sum(J**2) + np.sum(s.gamma**2) + np.sum(dg**2)
    return float(total * g.cell_volume)


def energy_spectral(s: State) -> float:
    """Same quantity as ``sum (1 + |xi|^2)(|u_hat|^2 + |gamma_hat|^2)``."""
    g = s.grid
    return sp.sobolev_norm(g, s.u, 1.0) ** 2 + sp.sobolev_norm(g, s.gamma, 1.0) ** 2
