"""
Periodic grids and Fourier-side operators.

Fields are plain numpy arrays laid out on a :class:`Grid`:

* scalar field: shape ``grid.shape`` (``(n,)`` or ``(n, n)``)
* vector field: shape ``(dim,) + grid.shape``
* matrix field: shape ``(dim, dim) + grid.shape``, entry ``[i, j] = d_j v_i``

Transforms are real-to-complex (``rfftn``) over the trailing ``dim`` axes, so
any leading component axes are carried along untouched.  Derivatives are exact
on the trigonometric interpolant; the Nyquist mode is dropped from odd
derivatives so that outputs stay real.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "SpectralCache",
    "forward",
    "inverse",
    "gradient",
    "divergence",
    "jacobian",
    "matrix_divergence",
    "laplacian",
    "helmholtz",
    "helmholtz_inverse",
    "dealias",
    "dealiased_product",
    "l2_norm",
    "spectral_l2_norm",
    "sobolev_norm",
    "pointwise_magnitude",
]


@dataclass(frozen=True)
class Grid:
    """Isotropic periodic tensor grid on the torus ``[0, period)^dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    n : int
        Points per axis; a power of two, at least 8.
    period : float
        Period ``L`` of every axis. ``L = 1`` is the unit torus.
    """

    dim: int
    n: int
    period: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "period", float(self.period))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Meshgrid of node coordinates (``indexing='ij'``)."""
        x = np.arange(self.n) * self.spacing
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @cached_property
    def cache(self) -> "SpectralCache":
        return SpectralCache.build(self)

    def zeros(self, *lead: int) -> np.ndarray:
        return np.zeros(tuple(lead) + self.shape)


@dataclass(frozen=True, eq=False)
class SpectralCache:
    """Precomputed Fourier-side arrays for a grid, in rfftn layout.

    Attributes
    ----------
    k : tuple of ndarray
        Integer wavenumbers per axis, broadcastable to the spectral shape.
    xi : tuple of ndarray
        Angular wavenumbers ``2*pi*k/L``.
    deriv : tuple of ndarray
        First-derivative multipliers ``1j*xi`` with Nyquist entries zeroed.
    xi_sq : ndarray
        ``|xi|^2`` per mode.
    kabs : ndarray
        ``|k|`` per mode (dimensionless radius used by the dyadic blocks).
    helmholtz_symbol : ndarray
        ``1 + |xi|^2``; equals 1 only at the zero mode.
    dealias_mask : ndarray of bool
        Keeps modes with every ``|k_j| <= n // 3``.
    weights : ndarray
        Multiplicity of each stored rfft mode (1 or 2) for Parseval sums.
    """

    k: tuple
    xi: tuple
    deriv: tuple
    xi_sq: np.ndarray
    kabs: np.ndarray
    helmholtz_symbol: np.ndarray
    dealias_mask: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, grid: Grid) -> "SpectralCache":
        n, dim = grid.n, grid.dim
        full = np.fft.fftfreq(n, d=1.0 / n)
        half = np.fft.rfftfreq(n, d=1.0 / n)
        per_axis = [full] * (dim - 1) + [half]
        k, xi, deriv = [], [], []
        for ax, kk in enumerate(per_axis):
            shape = [1] * dim
            shape[ax] = kk.size
            kk = kk.reshape(shape)
            x = 2.0 * np.pi * kk / grid.period
            d = 1j * x
            d = np.where(np.abs(kk) == n // 2, 0.0, d)
            k.append(kk)
            xi.append(x)
            deriv.append(d)
        spec_shape = tuple(a.size for a in per_axis)
        xi_sq = np.zeros(spec_shape)
        ksq = np.zeros(spec_shape)
        mask = np.ones(spec_shape, dtype=bool)
        for kk, x in zip(k, xi):
            xi_sq = xi_sq + x**2
            ksq = ksq + kk**2
            mask = mask & (np.abs(kk) <= n // 3)
        weights = np.full(spec_shape, 2.0)
        last = (slice(None),) * (dim - 1)
        weights[last + (0,)] = 1.0
        weights[last + (n // 2,)] = 1.0
        return cls(
            k=tuple(k),
            xi=tuple(xi),
            deriv=tuple(deriv),
            xi_sq=xi_sq,
            kabs=np.sqrt(ksq),
            helmholtz_symbol=1.0 + xi_sq,
            dealias_mask=mask,
            weights=weights,
        )


def forward(grid: Grid, f: np.ndarray) -> np.ndarray:
    return np.fft.rfftn(f, axes=grid.axes)


def inverse(grid: Grid, fh: np.ndarray) -> np.ndarray:
    return np.fft.irfftn(fh, s=grid.shape, axes=grid.axes)


def gradient(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Spectral gradient; a leading component axis on ``f`` is kept.

    For a scalar field the result has shape ``(dim,) + grid.shape``; for a
    vector field ``v`` it is the matrix field with ``[i, j] = d_j v_i``.
    """
    fh = forward(grid, f)
    out = np.stack([inverse(grid, d * fh) for d in grid.cache.deriv], axis=f.ndim - grid.dim)
    return out


def jacobian(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Matrix field ``J[i, j] = d_j v_i`` of a vector field."""
    if v.shape != (grid.dim,) + grid.shape:
        raise ValueError(f"expected vector field of shape {(grid.dim,) + grid.shape}, got {v.shape}")
    return gradient(grid, v)


def divergence(grid: Grid, v: np.ndarray) -> np.ndarray:
    """``sum_j d_j v_j`` for a vector field ``v``."""
    vh = forward(grid, v)
    acc = sum(d * vh[j] for j, d in enumerate(grid.cache.deriv))
    return inverse(grid, acc)


def matrix_divergence(grid: Grid, a: np.ndarray) -> np.ndarray:
    """Row-wise divergence ``(div A)_i = sum_j d_j A_ij``."""
    ah = forward(grid, a)
    acc = sum(d * ah[:, j] for j, d in enumerate(grid.cache.deriv))
    return inverse(grid, acc)


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    return inverse(grid, -grid.cache.xi_sq * forward(grid, f))


def helmholtz(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Apply ``I - Delta`` (symbol ``1 + |xi|^2``)."""
    return inverse(grid, grid.cache.helmholtz_symbol * forward(grid, f))


def helmholtz_inverse(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Apply ``(I - Delta)^{-1}``; the symbol never vanishes."""
    return inverse(grid, forward(grid, f) / grid.cache.helmholtz_symbol)


def dealias(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Zero every mode outside the two-thirds mask."""
    return inverse(grid, np.where(grid.cache.dealias_mask, forward(grid, f), 0.0))


def dealiased_product(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return dealias(grid, a * b)


def pointwise_magnitude(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Euclidean (Frobenius) magnitude over leading component axes."""
    lead = f.ndim - grid.dim
    if lead == 0:
        return np.abs(f)
    return np.sqrt(np.sum(f**2, axis=tuple(range(lead))))


def l2_norm(grid: Grid, f: np.ndarray) -> float:
    """Grid-quadrature L^2 norm (all components)."""
    return float(np.sqrt(np.sum(f**2) * grid.cell_volume))


def _mode_energy(grid: Grid, fh: np.ndarray) -> np.ndarray:
    lead = fh.ndim - grid.dim
    e = np.abs(fh) ** 2
    if lead:
        e = e.sum(axis=tuple(range(lead)))
    scale = grid.period**grid.dim / float(grid.n**grid.dim) ** 2
    return e * grid.cache.weights * scale


def spectral_l2_norm(grid: Grid, f: np.ndarray) -> float:
    """L^2 norm from Fourier coefficients (Parseval)."""
    return float(np.sqrt(np.sum(_mode_energy(grid, forward(grid, f)))))


def sobolev_norm(grid: Grid, f: np.ndarray, s: float) -> float:
    """Spectral-weight ``H^s`` norm with weights ``(1 + |xi|^2)^s``."""
    e = _mode_energy(grid, forward(grid, f))
    return float(np.sqrt(np.sum(grid.cache.helmholtz_symbol**s * e)))
