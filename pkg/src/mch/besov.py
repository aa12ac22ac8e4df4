"""
Discrete Littlewood-Paley blocks and Besov norms on the periodic grid.

The dyadic partition is radial in the dimensionless wavenumber ``|k|``
(``xi = 2*pi*k / L``), so for ``L = 2*pi`` it coincides with the usual
continuum construction.  With

    chi(r) = 1 on r <= 3/4,  0 on r >= 4/3,  quintic smoothstep in between,
    phi(r) = chi(r / 2) - chi(r),

block ``-1`` is ``chi(|k|)`` and block ``q >= 0`` is ``phi(2^-q |k|)``,
supported in the annulus ``[3/4 * 2^q, 8/3 * 2^q]`` and identically 1 on the
plateau ``[4/3 * 2^q, 3/2 * 2^q]``.  Blocks ``q = -1 .. q_max`` telescope to
``chi(2^-(q_max+1) |k|)``, which is 1 on every grid mode, so the sum of the
blocks reproduces the field exactly.

Vector and matrix fields are measured through their pointwise Euclidean
(Frobenius) magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import spectral as sp
from .spectral import Grid

__all__ = [
    "BesovParams",
    "LPDecomposition",
    "EnsembleReport",
    "chi",
    "phi",
    "q_max",
    "block_indices",
    "plateau_radii",
    "lp_decompose",
    "low_pass",
    "lebesgue_norm",
    "lp_norm",
    "block_norms",
    "sequence_norm",
    "besov_norm",
    "norm_chain_constant",
    "check_interpolation",
    "check_log_interpolation",
    "log_corollary_factor",
    "check_log_corollary",
    "check_morse",
    "commutator",
    "check_commutator",
    "random_field",
    "random_ensemble",
    "calibrate",
    "count_violations",
]

INNER, OUTER = 3.0 / 4.0, 4.0 / 3.0


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def chi(r):
    """Radial low-frequency cutoff: 1 inside 3/4, 0 outside 4/3."""
    return 1.0 - _smoothstep((np.asarray(r, dtype=float) - INNER) / (OUTER - INNER))


def phi(r):
    """Dyadic annulus bump ``chi(r/2) - chi(r)``."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


def q_max(grid: Grid) -> int:
    return math.ceil(math.log2(grid.n / 3.0)) + 1


def block_indices(grid: Grid) -> np.ndarray:
    return np.arange(-1, q_max(grid) + 1)


def plateau_radii(q: int) -> tuple[float, float]:
    """Closed interval of ``|k|`` on which block ``q`` has multiplier 1."""
    if q == -1:
        return (0.0, INNER)
    return (OUTER * 2.0**q, 2.0 * INNER * 2.0**q)


@lru_cache(maxsize=32)
def _multipliers(grid: Grid) -> np.ndarray:
    kabs = grid.cache.kabs
    out = [chi(kabs)]
    for q in range(q_max(grid) + 1):
        out.append(phi(kabs / 2.0**q))
    return np.stack(out)


def _check_q(grid: Grid, q: int) -> None:
    if not -1 <= q <= q_max(grid):
        raise IndexError(f"block index {q} outside [-1, {q_max(grid)}]")


@dataclass(frozen=True)
class BesovParams:
    """Indices of ``B^s_{p,r}``; ``p`` and ``r`` accept ``math.inf``."""

    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (v >= 1.0):
                raise ValueError(f"{name} must lie in [1, inf], got {v}")


@dataclass
class LPDecomposition:
    """Dyadic blocks of ``source``; ``blocks[i]`` is block ``q[i]``."""

    grid: Grid
    source: np.ndarray
    blocks: np.ndarray
    q: np.ndarray

    @property
    def q_max(self) -> int:
        return int(self.q[-1])

    def block(self, q: int) -> np.ndarray:
        _check_q(self.grid, q)
        return self.blocks[q + 1]

    def reconstruct(self) -> np.ndarray:
        return self.blocks.sum(axis=0)


def lp_decompose(grid: Grid, f: np.ndarray) -> LPDecomposition:
    fh = sp.forward(grid, f)
    mult = _multipliers(grid)
    lead = fh.ndim - grid.dim
    blocks = np.stack([sp.inverse(grid, m.reshape((1,) * lead + m.shape) * fh) for m in mult])
    return LPDecomposition(grid, f, blocks, block_indices(grid))


def low_pass(grid: Grid, f: np.ndarray, top: int) -> np.ndarray:
    """Partial sum of blocks ``q = -1 .. top``; identity once ``top >= q_max``."""
    if top >= q_max(grid):
        return np.array(f, dtype=float, copy=True)
    if top < -1:
        return np.zeros_like(f, dtype=float)
    m = chi(grid.cache.kabs / 2.0 ** (top + 1))
    fh = sp.forward(grid, f)
    return sp.inverse(grid, m.reshape((1,) * (fh.ndim - grid.dim) + m.shape) * fh)


def lebesgue_norm(grid: Grid, g: np.ndarray, p: float) -> float:
    """Grid quadrature ``L^p`` norm with cell weight ``(L/n)^d``; ``p = inf`` is the grid max."""
    a = sp.pointwise_magnitude(grid, g)
    if math.isinf(p):
        return float(a.max())
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * grid.cell_volume))
    return float((np.sum(a**p) * grid.cell_volume) ** (1.0 / p))


def lp_norm(grid: Grid, f: np.ndarray, q: int, p: float) -> float:
    """``||Delta_q f||_{L^p}``."""
    _check_q(grid, q)
    return lebesgue_norm(grid, lp_decompose(grid, f).block(q), p)


def block_norms(grid: Grid, f, p: float) -> np.ndarray:
    """``||Delta_q f||_{L^p}`` for every block; accepts a field or a decomposition."""
    dec = f if isinstance(f, LPDecomposition) else lp_decompose(grid, f)
    return np.array([lebesgue_norm(grid, b, p) for b in dec.blocks])


def sequence_norm(norms: np.ndarray, s: float, r: float, q: np.ndarray | None = None) -> float:
    """``l^r`` norm of ``2^{qs} * norms``."""
    if q is None:
        q = np.arange(-1, len(norms) - 1)
    seq = 2.0 ** (q * s) * np.asarray(norms)
    if math.isinf(r):
        return float(seq.max())
    return float(np.sum(seq**r) ** (1.0 / r))


def besov_norm(grid: Grid, f, bp: BesovParams | None = None, *, s=None, p=2.0, r=2.0) -> float:
    """``||f||_{B^s_{p,r}}`` truncated at ``q_max``."""
    if bp is None:
        bp = BesovParams(s, p, r)
    return sequence_norm(block_norms(grid, f, bp.p), bp.s, bp.r)


@lru_cache(maxsize=32)
def norm_chain_constant(grid: Grid) -> float:
    """``max_q`` of the l^1 norm of the discrete block kernel.

    ``||Delta_q f||_inf <= C ||f||_inf`` for every grid field, hence the
    discrete ``B^0_{inf,inf}`` norm is at most ``C`` times the grid sup norm.
    """
    best = 0.0
    for m in _multipliers(grid):
        kernel = sp.inverse(grid, m.astype(complex))
        best = max(best, float(np.abs(kernel).sum()))
    return best


# ---------------------------------------------------------------------------
# Inequality probes.  Each returns left/right with the unknown constant set to
# 1, or None when the right side vanishes.
# ---------------------------------------------------------------------------


def _ratio(left: float, right: float):
    if right <= 0.0 or not np.isfinite(right):
        return None
    return left / right


def check_interpolation(grid, f, s1, s2, theta, p=2.0, r=2.0):
    """Complex interpolation between ``B^{s1}`` and ``B^{s2}`` (constant-free)."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    norms = block_norms(grid, f, p)
    left = sequence_norm(norms, theta * s1 + (1.0 - theta) * s2, r)
    right = sequence_norm(norms, s1, r) ** theta * sequence_norm(norms, s2, r) ** (1.0 - theta)
    return _ratio(left, right)


def check_log_interpolation(grid, f, s, eps, p=2.0):
    """``||f||_{B^s_{p,1}}`` against ``(1+eps)/eps ||f||_{B^s_{p,inf}} ln(e + ratio)``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    norms = block_norms(grid, f, p)
    low = sequence_norm(norms, s, math.inf)
    if low <= 0.0:
        return None
    high = sequence_norm(norms, s + eps, math.inf)
    left = sequence_norm(norms, s, 1.0)
    right = (1.0 + eps) / eps * low * math.log(math.e + high / low)
    return _ratio(left, right)


def log_corollary_factor(q: float, d: int) -> float:
    """``(2q - d) / (q - d)``, defined for ``q > d``."""
    if not q > d:
        raise ValueError(f"need q > d, got q={q}, d={d}")
    return (2.0 * q - d) / (q - d)


def check_log_corollary(grid, f, q=None):
    """Sup norm against ``(2q-d)/(q-d) (1 + ||f||_{B^0_{inf,inf}} ln(e + ||f||_{W^{1,q}}))``."""
    d = grid.dim
    if q is None:
        q = 2 * d
    factor = log_corollary_factor(q, d)
    left = lebesgue_norm(grid, f, math.inf)
    b0 = float(block_norms(grid, f, math.inf).max())
    w1q = lebesgue_norm(grid, f, q) + lebesgue_norm(grid, sp.gradient(grid, f), q)
    right = factor * (1.0 + b0 * math.log(math.e + w1q))
    return _ratio(left, right)


MORSE_VARIANTS = ("algebra", "duality", "critical")


def check_morse(grid, f, g, variant, *, s=None, s1=None, s2=None, p=2.0, r=2.0):
    """Product estimates; ``fg`` is the plain grid product.

    Callers keep ``f`` and ``g`` below a quarter of the grid band so that the
    grid product has no aliasing.

    variant ``"algebra"``  : ``||fg||_{B^s} / (||f||_inf ||g||_{B^s} + ||g||_inf ||f||_{B^s})``, s > 0
    variant ``"duality"``  : ``||fg||_{B^{s1}} / (||f||_{B^{s1}} ||g||_{B^{s2}})``,
                             s1 <= d/p < s2, s1 + s2 > 0
    variant ``"critical"`` : ``||fg||_{B^{d/p-1}_{p,inf}} /
                             (||f||_{B^{d/p-1}_{p,1}} (||g||_{B^{d/p}_{p,inf}} + ||g||_inf))``, 1 <= p <= 2d
    """
    d = grid.dim
    fg = f * g
    if variant == "algebra":
        if s is None or not s > 0:
            raise ValueError("algebra variant needs s > 0")
        nf, ng = block_norms(grid, f, p), block_norms(grid, g, p)
        left = besov_norm(grid, fg, s=s, p=p, r=r)
        right = (lebesgue_norm(grid, f, math.inf) * sequence_norm(ng, s, r)
                 + lebesgue_norm(grid, g, math.inf) * sequence_norm(nf, s, r))
    elif variant == "duality":
        if s1 is None or s2 is None:
            raise ValueError("duality variant needs s1 and s2")
        if not (s1 <= d / p < s2 and s1 + s2 > 0):
            raise ValueError(f"duality variant needs s1 <= d/p < s2 and s1 + s2 > 0 (s1={s1}, s2={s2}, d/p={d / p})")
        left = besov_norm(grid, fg, s=s1, p=p, r=r)
        right = besov_norm(grid, f, s=s1, p=p, r=r) * besov_norm(grid, g, s=s2, p=p, r=r)
    elif variant == "critical":
        if not 1.0 <= p <= 2 * d:
            raise ValueError(f"critical variant needs 1 <= p <= 2d, got p={p}")
        sc = d / p - 1.0
        ng = block_norms(grid, g, p)
        left = besov_norm(grid, fg, s=sc, p=p, r=math.inf)
        right = besov_norm(grid, f, s=sc, p=p, r=1.0) * (
            sequence_norm(ng, d / p, math.inf) + lebesgue_norm(grid, g, math.inf))
    else:
        raise ValueError(f"unknown Morse variant {variant!r}; expected one of {MORSE_VARIANTS}")
    return _ratio(left, right)


def _advect(grid, v, grad_f):
    return sp.dealias(grid, np.einsum("j...,j...->...", v, grad_f))


def commutator(grid: Grid, v: np.ndarray, f: np.ndarray, q: int) -> np.ndarray:
    """``v . grad(Delta_q f) - Delta_q(v . grad f)`` with dealiased products."""
    _check_q(grid, q)
    fq = lp_decompose(grid, f).block(q)
    a = _advect(grid, v, sp.gradient(grid, fq))
    b = lp_decompose(grid, _advect(grid, v, sp.gradient(grid, f))).block(q)
    return a - b


def commutator_sequence(grid: Grid, v: np.ndarray, f: np.ndarray, p: float) -> np.ndarray:
    """``||[v, Delta_q] . grad f||_{L^p}`` for every block."""
    fblocks = lp_decompose(grid, f).blocks
    rest = lp_decompose(grid, _advect(grid, v, sp.gradient(grid, f))).blocks
    return np.array([
        lebesgue_norm(grid, _advect(grid, v, sp.gradient(grid, fb)) - rb, p)
        for fb, rb in zip(fblocks, rest)
    ])


def check_commutator(grid, v, f, s, p=2.0, r=2.0):
    """Commutator sequence norm against ``||grad v||_inf ||f||_{B^s} + ||grad f||_inf ||grad v||_{B^{s-1}}``.

    A velocity with ``grad v == 0`` commutes with every block, so the ratio is 0.
    """
    if not s > 0:
        raise ValueError(f"commutator estimate needs s > 0, got {s}")
    jv = sp.jacobian(grid, v)
    if not np.any(jv):
        return 0.0
    left = sequence_norm(commutator_sequence(grid, v, f, p), s, r)
    right = (lebesgue_norm(grid, jv, math.inf) * besov_norm(grid, f, s=s, p=p, r=r)
             + lebesgue_norm(grid, sp.gradient(grid, f), math.inf) * besov_norm(grid, jv, s=s - 1.0, p=p, r=r))
    return _ratio(left, right)


# ---------------------------------------------------------------------------
# Ensembles and calibration
# ---------------------------------------------------------------------------


def random_field(grid: Grid, rng: np.random.Generator, beta=None, kmax=None, lead=()) -> np.ndarray:
    """Real band-limited field with ``|coeff(k)| ~ (1 + |k|)^-beta``, unit sup norm.

    ``beta`` defaults to a uniform draw from ``[1.5, 3]``; ``kmax`` (per axis)
    defaults to the dealias band ``n // 3``.
    """
    if beta is None:
        beta = rng.uniform(1.5, 3.0)
    if kmax is None:
        kmax = grid.n // 3
    c = grid.cache
    keep = np.ones(c.kabs.shape, dtype=bool)
    for kk in c.k:
        keep = keep & (np.abs(kk) <= kmax)
    shape = tuple(lead) + c.kabs.shape
    coeff = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeff = coeff * np.where(keep, (1.0 + c.kabs) ** (-beta), 0.0)
    coeff[(Ellipsis,) + (0,) * grid.dim] = coeff[(Ellipsis,) + (0,) * grid.dim].real
    f = sp.inverse(grid, coeff)
    peak = sp.pointwise_magnitude(grid, f).max()
    return f / peak if peak > 0 else f


def random_ensemble(grid, size, seed, *, kmax=None, lead=(), scale_range=(1.0, 1.0)):
    """``size`` fields from :func:`random_field`; sup norms drawn log-uniformly from ``scale_range``."""
    rng = np.random.default_rng(seed)
    lo, hi = scale_range
    out = []
    for _ in range(size):
        f = random_field(grid, rng, kmax=kmax, lead=lead)
        scale = math.exp(rng.uniform(math.log(lo), math.log(hi))) if hi > lo else lo
        out.append(scale * f)
    return out


@dataclass
class EnsembleReport:
    """Empirical constant of one inequality over an ensemble."""

    inequality: str
    samples: int
    empirical_constant: float
    margin: float = 2.0
    skipped: int = 0
    ratios: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def threshold(self) -> float:
        return self.margin * self.empirical_constant


def calibrate(inequality: str, ratios, margin: float = 2.0) -> EnsembleReport:
    vals = np.array([x for x in ratios if x is not None], dtype=float)
    skipped = sum(1 for x in ratios if x is None)
    const = float(vals.max()) if vals.size else 0.0
    return EnsembleReport(inequality, int(vals.size), const, margin, skipped, vals)


def count_violations(report: EnsembleReport, ratios) -> int:
    """Samples whose ratio exceeds ``margin * empirical_constant``."""
    return int(sum(1 for x in ratios if x is not None and x > report.threshold))
