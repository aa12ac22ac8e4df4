"""
Verification batteries behind ``mch verify``.

Each suite returns a list of :class:`Check` rows (name, measured value,
threshold, pass flag).  The reference problems are defined here once and
shared with the acceptance tests and demos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import besov as bv
from . import spectral as sp
from .dynamics import State, appendix_consistency, energy, identity_residuals
from .initial_data import InitialDataSpec, initial_state
from .solvers import SolverConfig, integrate, picard_solve
from .spectral import Grid

__all__ = [
    "Check",
    "SUITES",
    "run_suite",
    "smooth_1d_state",
    "smooth_family",
    "random_states",
    "INEQUALITIES",
    "inequality_ratios",
    "richardson_order",
]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.6g} {self.relation} {self.threshold:.6g}"


def _le(name, value, threshold) -> Check:
    return Check(name, float(value), float(threshold), bool(value <= threshold), "<=")


def _ge(name, value, threshold) -> Check:
    return Check(name, float(value), float(threshold), bool(value >= threshold), ">=")


# ---------------------------------------------------------------------------
# Reference problems
# ---------------------------------------------------------------------------


SMOOTH_U = InitialDataSpec("gaussian_bump", amplitude=0.6, width=0.5, center=0.5)
SMOOTH_GAMMA = InitialDataSpec("gaussian_bump", amplitude=0.4, width=0.4, center=0.35)


def smooth_1d_state(n: int = 256, with_gamma: bool = True) -> State:
    """Gaussian-bump data on ``[0, 2 pi)`` used by the conservation and order studies."""
    grid = Grid(1, n, 2.0 * math.pi)
    return initial_state(grid, SMOOTH_U, SMOOTH_GAMMA if with_gamma else None)


def random_states(grid: Grid, count: int, seed: int) -> list[State]:
    """Band-limited random states with unit-sup components."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u = bv.random_field(grid, rng, lead=(grid.dim,))
        g = bv.random_field(grid, rng)
        out.append(State(grid, u, g))
    return out


def smooth_family(count: int = 5, seed: int = 31, n: int = 256) -> list[State]:
    """Seeded gaussian-bump pairs of moderate amplitude and width (no steepening by ``t = 1``)."""
    rng = np.random.default_rng(seed)
    grid = Grid(1, n, 2.0 * math.pi)
    out = []
    for _ in range(count):
        a, b = rng.uniform(0.3, 0.6, 2)
        w, v = rng.uniform(0.4, 0.7, 2)
        c, d = rng.uniform(0.0, 1.0, 2)
        out.append(initial_state(grid, InitialDataSpec("gaussian_bump", amplitude=a, width=w, center=c),
                                 InitialDataSpec("gaussian_bump", amplitude=b, width=v, center=d)))
    return out


def final_state(s0: State, dt: float, t_end: float) -> State:
    s = s0
    for s in integrate(s0, dt, t_end):
        pass
    return s


def richardson_order(s0: State, dts=(4e-3, 2e-3, 1e-3), t_end: float = 1.0) -> float:
    """``log2(|y(h) - y(h/2)| / |y(h/2) - y(h/4)|)`` at ``t_end`` in the L^2 norm."""
    ys = [final_state(s0, dt, t_end).components() for dt in dts]
    e1 = np.linalg.norm(ys[0] - ys[1])
    e2 = np.linalg.norm(ys[1] - ys[2])
    return float(math.log(e1 / e2) / math.log(dts[0] / dts[1]))


# ---------------------------------------------------------------------------
# Inequality ensembles
# ---------------------------------------------------------------------------

_BESOV_GRID = Grid(1, 256, 2.0 * math.pi)
_SCALES = (0.1, 10.0)


def _pairs(seed: int, size: int, kmax: int, lead=()):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(size):
        a = bv.random_field(_BESOV_GRID, rng, kmax=kmax, lead=lead)
        b = bv.random_field(_BESOV_GRID, rng, kmax=kmax)
        sa, sb = np.exp(rng.uniform(*np.log(_SCALES), size=2))
        out.append((sa * a, sb * b))
    return out


def _quarter() -> int:
    # products of two fields below n/4 stay inside the grid band without aliasing
    return _BESOV_GRID.n // 4 - 1


def _r_log(seed, size):
    return [bv.check_log_interpolation(_BESOV_GRID, f, s=1.0, eps=0.5) for f, _ in _pairs(seed, size, None)]


def _r_corollary(seed, size):
    return [bv.check_log_corollary(_BESOV_GRID, f) for f, _ in _pairs(seed, size, None)]


def _r_algebra(seed, size):
    return [bv.check_morse(_BESOV_GRID, f, g, "algebra", s=2.0) for f, g in _pairs(seed, size, _quarter())]


def _r_duality(seed, size):
    return [bv.check_morse(_BESOV_GRID, f, g, "duality", s1=0.5, s2=1.0) for f, g in _pairs(seed, size, _quarter())]


def _r_critical(seed, size):
    return [bv.check_morse(_BESOV_GRID, f, g, "critical", p=2.0) for f, g in _pairs(seed, size, _quarter())]


def _r_commutator(seed, size):
    return [bv.check_commutator(_BESOV_GRID, v, f, s=1.5) for v, f in _pairs(seed, size, None, lead=(1,))]


INEQUALITIES: dict[str, Callable[[int, int], list]] = {
    "log-interpolation": _r_log,
    "log-corollary": _r_corollary,
    "morse-algebra": _r_algebra,
    "morse-duality": _r_duality,
    "morse-critical": _r_critical,
    "commutator": _r_commutator,
}
SEED_CALIBRATE = 20240611
SEED_TEST = 977


def inequality_ratios(name: str, seed: int, size: int = 100) -> list:
    return INEQUALITIES[name](seed, size)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_appendix(count: int = 50) -> list[Check]:
    checks = []
    for dim, n in ((1, 256), (2, 64)):
        states = random_states(Grid(dim, n), count, seed=100 + dim)
        joint = max(appendix_consistency(s) for s in states)
        checks.append(_le(f"d={dim} joint residual (max of {count})", joint, 1e-8))
        per = {}
        for s in states:
            for k, v in identity_residuals(s).items():
                per[k] = max(per.get(k, 0.0), v)
        for k, v in per.items():
            checks.append(_le(f"d={dim} identity ({k})", v, 1e-8))
    return checks


def suite_besov() -> list[Check]:
    grid = Grid(1, 256, 2.0 * math.pi)
    rng = np.random.default_rng(5)
    fs = [bv.random_field(grid, rng) for _ in range(20)]
    pu = max(np.abs(bv.lp_decompose(grid, f).reconstruct() - f).max() / np.abs(f).max() for f in fs)
    checks = [_le("partition of unity (max rel)", pu, 1e-12)]
    worst = 0.0
    x = grid.coords[0]
    for q, k in ((1, 3), (2, 6), (3, 12)):
        g = np.cos(k * x)
        for s, p, r in ((1.5, 2.0, 2.0), (-0.5, math.inf, 1.0), (2.0, 1.0, math.inf)):
            want = 2.0 ** (q * s) * bv.lebesgue_norm(grid, g, p)
            got = bv.besov_norm(grid, g, s=s, p=p, r=r)
            worst = max(worst, abs(got - want) / want)
    checks.append(_le("single-block identity (max rel)", worst, 1e-12))
    ratios = [bv.check_interpolation(grid, f, 0.5, 2.5, th) for f in fs for th in (0.0, 0.3, 0.7, 1.0)]
    checks.append(_le("interpolation with C=1 (max ratio)", max(ratios), 1.0 + 1e-10))
    return checks


def suite_inequalities(size: int = 100) -> list[Check]:
    checks = []
    for name in INEQUALITIES:
        rep = bv.calibrate(name, inequality_ratios(name, SEED_CALIBRATE, size))
        fresh = inequality_ratios(name, SEED_TEST, size)
        worst = max(x for x in fresh if x is not None)
        checks.append(_le(f"{name} (C_cal={rep.empirical_constant:.4g}) fresh max", worst, rep.threshold))
    return checks


def suite_convergence() -> list[Check]:
    return [_ge("RK4 observed order", richardson_order(smooth_1d_state()), 3.8)]


def suite_conservation() -> list[Check]:
    s0 = smooth_1d_state()
    h0 = energy(s0)
    drift = max(abs(energy(s) - h0) / h0 for s in integrate(s0, 1e-3, 1.0))
    return [_le("energy drift on [0, 1]", drift, 1e-6)]


def suite_picard() -> list[Check]:
    s0 = smooth_1d_state()
    cfg = SolverConfig(dt=1e-3, t_end=0.05, scheme="picard", picard_tol=1e-10)
    traj, trace = picard_solve(s0, cfg)
    d = np.array(trace.differences)
    ratio = float((d[1:-1] / d[2:]).min()) if len(d) > 3 else math.nan
    ref = final_state(s0, cfg.dt, cfg.t_end).components()
    got = traj[-1].components()
    err = float(np.linalg.norm(got - ref) / np.linalg.norm(ref))
    return [
        _ge("converged", float(trace.converged), 1.0),
        _ge("min contraction factor after iterate 2", ratio, 2.0),
        _le("relative L2 gap to RK4 at t_end", err, 1e-5),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "appendix": suite_appendix,
    "besov": suite_besov,
    "inequalities": suite_inequalities,
    "convergence": suite_convergence,
    "conservation": suite_conservation,
    "picard": suite_picard,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
