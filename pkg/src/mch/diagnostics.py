"""
Blow-up monitors along trajectories.

A finite spectral grid cannot blow up, so everything here is a proxy:
sup norms of the fields and their gradients, the discrete ``B^0_{inf,inf}``
norm ``max_q ||Delta_q f||_inf`` of the gradients, and three time integrals
accumulated by the trapezoid rule::

    I13 = int ||u||_inf + ||grad u||_inf + ||gamma||_inf + ||grad gamma||_inf
    I14 = int ||grad u||_inf
    I15 = int ||grad u||_{B^0_inf,inf} + ||grad gamma||_{B^0_inf,inf}

The discrete ``B^0_{inf,inf}`` norm is bounded by ``norm_chain_constant``
times the grid sup norm, not by the sup norm itself.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import lambertw

from . import besov as bv
from . import snapshot
from . import spectral as sp
from .dynamics import State, energy
from .solvers import SolverConfig, SolverError, integrate, picard_solve, state_norm

__all__ = [
    "DiagnosticsRecord",
    "SteepeningAlert",
    "OrderingReport",
    "ScanRow",
    "RunResult",
    "record",
    "trace_arrays",
    "check_criterion_ordering",
    "gronwall_exponent",
    "detect_steepening",
    "run_monitored",
    "blowup_scan",
    "TRAJECTORY_COLUMNS",
    "SCAN_COLUMNS",
    "write_trajectory_csv",
    "write_scan_csv",
]

TRAJECTORY_COLUMNS = (
    "time", "H", "linf_u", "linf_grad_u", "linf_gamma", "linf_grad_gamma", "sobolev_s_norm",
    "blowup_integral_T13", "blowup_integral_T14", "blowup_integral_T15",
)
SCAN_COLUMNS = ("amplitude", "alert_time", "final_I13", "final_I14", "final_I15", "final_time", "status")


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    energy: float
    linf_u: float
    linf_grad_u: float
    linf_gamma: float
    linf_grad_gamma: float
    b0_grad_u: float
    b0_grad_gamma: float
    i13: float
    i14: float
    i15: float
    sobolev_norm: float

    @property
    def integrand13(self) -> float:
        return self.linf_u + self.linf_grad_u + self.linf_gamma + self.linf_grad_gamma

    @property
    def integrand14(self) -> float:
        return self.linf_grad_u

    @property
    def integrand15(self) -> float:
        return self.b0_grad_u + self.b0_grad_gamma

    def csv_row(self) -> list[str]:
        vals = (self.time, self.energy, self.linf_u, self.linf_grad_u, self.linf_gamma, self.linf_grad_gamma,
                self.sobolev_norm, self.i13, self.i14, self.i15)
        return [repr(float(v)) for v in vals]


def b0_norm(grid, f: np.ndarray) -> float:
    """Discrete ``B^0_{inf,inf}`` norm: ``max_q`` of the block sup norms."""
    return float(bv.block_norms(grid, f, math.inf).max())


def record(s: State, previous: DiagnosticsRecord | None = None, sobolev_index: float = 2.5) -> DiagnosticsRecord:
    """Monitors of ``s``; integrals advance from ``previous`` by one trapezoid panel."""
    g = s.grid
    J = sp.jacobian(g, s.u)
    dg = sp.gradient(g, s.gamma)
    linf = lambda a: float(sp.pointwise_magnitude(g, a).max())  # noqa: E731
    rec = DiagnosticsRecord(
        time=float(s.time),
        energy=energy(s),
        linf_u=linf(s.u),
        linf_grad_u=linf(J),
        linf_gamma=linf(s.gamma),
        linf_grad_gamma=linf(dg),
        b0_grad_u=b0_norm(g, J),
        b0_grad_gamma=b0_norm(g, dg),
        i13=0.0, i14=0.0, i15=0.0,
        sobolev_norm=state_norm(g, s.u, s.gamma, sobolev_index),
    )
    if previous is None:
        return rec
    h = rec.time - previous.time
    panel = lambda a, b: 0.5 * h * (a + b)  # noqa: E731
    return replace(
        rec,
        i13=previous.i13 + panel(previous.integrand13, rec.integrand13),
        i14=previous.i14 + panel(previous.integrand14, rec.integrand14),
        i15=previous.i15 + panel(previous.integrand15, rec.integrand15),
    )


def trace_arrays(trace: Sequence[DiagnosticsRecord]) -> dict[str, np.ndarray]:
    """Column arrays keyed by record field name."""
    return {f.name: np.array([getattr(r, f.name) for r in trace]) for f in fields(DiagnosticsRecord)}


# ---------------------------------------------------------------------------
# Criterion ordering
# ---------------------------------------------------------------------------


def _tightest(g: np.ndarray, integral: np.ndarray) -> np.ndarray:
    """Smallest ``c >= 0`` with ``c * exp(c * I) >= g`` per sample."""
    out = np.empty_like(g, dtype=float)
    for i, (gi, Ii) in enumerate(zip(g, integral)):
        if gi <= 0.0:
            out[i] = 0.0
        elif math.isinf(gi):
            out[i] = math.inf
        elif Ii <= 0.0:
            out[i] = gi
        else:
            out[i] = float(lambertw(gi * Ii).real) / Ii
    return out


@dataclass(frozen=True)
class OrderingReport:
    """Tightest constants for the two ``grad u``-controlled bounds.

    (a) ``||gamma||_inf + ||grad gamma||_inf <= C exp(C I14)``
    (b) ``||u||_inf + ||grad u||_inf <= C (N0 + int (gamma monitors)^2) exp(C I14)``
    """

    c_gamma: float
    c_velocity: float
    samples: int

    @property
    def constant(self) -> float:
        return max(self.c_gamma, self.c_velocity)

    def holds(self, c: float) -> bool:
        return self.c_gamma <= c and self.c_velocity <= c


def check_criterion_ordering(trace: Sequence[DiagnosticsRecord]) -> OrderingReport:
    if len(trace) == 0:
        raise ValueError("trace is empty")
    a = trace_arrays(trace)
    t = a["time"]
    i14 = a["i14"]
    gmon = a["linf_gamma"] + a["linf_grad_gamma"]
    umon = a["linf_u"] + a["linf_grad_u"]
    # running trapezoid integral of the squared gamma monitors
    sq = gmon**2
    acc = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (sq[1:] + sq[:-1]))])
    base = umon[0] + acc
    with np.errstate(divide="ignore", invalid="ignore"):
        target_b = np.where(umon == 0.0, 0.0, umon / base)
    c_a = float(_tightest(gmon, i14).max())
    c_b = float(_tightest(target_b, i14).max())
    return OrderingReport(c_a, c_b, len(trace))


def gronwall_exponent(trace: Sequence[DiagnosticsRecord]) -> float:
    """Smallest ``C`` with ``N(t) / N(0) <= exp(C * I13(t))`` along ``trace``.

    ``N`` is the Sobolev surrogate norm.  Samples with ``I13 = 0`` only
    constrain ``C`` when the norm has already grown, which returns ``inf``.
    """
    if len(trace) == 0:
        raise ValueError("trace is empty")
    a = trace_arrays(trace)
    n0 = a["sobolev_norm"][0]
    if n0 <= 0.0:
        return 0.0
    growth = np.log(a["sobolev_norm"] / n0)
    i13 = a["i13"]
    pos = i13 > 0.0
    if np.any(growth[~pos] > 0.0):
        return math.inf
    return float(max(0.0, (growth[pos] / i13[pos]).max(initial=0.0)))


# ---------------------------------------------------------------------------
# Steepening
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteepeningAlert:
    triggered: bool
    time: float = math.nan
    quantity: str = "linf_grad_u"
    threshold: float = math.inf
    slope_ratio: float = math.nan
    amplitude_ratio: float = math.nan


def _steep(rec: DiagnosticsRecord, first: DiagnosticsRecord, threshold: float) -> tuple[bool, float, float]:
    if first.linf_grad_u <= 0.0 or first.linf_u <= 0.0:
        return False, math.nan, math.nan
    slope = rec.linf_grad_u / first.linf_grad_u
    amp = rec.linf_u / first.linf_u
    return slope >= threshold and amp <= 2.0, slope, amp


def detect_steepening(trace: Sequence[DiagnosticsRecord], threshold_ratio: float) -> SteepeningAlert:
    """First sample where ``||grad u||_inf`` reaches ``threshold_ratio`` times its
    initial value while ``||u||_inf`` stays within twice its initial value.

    ``threshold_ratio = inf`` never triggers.
    """
    if not threshold_ratio > 1.0:
        raise ValueError(f"threshold_ratio must exceed 1, got {threshold_ratio}")
    if len(trace) == 0 or math.isinf(threshold_ratio):
        return SteepeningAlert(False, threshold=threshold_ratio)
    first = trace[0]
    for rec in trace:
        hit, slope, amp = _steep(rec, first, threshold_ratio)
        if hit:
            return SteepeningAlert(True, rec.time, "linf_grad_u", threshold_ratio, slope, amp)
    return SteepeningAlert(False, threshold=threshold_ratio)


# ---------------------------------------------------------------------------
# Monitored runs
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    trace: list
    alert: SteepeningAlert
    status: str = "ok"
    error: str = ""
    final_state: State | None = None


def _states(s0: State, cfg: SolverConfig) -> Iterable[State]:
    if cfg.scheme == "picard":
        traj, _ = picard_solve(s0, cfg)
        return iter(traj)
    return integrate(s0, cfg.dt, cfg.t_end, cfg.cfl_guard)


def run_monitored(s0: State, cfg: SolverConfig, threshold: float = math.inf, *,
                  stop_on_alert: bool = True,
                  on_state: Callable[[int, State, DiagnosticsRecord], None] | None = None) -> RunResult:
    """Advance ``s0`` and record diagnostics at every step.

    Solver failures end the run with ``status`` set to the error class name;
    the trace up to the last finite state is kept.  ``on_state(k, state,
    record)`` is called for every recorded state, ``k = 0`` being the initial one.
    """
    trace: list[DiagnosticsRecord] = []
    alert = SteepeningAlert(False, threshold=threshold)
    status, message, last = "ok", "", None
    try:
        for k, s in enumerate(_states(s0, cfg)):
            rec = record(s, trace[-1] if trace else None, cfg.sobolev_index)
            trace.append(rec)
            last = s
            if on_state is not None:
                on_state(k, s, rec)
            if not alert.triggered and not math.isinf(threshold):
                hit, slope, amp = _steep(rec, trace[0], threshold)
                if hit:
                    alert = SteepeningAlert(True, rec.time, "linf_grad_u", threshold, slope, amp)
                    if stop_on_alert:
                        break
    except SolverError as exc:
        status, message = type(exc).__name__, str(exc)
    return RunResult(trace, alert, status, message, last)


def write_trajectory_csv(path, trace: Sequence[DiagnosticsRecord], include_initial: bool = False) -> None:
    """Trajectory table; the initial record is omitted unless ``include_initial``."""
    rows = trace if include_initial else trace[1:]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for r in rows:
            w.writerow(r.csv_row())


class SnapshotWriter:
    """``on_state`` hook writing ``snap_XXXXXX.mchf`` every ``stride`` steps plus an index."""

    def __init__(self, directory, stride: int):
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        self.directory = Path(directory)
        self.stride = stride
        self.entries: list[tuple[int, float, str]] = []

    def __call__(self, k: int, s: State, rec: DiagnosticsRecord) -> None:
        if k % self.stride == 0:
            self.write(k, s)

    def write(self, k: int, s: State) -> None:
        """Write step ``k`` unless it is already on disk."""
        if self.entries and self.entries[-1][0] == k:
            return
        name = f"snap_{k:06d}.mchf"
        snapshot.write(self.directory / name, s.grid, s.components())
        self.entries.append((k, float(s.time), name))

    def write_index(self) -> None:
        with open(self.directory / "snapshots.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("step", "time", "file"))
            for k, t, name in self.entries:
                w.writerow((k, repr(t), name))


def replay_snapshots(directory, sobolev_index: float = 2.5) -> list[DiagnosticsRecord]:
    """Rebuild a trace from a snapshot directory and its index."""
    directory = Path(directory)
    trace: list[DiagnosticsRecord] = []
    with open(directory / "snapshots.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            grid, comps = snapshot.read(directory / row["file"])
            s = State.from_components(grid, comps, float(row["time"]))
            trace.append(record(s, trace[-1] if trace else None, sobolev_index))
    return trace


# ---------------------------------------------------------------------------
# Amplitude scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    amplitude: float
    alert_time: float
    final_I13: float
    final_I14: float
    final_I15: float
    final_time: float
    status: str

    def csv_row(self) -> list[str]:
        return [repr(float(self.amplitude)), repr(float(self.alert_time)), repr(float(self.final_I13)),
                repr(float(self.final_I14)), repr(float(self.final_I15)), repr(float(self.final_time)), self.status]


def _scan_one(args) -> ScanRow:
    make_state, amplitude, cfg, threshold = args
    try:
        s0 = make_state(amplitude)
    except (ValueError, SolverError) as exc:
        return ScanRow(amplitude, math.nan, math.nan, math.nan, math.nan, math.nan, type(exc).__name__)
    res = run_monitored(s0, cfg, threshold)
    last = res.trace[-1]
    status = "alert" if res.alert.triggered else res.status
    return ScanRow(amplitude, res.alert.time if res.alert.triggered else math.inf,
                   last.i13, last.i14, last.i15, last.time, status)


def blowup_scan(make_state: Callable[[float], State], amplitudes: Sequence[float], cfg: SolverConfig,
                threshold: float = math.inf, workers: int | None = None) -> list[ScanRow]:
    """Run one monitored trajectory per amplitude.

    ``make_state(a)`` builds the initial state for amplitude ``a`` and must be
    picklable when ``workers > 1``.  Rows keep the order of ``amplitudes``;
    solver errors become a ``status`` entry.  ``alert_time`` is ``inf`` when
    no alert fired.
    """
    if len(amplitudes) == 0:
        raise ValueError("amplitude list is empty")
    if workers is None:
        workers = int(os.environ.get("MCH_THREADS", "1") or 1)
    jobs = [(make_state, float(a), cfg, threshold) for a in amplitudes]
    if workers <= 1 or len(jobs) == 1:
        return [_scan_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_scan_one, jobs))


def write_scan_csv(path_or_file, rows: Sequence[ScanRow]) -> None:
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        for r in rows:
            w.writerow(r.csv_row())
    finally:
        if own:
            fh.close()
