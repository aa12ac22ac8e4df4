import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mch import besov as bv
from mch import diagnostics as dg
from mch.config import GridConfig, RunConfig
from mch.dynamics import State
from mch.initial_data import InitialDataSpec, initial_state
from mch.solvers import SolverConfig
from mch.spectral import Grid
from mch.verify import random_states, smooth_1d_state

TWO_PI = 2.0 * math.pi


def small_scan_config(**solver):
    return RunConfig(
        grid=GridConfig(1, 64, TWO_PI),
        u=InitialDataSpec("smoothed_peakon", width=0.3),
        solver=SolverConfig(**{"dt": 1e-2, "t_end": 0.2, **solver}),
    )


def synthetic_trace(slopes, amps, dt=0.1):
    base = dg.record(State.zeros(Grid(1, 16)))
    return [replace(base, time=k * dt, linf_grad_u=a, linf_u=b) for k, (a, b) in enumerate(zip(slopes, amps))]


class TestRecord:
    def test_zero_state(self):
        r = dg.record(State.zeros(Grid(2, 16)))
        for name, v in dg.trace_arrays([r]).items():
            assert v[0] == 0.0, name

    def test_sine(self):
        g = Grid(1, 64, TWO_PI)
        x = g.coords[0]
        r = dg.record(State(g, np.sin(x), np.zeros_like(x)))
        assert r.linf_u == pytest.approx(1.0, abs=1e-14)
        assert r.linf_grad_u == pytest.approx(1.0, abs=1e-14)
        assert r.energy == pytest.approx(TWO_PI, rel=1e-14)
        assert r.linf_gamma == 0.0 and r.i13 == 0.0

    def test_single_block_b0_is_block_sup(self):
        # cos(3x) lies on the plateau of block q = 1, so its gradient is one block
        g = Grid(1, 256, TWO_PI)
        x = g.coords[0]
        r = dg.record(State(g, np.cos(3 * x), np.cos(6 * x)))
        assert r.b0_grad_u == pytest.approx(r.linf_grad_u, rel=1e-13)
        assert r.b0_grad_gamma == pytest.approx(r.linf_grad_gamma, rel=1e-13)

    def test_trapezoid_panel(self):
        g = Grid(1, 64, TWO_PI)
        x = g.coords[0]
        a = dg.record(State(g, np.sin(x), np.zeros_like(x), 0.0))
        b = dg.record(State(g, 3 * np.sin(x), np.zeros_like(x), 0.5), a)
        assert b.i14 == pytest.approx(0.25 * (1 + 3), rel=1e-14)
        assert b.i13 == pytest.approx(0.25 * (2 + 6), rel=1e-14)

    def test_csv_row_matches_columns(self):
        r = dg.record(smooth_1d_state(n=32))
        assert len(r.csv_row()) == len(dg.TRAJECTORY_COLUMNS)
        assert float(r.csv_row()[1]) == r.energy


class TestStructure:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2]))
    def test_integrand_dominance(self, seed, dim):
        s = random_states(Grid(dim, 32 if dim == 2 else 128, TWO_PI), 1, seed)[0]
        r = dg.record(s)
        assert r.integrand13 >= r.integrand14

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2]))
    def test_norm_chain(self, seed, dim):
        g = Grid(dim, 32 if dim == 2 else 128, TWO_PI)
        r = dg.record(random_states(g, 1, seed)[0])
        K = bv.norm_chain_constant(g)
        assert r.b0_grad_u <= K * r.linf_grad_u
        assert r.b0_grad_gamma <= K * r.linf_grad_gamma

    def test_accumulators_second_order(self):
        g = Grid(1, 64, TWO_PI)
        s0 = initial_state(g, InitialDataSpec("fourier_mode", amplitude=0.3),
                           InitialDataSpec("fourier_mode", amplitude=0.2))
        finals = []
        for dt in (5e-3, 2.5e-3, 1.25e-3):
            last = dg.run_monitored(s0, SolverConfig(dt=dt, t_end=0.5)).trace[-1]
            finals.append(np.array([last.i13, last.i14, last.i15]))
        d1 = np.abs(finals[0] - finals[1])
        d2 = np.abs(finals[1] - finals[2])
        assert np.all(np.log2(d1 / d2) >= 1.9)

    def test_replay_is_bit_identical(self, tmp_path):
        s0 = smooth_1d_state(n=64)
        writer = dg.SnapshotWriter(tmp_path, 1)
        res = dg.run_monitored(s0, SolverConfig(dt=1e-2, t_end=0.1), on_state=writer)
        writer.write_index()
        assert dg.replay_snapshots(tmp_path) == res.trace


class TestCriterionOrdering:
    def test_empty_trace(self):
        with pytest.raises(ValueError):
            dg.check_criterion_ordering([])

    def test_zero_solution(self):
        g = Grid(1, 16)
        trace = [dg.record(State.zeros(g, t)) for t in (0.0, 0.5, 1.0)]
        rep = dg.check_criterion_ordering(trace)
        assert rep.c_gamma == 0.0 and rep.c_velocity == 0.0 and rep.holds(1.0)

    def test_smooth_run(self):
        res = dg.run_monitored(smooth_1d_state(n=128), SolverConfig(dt=2e-3, t_end=1.0))
        rep = dg.check_criterion_ordering(res.trace)
        assert rep.samples == 501
        assert 0.0 < rep.constant < 10.0
        assert rep.holds(rep.constant) and not rep.holds(0.99 * rep.constant)
        # c exp(c I14) reaches the monitor exactly at the binding sample
        a = dg.trace_arrays(res.trace)
        gmon = a["linf_gamma"] + a["linf_grad_gamma"]
        slack = rep.c_gamma * np.exp(rep.c_gamma * a["i14"]) - gmon
        assert slack.min() == pytest.approx(0.0, abs=1e-12) and np.all(slack >= -1e-12)

    def test_gamma_free_run(self):
        res = dg.run_monitored(smooth_1d_state(n=64, with_gamma=False), SolverConfig(dt=1e-2, t_end=0.3))
        assert dg.check_criterion_ordering(res.trace).c_gamma == 0.0

    def test_tightest_constant(self):
        c = dg._tightest(np.array([0.0, 2.0, 3.0, 2.0]), np.array([1.0, 0.0, 1.0, 0.5]))
        assert c[0] == 0.0 and c[1] == 2.0
        assert c[2] * math.exp(c[2]) == pytest.approx(3.0, rel=1e-14)
        assert c[3] * math.exp(0.5 * c[3]) == pytest.approx(2.0, rel=1e-14)


class TestGronwallExponent:
    def test_constant_norm(self):
        res = dg.run_monitored(State.zeros(Grid(1, 16)), SolverConfig(dt=0.1, t_end=0.3))
        assert dg.gronwall_exponent(res.trace) == 0.0

    def test_bound_is_tight(self):
        res = dg.run_monitored(smooth_1d_state(n=64), SolverConfig(dt=1e-2, t_end=0.5))
        c = dg.gronwall_exponent(res.trace)
        a = dg.trace_arrays(res.trace)
        ratio = a["sobolev_norm"] / a["sobolev_norm"][0]
        assert np.all(ratio <= np.exp(c * a["i13"]) * (1 + 1e-14))
        assert np.any(ratio > np.exp(0.99 * c * a["i13"]))


class TestSteepening:
    def test_threshold_must_exceed_one(self):
        with pytest.raises(ValueError):
            dg.detect_steepening([], 1.0)

    def test_constant_trace(self):
        assert not dg.detect_steepening(synthetic_trace([1.0] * 5, [1.0] * 5), 1.5).triggered

    def test_infinite_threshold(self):
        trace = synthetic_trace([1.0, 1e6, 1e12], [1.0, 1.0, 1.0])
        assert not dg.detect_steepening(trace, math.inf).triggered

    def test_first_crossing(self):
        alert = dg.detect_steepening(synthetic_trace([1, 4, 12, 30], [1, 1.2, 1.5, 1.5]), 10.0)
        assert alert.triggered and alert.time == pytest.approx(0.2)
        assert alert.slope_ratio == 12 and alert.amplitude_ratio == 1.5

    def test_amplitude_growth_is_not_steepening(self):
        assert not dg.detect_steepening(synthetic_trace([1, 20], [1, 2.5]), 10.0).triggered

    def test_flat_initial_data(self):
        assert not dg.detect_steepening(synthetic_trace([0.0, 5.0], [0.0, 1.0]), 2.0).triggered


class TestScan:
    def test_zero_amplitude_row(self):
        (row,) = dg.blowup_scan(small_scan_config(), [0.0], small_scan_config().solver, 10.0)
        assert row == dg.ScanRow(0.0, math.inf, 0.0, 0.0, 0.0, pytest.approx(0.2), "ok")

    def test_monotone_in_amplitude(self):
        cfg = small_scan_config()
        rows = dg.blowup_scan(cfg, [0.5, 1.0, 2.0], cfg.solver, 10.0)
        assert [r.status for r in rows] == ["ok"] * 3
        i14 = [r.final_I14 for r in rows]
        assert i14[0] < i14[1] < i14[2]

    def test_single_row_table(self):
        cfg = small_scan_config()
        buf = io.StringIO()
        dg.write_scan_csv(buf, dg.blowup_scan(cfg, [1.0], cfg.solver))
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert tuple(rows[0]) == dg.SCAN_COLUMNS and len(rows) == 2
        assert len(rows[1]) == len(dg.SCAN_COLUMNS)

    def test_empty_family(self):
        with pytest.raises(ValueError):
            dg.blowup_scan(small_scan_config(), [], SolverConfig())

    def test_solver_error_becomes_row(self):
        cfg = small_scan_config()
        rows = dg.blowup_scan(cfg, [1.0, 1e3], cfg.solver)
        assert rows[0].status == "ok"
        assert rows[1].status == "CFLViolation" and rows[1].final_time == 0.0

    def test_workers_match_serial(self):
        cfg = small_scan_config()
        amps = [0.5, 1.0, 2.0]
        assert dg.blowup_scan(cfg, amps, cfg.solver, workers=3) == dg.blowup_scan(cfg, amps, cfg.solver, workers=1)
