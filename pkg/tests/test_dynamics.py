import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mch import spectral as sp
from mch.dynamics import (
    InconsistentMomentum,
    MomentumState,
    State,
    appendix_consistency,
    compute_F1,
    compute_F2,
    energy,
    energy_spectral,
    identity_residuals,
    momentum_rhs,
    nonlocal_rhs,
)
from mch.spectral import Grid
from mch.verify import random_states, smooth_1d_state
from oracles import momentum_terms_1d, nonlocal_terms_1d

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def g1():
    return Grid(1, 256, TWO_PI)


@pytest.fixture(scope="module")
def g2():
    return Grid(2, 32, TWO_PI)


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestState:
    def test_promotes_scalar_velocity_in_1d(self, g1):
        s = State(g1, np.zeros(256), np.zeros(256))
        assert s.u.shape == (1, 256)

    def test_shape_checked(self, g2):
        with pytest.raises(ValueError):
            State(g2, np.zeros((1, 32, 32)), np.zeros((32, 32)))
        with pytest.raises(ValueError):
            State(g2, np.zeros((2, 32, 32)), np.zeros(32))

    def test_components_round_trip(self, g2):
        s = random_states(g2, 1, 0)[0]
        back = State.from_components(g2, s.components())
        assert np.array_equal(back.u, s.u) and np.array_equal(back.gamma, s.gamma)

    def test_momentum_from_state(self, g1):
        s = random_states(g1, 1, 1)[0]
        ms = MomentumState.from_state(s)
        assert np.abs(ms.m - sp.helmholtz(g1, s.u)).max() <= 1e-12 * np.abs(ms.m).max()
        assert np.abs(sp.helmholtz_inverse(g1, ms.rho) - s.gamma).max() <= 1e-12


class TestF1:
    def test_zero(self, g2):
        assert np.all(compute_F1(State.zeros(g2)) == 0.0)

    def test_cosine_velocity(self, g1):
        # u = cos x: F1 = -(1 - d^2)^-1 d_x (3/4 + cos(2x)/4) = sin(2x) / 10
        x = g1.coords[0]
        F = compute_F1(State(g1, np.cos(x), np.zeros_like(x)))[0]
        assert np.abs(F - np.sin(2 * x) / 10).max() <= 1e-12

    def test_single_mode_gamma(self, g1):
        # gamma = sin x: pressure group -(1 - d^2)^-1 d_x (-cos(2x)/2) = -sin(2x) / 5
        x = g1.coords[0]
        s = State(g1, np.zeros_like(x), np.sin(x))
        F = compute_F1(s)[0]
        assert np.abs(F + np.sin(2 * x) / 5).max() <= 1e-12
        oracle, _, _, _ = nonlocal_terms_1d(s.u[0], s.gamma, g1.period)
        assert np.abs(F - oracle).max() <= 1e-10

    def test_against_convolution_oracle(self, g1):
        for s in random_states(g1, 5, 11):
            oracle, _, _, _ = nonlocal_terms_1d(s.u[0], s.gamma, g1.period)
            assert np.abs(compute_F1(s)[0] - oracle).max() <= 1e-10

    def test_gamma_decouples(self, g2):
        s = random_states(g2, 1, 12)[0]
        whole = compute_F1(s)
        split = compute_F1(s.with_fields(s.u, np.zeros_like(s.gamma))) + compute_F1(
            s.with_fields(np.zeros_like(s.u), s.gamma))
        assert np.abs(whole - split).max() <= 1e-12 * np.abs(whole).max()


class TestF2:
    def test_zero_gamma(self, g2):
        s = random_states(g2, 1, 2)[0]
        assert np.all(compute_F2(s.with_fields(s.u, np.zeros_like(s.gamma))) == 0.0)

    def test_zero_velocity(self, g2):
        s = random_states(g2, 1, 3)[0]
        assert np.all(compute_F2(s.with_fields(np.zeros_like(s.u), s.gamma)) == 0.0)

    def test_cos_sin(self, g1):
        # -(1 - d^2)^-1 (d_x(gamma_x u_x) + gamma u_x) = 1/2 + cos(2x) / 10
        x = g1.coords[0]
        s = State(g1, np.cos(x), np.sin(x))
        F = compute_F2(s)
        assert np.abs(F - (0.5 + np.cos(2 * x) / 10)).max() <= 1e-12
        _, oracle, _, _ = nonlocal_terms_1d(s.u[0], s.gamma, g1.period)
        assert np.abs(F - oracle).max() <= 1e-10

    def test_against_convolution_oracle(self, g1):
        for s in random_states(g1, 5, 13):
            _, oracle, _, _ = nonlocal_terms_1d(s.u[0], s.gamma, g1.period)
            assert np.abs(compute_F2(s) - oracle).max() <= 1e-10


@pytest.mark.parametrize("lam", [-2.0, 0.5, 3.0])
def test_right_hand_sides_are_quadratic(g2, lam):
    s = random_states(g2, 1, 4)[0]
    scaled = s.with_fields(lam * s.u, lam * s.gamma)
    for F in (compute_F1, compute_F2):
        assert rel(F(scaled), lam**2 * F(s)) <= 1e-12


class TestNonlocalRHS:
    def test_zero(self, g2):
        du, dg = nonlocal_rhs(State.zeros(g2))
        assert np.all(du == 0.0) and np.all(dg == 0.0)

    def test_camassa_holm_reduction(self, g1):
        s = smooth_1d_state(with_gamma=False)
        du, dg = nonlocal_rhs(s)
        assert np.all(dg == 0.0)
        _, _, oracle, _ = nonlocal_terms_1d(s.u[0], s.gamma, g1.period)
        assert np.abs(du[0] - oracle).max() <= 1e-12

    def test_cosine_closed_form(self, g1):
        # -u u_x + F1 = sin(2x)/2 + sin(2x)/10
        x = g1.coords[0]
        du, _ = nonlocal_rhs(State(g1, np.cos(x), np.zeros_like(x)))
        assert np.abs(du[0] - 0.6 * np.sin(2 * x)).max() <= 1e-12

    @pytest.mark.parametrize("dim", [1, 2])
    def test_translation_equivariance(self, dim):
        g = Grid(dim, 32 if dim == 2 else 128, TWO_PI)
        s = random_states(g, 1, 5)[0]
        axes = tuple(range(-dim, 0))
        shifted = s.with_fields(np.roll(s.u, 1, axis=axes), np.roll(s.gamma, 1, axis=axes))
        du, dg = nonlocal_rhs(s)
        du2, dg2 = nonlocal_rhs(shifted)
        assert np.abs(du2 - np.roll(du, 1, axis=axes)).max() <= 1e-12 * np.abs(du).max()
        assert np.abs(dg2 - np.roll(dg, 1, axis=axes)).max() <= 1e-12 * np.abs(dg).max()


class TestMomentumRHS:
    def test_zero(self, g2):
        s = State.zeros(g2)
        dm, dr = momentum_rhs(MomentumState.from_state(s), s)
        assert np.all(dm == 0.0) and np.all(dr == 0.0)

    def test_camassa_holm_momentum(self, g1):
        s = random_states(g1, 1, 6)[0]
        s = s.with_fields(s.u, np.zeros_like(s.gamma))
        dm, dr = momentum_rhs(MomentumState.from_state(s), s)
        u = s.u[0]
        m = sp.helmholtz(g1, u)
        want = -(sp.dealiased_product(g1, u, sp.gradient(g1, m)[0])
                 + 2.0 * sp.dealiased_product(g1, sp.gradient(g1, u)[0], m))
        assert np.abs(dm[0] - want).max() <= 1e-10 * np.abs(want).max()
        assert np.all(dr == 0.0)

    def test_against_convolution_oracle(self, g1):
        for s in random_states(g1, 5, 14):
            dm, dr = momentum_rhs(MomentumState.from_state(s), s)
            om, orho = momentum_terms_1d(s.u[0], s.gamma, g1.period)
            assert np.abs(dm[0] - om).max() <= 1e-10 * np.abs(om).max()
            assert np.abs(dr - orho).max() <= 1e-10 * np.abs(orho).max()

    def test_inconsistent_pair_rejected(self, g1):
        s = random_states(g1, 1, 7)[0]
        ms = MomentumState.from_state(s)
        with pytest.raises(InconsistentMomentum):
            momentum_rhs(MomentumState(ms.m * (1 + 1e-6), ms.rho), s)
        with pytest.raises(InconsistentMomentum):
            momentum_rhs(MomentumState(ms.m, ms.rho + 1e-6), s)


class TestAppendix:
    def test_zero(self, g2):
        assert appendix_consistency(State.zeros(g2)) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_fuzzed_1d(self, seed):
        s = random_states(Grid(1, 256, 1.0), 1, seed)[0]
        assert appendix_consistency(s) <= 1e-8
        assert max(identity_residuals(s).values()) <= 1e-8

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_fuzzed_2d(self, seed):
        s = random_states(Grid(2, 64, 1.0), 1, seed)[0]
        assert appendix_consistency(s) <= 1e-8
        assert max(identity_residuals(s).values()) <= 1e-8

    def test_identity_keys(self, g2):
        keys = set(identity_residuals(random_states(g2, 1, 8)[0]))
        assert keys == {"velocity-convection", "velocity-stretching", "velocity-expansion",
                        "density-force", "density-convection", "density-expansion"}

    def test_aliased_state_is_detected(self, g1):
        # content above the two-thirds band breaks the discrete identity
        x = g1.coords[0]
        s = State(g1, np.cos(120 * x), np.zeros_like(x))
        assert appendix_consistency(s) > 1e-3


class TestEnergy:
    def test_zero(self, g2):
        assert energy(State.zeros(g2)) == 0.0

    def test_sine(self, g1):
        x = g1.coords[0]
        assert energy(State(g1, np.sin(x), np.zeros_like(x))) == pytest.approx(TWO_PI, rel=1e-14)

    @pytest.mark.parametrize("dim", [1, 2])
    def test_physical_equals_spectral(self, dim):
        g = Grid(dim, 32 if dim == 2 else 128, 3.0)
        for s in random_states(g, 3, 9):
            assert energy(s) == pytest.approx(energy_spectral(s), rel=1e-10)

    def test_translation_and_reflection(self, g1):
        s = random_states(g1, 1, 10)[0]
        h = energy(s)
        shifted = s.with_fields(np.roll(s.u, 7, axis=-1), np.roll(s.gamma, 7))
        idx = (-np.arange(g1.n)) % g1.n
        reflected = s.with_fields(-s.u[:, idx], s.gamma[idx])
        assert energy(shifted) == pytest.approx(h, rel=1e-13)
        assert energy(reflected) == pytest.approx(h, rel=1e-13)


def _rk4(f, y, dt, steps):
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_momentum_and_nonlocal_forms_evolve_alike():
    s0 = smooth_1d_state(n=128)
    g = s0.grid
    dt, steps = 1e-3, 100

    def transport_form(y):
        du, dg = nonlocal_rhs(State.from_components(g, y))
        return np.concatenate([du, dg[None]])

    def momentum(y):
        s = State.from_components(g, sp.helmholtz_inverse(g, y))
        dm, dr = momentum_rhs(MomentumState.from_state(s), s)
        return np.concatenate([dm, dr[None]])

    a = _rk4(transport_form, s0.components(), dt, steps)
    b = sp.helmholtz_inverse(g, _rk4(momentum, sp.helmholtz(g, s0.components()), dt, steps))
    assert rel(b, a) <= 1e-7
