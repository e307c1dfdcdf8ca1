"""Diagnostics against brute-force, adaptive-quadrature, and ODE oracles."""

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from stokeswave.diagnostics import (
    LOG4,
    LagrangianTracker,
    WeightedTracker,
    analyticity_strip,
    fit_decay,
    functional_J,
    functional_J_quartic,
    functional_L,
    holder_constant,
    riccati_blowup_time,
    riccati_comparison,
    riccati_residual,
    symmetry_defect,
    track_min_slope,
)
from stokeswave.spectral import Grid1D, PeriodicField, band_limited


def field(n, fn):
    return PeriodicField.from_function(Grid1D(n), fn)


class TestMinSlope:
    def test_sine(self):
        m, x = track_min_slope(field(128, np.sin))
        assert abs(m + 1.0) < 1e-12
        assert min(abs(x - np.pi), abs(x + np.pi)) < 1e-6

    def test_scaling(self):
        for amp in (2.0, 10.0):
            m, _ = track_min_slope(field(128, lambda a: amp * np.sin(a)))
            assert abs(m + amp) < 1e-11

    def test_two_mode_vs_dense_oracle(self):
        u = field(128, lambda a: np.sin(a) + 0.1 * np.sin(2 * a))
        m, _ = track_min_slope(u)
        # oracle: derivative evaluated on a 64x finer grid
        fine = -np.pi + 2 * np.pi * np.arange(64 * 128) / (64 * 128)
        deriv = np.cos(fine) + 0.2 * np.cos(2 * fine)
        # polish the dense minimum with a few scalar Newton steps
        x = fine[np.argmin(deriv)]
        for _ in range(40):
            g1 = -np.sin(x) - 0.4 * np.sin(2 * x)
            g2 = -np.cos(x) - 0.8 * np.cos(2 * x)
            x -= g1 / g2
        oracle = np.cos(x) + 0.2 * np.cos(2 * x)
        assert abs(m - oracle) <= 1e-10


class TestRiccati:
    def test_sine_residual(self):
        # m = -1 at x = pi; Lambda^{-1}(cos) = cos evaluated there is -1
        res = riccati_residual(field(128, np.sin))
        assert abs(res - (LOG4 - 1.0)) < 1e-10

    def test_constant_residual(self):
        res = riccati_residual(field(64, lambda a: np.full_like(a, 2.0)))
        assert abs(res) < 1e-13

    def test_nonnegative_on_random_fields(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            u = band_limited(Grid1D(256), 40, rng, decay=1.5)
            assert riccati_residual(u) >= -1e-9

    def test_comparison_closed_form_vs_ode(self):
        # oracle: numerical integration of m' = -m^2 - log(4) m
        for m0 in (-10.0, -1.0, 0.5):
            tmax = 0.09 if m0 < -LOG4 else 2.0
            sol = solve_ivp(lambda t, m: -m**2 - LOG4 * m, (0, tmax), [m0],
                            rtol=1e-11, atol=1e-12, dense_output=True)
            ts = np.linspace(0, tmax, 7)
            got = riccati_comparison(m0, ts)
            assert np.max(np.abs(got - sol.sol(ts)[0])) < 1e-6

    def test_blowup_time(self):
        t_star = riccati_blowup_time(-10.0)
        r0 = -10.0 / (-10.0 + LOG4)
        assert abs(t_star - np.log(r0) / LOG4) < 1e-15
        # the closed form diverges exactly there
        assert riccati_comparison(-10.0, t_star - 1e-9) < -1e7
        assert riccati_comparison(-10.0, t_star + 1e-9) == -np.inf
        assert riccati_blowup_time(-1.0) is None
        assert riccati_blowup_time(-LOG4) is None


class TestFunctionalL:
    def test_even_data_vanishes(self):
        # W(x) - W(0) even in x against the odd weight
        tracker = LagrangianTracker(delta=0.25)
        u = field(128, np.cos)
        val = functional_L(u, tracker)
        # oracle: adaptive quadrature of the displayed integrand
        def integrand(x):
            w = np.cos(x) ** 2
            w0 = 1.0
            return (w0 - w) * (abs(x) ** -0.25 - 1.0) * np.sign(x)
        ref = quad(integrand, -1, 1, points=[0.0], limit=200)[0]
        assert abs(ref) < 1e-10
        assert abs(val) < 1e-10

    def test_zero(self):
        tracker = LagrangianTracker(delta=0.3)
        assert functional_L(PeriodicField.zero(Grid1D(64)), tracker) == 0.0

    def test_generic_vs_adaptive_oracle(self):
        tracker = LagrangianTracker(delta=0.3)
        tracker.y = 0.4
        u = field(256, lambda a: np.sin(a) + 0.3 * np.cos(2 * a))

        def w(x):
            v = np.sin(x + 0.4) + 0.3 * np.cos(2 * (x + 0.4))
            return v * v

        def integrand(x):
            return (w(0.0) - w(x)) * (abs(x) ** -0.3 - 1.0) * np.sign(x)

        ref = quad(integrand, -1, 1, points=[0.0], limit=400)[0]
        assert abs(functional_L(u, tracker) - ref) < 1e-8

    def test_delta_validation(self):
        with pytest.raises(ValueError):
            LagrangianTracker(delta=0.5)


class TestFunctionalJ:
    def test_sine_vs_adaptive_oracle(self):
        u = field(256, np.sin)
        got = functional_J(u, 0.25)
        ref = quad(lambda x: np.sin(x) ** 2 / x ** 1.25, 0, np.pi, limit=400)[0]
        assert abs(got - ref) <= 1e-8

    def test_zero(self):
        assert functional_J(PeriodicField.zero(Grid1D(64)), 0.25) == 0.0

    def test_non_odd_refused(self):
        with pytest.raises(ValueError):
            functional_J(field(64, np.cos), 0.25)
        with pytest.raises(ValueError):
            functional_J(field(64, np.sin), 0.7)

    def test_holder_lower_bound(self):
        rng = np.random.default_rng(31)
        delta = 0.3
        c = holder_constant(delta)
        for _ in range(20):
            amps = rng.standard_normal(5)
            u = field(256, lambda a, am=amps: sum(
                am[k] * np.sin((k + 1) * a) for k in range(5)))
            j2 = functional_J(u, delta)
            j4 = functional_J_quartic(u, delta)
            assert j4 >= c * j2**2 * (1.0 - 1e-10)

    def test_weight_monotonicity_with_correction(self):
        rng = np.random.default_rng(32)
        d_small, d_big = 0.15, 0.35
        for _ in range(10):
            amps = rng.standard_normal(4)
            u = field(256, lambda a, am=amps: sum(
                am[k] * np.sin((k + 1) * a) for k in range(4)))
            j_small = functional_J(u, d_small)
            j_big = functional_J(u, d_big)
            # on x > 1 the smaller-delta weight is larger; bound that part
            corr = quad(lambda x: u.evaluate(x)[0] ** 2
                        * (x ** -(1 + d_small) - x ** -(1 + d_big)), 1.0, np.pi,
                        limit=200)[0]
            assert j_small <= j_big + corr + 1e-10


class TestFitDecay:
    def test_synthetic_power_law(self):
        t = np.linspace(0, 100, 400)
        v = (1 + t) ** -2.25
        assert abs(fit_decay(t, v, (0, 100)) + 2.25) <= 1e-6

    def test_exponential_is_steeper(self):
        t = np.linspace(0, 100, 400)
        v = np.exp(-t)
        assert fit_decay(t, v, (10, 100)) < -20.0

    def test_constant(self):
        t = np.linspace(0, 10, 50)
        assert abs(fit_decay(t, np.ones_like(t), (0, 10))) < 1e-14

    def test_nonpositive_refused(self):
        t = np.linspace(0, 10, 50)
        v = np.ones_like(t)
        v[10] = 0.0
        with pytest.raises(ValueError):
            fit_decay(t, v, (0, 10))


class TestAnalyticityStrip:
    def _field_from_spectrum(self, n, amp):
        g = Grid1D(n)
        c = np.zeros(n, dtype=complex)
        for k in range(1, n // 2):
            c[k] = amp(k) / 2.0
            c[-k] = amp(k) / 2.0
        return PeriodicField.from_coefficients(g, c)

    def test_exponential_spectrum(self):
        # n = 64 keeps the whole fitting band above the round-off floor
        u = self._field_from_spectrum(64, lambda k: np.exp(-k))
        assert abs(analyticity_strip(u) - 1.0) <= 1e-3

    def test_power_law_spectrum(self):
        u = self._field_from_spectrum(128, lambda k: k**-4.0)
        assert abs(analyticity_strip(u)) <= 1e-3

    def test_noise_floor_refused(self):
        u = self._field_from_spectrum(128, lambda k: np.exp(-30.0 * k))
        with pytest.raises(ValueError):
            analyticity_strip(u)


class TestSymmetryDefect:
    def test_examples(self):
        assert symmetry_defect(field(64, np.sin), "odd") < 1e-15
        assert abs(symmetry_defect(field(64, np.cos), "odd") - 1.0) < 1e-14
        assert symmetry_defect(field(64, np.cos), "even") < 1e-15
        with pytest.raises(ValueError):
            symmetry_defect(field(64, np.sin), "both")


class TestTrackers:
    def test_lagrangian_trajectory_order(self):
        # frozen field: y' = u^2(y) integrates to a known ODE solution
        u = field(128, lambda a: np.full_like(a, 0.7))
        tracker = LagrangianTracker(delta=0.25)
        dt = 0.01
        for _ in range(100):
            tracker.advance(dt, u, u)
        assert abs(tracker.y - 0.49) < 1e-12

    def test_weighted_tracker_history(self):
        tracker = WeightedTracker(delta=0.25)
        u = field(128, np.sin)
        v = tracker.record(0.0, u)
        assert tracker.history == [(0.0, v)]
