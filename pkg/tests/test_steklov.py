import numpy as np
import pytest

from poynting.steklov import (TimeSeries, check_adjoint_identity,
                              check_convergence, check_nonexpansive,
                              hat_field, lp_norm, selftest, steklov_derivative,
                              steklov_mean, values_at)

from _oracles import fine_grid_steklov_oracle


def series(values, dt=0.01, t0=0.0):
    return TimeSeries(t0, dt, np.asarray(values, dtype=np.float64))


def linear_series(a, b, n=65, dt=1.0 / 64):
    t = np.arange(n) * dt
    return TimeSeries(0.0, dt, a + b * t)


class TestSteklovMean:
    def test_constant_mean_away_from_tail(self):
        ts = series(np.full(101, 3.5))
        lam = 0.073
        out = steklov_mean(ts, lam)
        keep = ts.times <= ts.t_end - lam + 1e-12
        np.testing.assert_allclose(out.samples[keep], 3.5, rtol=1e-13)

    def test_linear_closed_form(self):
        # mean of f(t) = t over [t, t+lam] is t + lam/2
        ts = linear_series(0.0, 1.0)
        lam = 0.21875  # 14 dt
        out = steklov_mean(ts, lam)
        keep = ts.times <= ts.t_end - lam + 1e-12
        np.testing.assert_allclose(out.samples[keep],
                                   ts.times[keep] + 0.5 * lam, atol=1e-14)

    def test_fractional_lambda_vs_fine_grid_oracle(self, rng):
        dt = 1.0 / 64
        vals = rng.standard_normal(65)
        ts = TimeSeries(0.0, dt, vals)
        expected, lam = fine_grid_steklov_oracle(vals, dt, lam_subcells=237)
        got = steklov_mean(ts, lam).samples
        scale = np.abs(vals).max()
        assert np.max(np.abs(got - expected)) <= 1e-12 * scale

    def test_tail_decay_of_constant(self):
        # beyond T - lam the window runs into the zero extension
        ts = series(np.ones(11), dt=0.1)
        lam = 0.3
        out = steklov_mean(ts, lam)
        t = ts.times
        expected = np.minimum(1.0, np.maximum(0.0, (ts.t_end - t) / lam))
        np.testing.assert_allclose(out.samples, expected, atol=1e-14)

    def test_rejects_bad_lambda(self):
        ts = series(np.ones(5))
        with pytest.raises(ValueError):
            steklov_mean(ts, 0.0)

    def test_linearity(self, rng):
        dt = 0.02
        a = rng.standard_normal(40)
        b = rng.standard_normal(40)
        lam = 0.137
        lhs = steklov_mean(TimeSeries(0.0, dt, 2.0 * a - 3.0 * b), lam).samples
        rhs = (2.0 * steklov_mean(TimeSeries(0.0, dt, a), lam).samples
               - 3.0 * steklov_mean(TimeSeries(0.0, dt, b), lam).samples)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_vector_series_commutes_with_components(self, rng):
        # smoothing a snapshot matrix equals smoothing each column
        vals = rng.standard_normal((30, 4))
        ts = TimeSeries(0.0, 0.05, vals)
        lam = 0.22
        whole = steklov_mean(ts, lam).samples
        for c in range(4):
            col = steklov_mean(TimeSeries(0.0, 0.05, vals[:, c]), lam).samples
            np.testing.assert_allclose(whole[:, c], col, atol=1e-14)


class TestSteklovDerivative:
    def test_constant_is_flat_then_ramps_down(self):
        ts = series(np.full(101, 2.0))
        lam = 0.2
        out = steklov_derivative(ts, lam)
        interior = ts.times < ts.t_end - lam - 1e-9
        np.testing.assert_allclose(out.samples[interior], 0.0, atol=1e-13)

    def test_linear_slope(self):
        ts = linear_series(0.3, 1.7)
        lam = 0.25
        out = steklov_derivative(ts, lam)
        keep = ts.times <= ts.t_end - lam + 1e-12
        np.testing.assert_allclose(out.samples[keep], 1.7, atol=1e-12)

    def test_zero_extended_closed_form(self, rng):
        a, b = 0.4, -1.3
        ts = linear_series(a, b)
        lam = 0.3017
        t = ts.times

        def closed(x):
            return np.where((x >= 0.0) & (x <= ts.t_end), a + b * x, 0.0)

        expected = (closed(t + lam) - closed(t)) / lam
        got = steklov_derivative(ts, lam).samples
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_matches_centered_difference_of_mean(self, rng):
        # interior check on a smooth profile
        dt = 1.0 / 256
        t = np.arange(257) * dt
        ts = TimeSeries(0.0, dt, np.sin(2 * np.pi * t))
        lam = 32 * dt
        mean = steklov_mean(ts, lam).samples
        deriv = steklov_derivative(ts, lam).samples
        centered = (mean[2:] - mean[:-2]) / (2 * dt)
        interior = slice(10, 140)
        err = np.abs(deriv[1:-1][interior] - centered[interior]).max()
        assert err <= 10.0 * dt**2 * (2 * np.pi) ** 3


class TestNorms:
    def test_l2_exact_on_linear_pieces(self):
        ts = series([0.0, 1.0], dt=1.0)
        # int_0^1 t^2 dt = 1/3
        assert lp_norm(ts, 2) == pytest.approx(np.sqrt(1.0 / 3.0), rel=1e-14)

    def test_l1_with_sign_change(self):
        ts = series([-1.0, 1.0], dt=1.0)
        # two triangles of area 1/4
        assert lp_norm(ts, 1) == pytest.approx(0.5, rel=1e-14)

    def test_linf(self, rng):
        vals = rng.standard_normal(31)
        assert lp_norm(series(vals), np.inf) == np.abs(vals).max()


class TestNonexpansive:
    def test_constant_equality_up_to_tail(self):
        ts = series(np.ones(101))
        ok, lhs, rhs = check_nonexpansive(ts, 0.05, 2)
        assert ok and lhs < rhs

    def test_spike_strictly_contracts(self):
        vals = np.zeros(41)
        vals[20] = 1.0
        ok, lhs, rhs = check_nonexpansive(series(vals), 0.05, 2)
        assert ok and lhs < 0.9 * rhs

    def test_randomized_trials(self, rng):
        for _ in range(200):
            n = int(rng.integers(17, 96))
            ts = TimeSeries(0.0, float(rng.uniform(0.01, 0.05)),
                            rng.standard_normal(n))
            lam = float(rng.uniform(0.2, 6.0)) * ts.dt
            p = (1, 2, np.inf)[int(rng.integers(3))]
            ok, lhs, rhs = check_nonexpansive(ts, lam, p)
            assert ok, (lhs, rhs, p)


class TestAdjointIdentity:
    def _bump(self, n, pad, rng=None, dt=0.01):
        vals = np.zeros(n)
        if rng is None:
            vals[pad:n - pad] = 1.0
        else:
            vals[pad:n - pad] = rng.standard_normal(n - 2 * pad)
        return TimeSeries(0.0, dt, vals)

    def test_zero_f(self):
        f = series(np.zeros(64))
        alpha = self._bump(64, 8)
        assert check_adjoint_identity(f, alpha, 0.05) == 0.0

    def test_constant_f_compact_bump(self):
        f = series(np.ones(64))
        alpha = self._bump(64, 8)
        res = check_adjoint_identity(f, alpha, 0.042)
        assert res <= 1e-12 * lp_norm(f, 2) * lp_norm(alpha, 2)

    def test_randomized_trials(self, rng):
        for _ in range(200):
            n = int(rng.integers(33, 100))
            dt = float(rng.uniform(0.005, 0.02))
            f = TimeSeries(0.0, dt, rng.standard_normal(n))
            pad = int(rng.integers(2, n // 4))
            alpha = self._bump(n, pad, rng, dt)
            hi = alpha.times[np.nonzero(alpha.samples)[0][-1] + 1]
            max_lam = f.t_end - hi
            lam = float(rng.uniform(0.05, 0.95)) * max_lam
            res = check_adjoint_identity(f, alpha, lam)
            scale = lp_norm(f, 2) * lp_norm(alpha, 2)
            assert res <= 1e-12 * scale

    def test_lambda_window_precondition(self):
        f = series(np.ones(64))
        alpha = self._bump(64, 4)
        t1 = alpha.times[-4]
        with pytest.raises(ValueError):
            check_adjoint_identity(f, alpha, f.t_end - t1 + 0.01)

    def test_noncompact_alpha_rejected(self):
        f = series(np.ones(32))
        alpha = series(np.ones(32))
        with pytest.raises(ValueError):
            check_adjoint_identity(f, alpha, 0.01)


class TestConvergence:
    def test_smooth_profile_decreases_linearly(self):
        n = 257
        dt = 1.0 / (n - 1)
        t = np.arange(n) * dt
        ts = TimeSeries(0.0, dt, np.sin(2 * np.pi * t))
        lams = [0.25, 0.125, 0.0625, 0.03125]
        norms = check_convergence(ts, lams, 2)
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
        # smoothing error is about linear in the window width
        assert norms[-1] <= 0.2 * norms[0]

    def test_random_series_final_below_initial(self, rng):
        ts = TimeSeries(0.0, 0.01, rng.standard_normal(128))
        norms = check_convergence(ts, [0.32, 0.16, 0.08, 0.04, 0.01], 2)
        assert norms[-1] < norms[0]

    def test_constant_series_norms_are_the_truncation_tail(self):
        # the mean of a constant differs from it only on the final window,
        # whose mass shrinks with the window width
        ts = series(np.ones(101))
        lams = [0.4, 0.2, 0.1, 0.05]
        norms = check_convergence(ts, lams, 2)
        # tail ramp of width lam: ||f_lam - f||_2^2 = lam / 3
        for lam, val in zip(lams, norms):
            assert val == pytest.approx(np.sqrt(lam / 3.0), rel=1e-12)
        assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_rejects_nondecreasing_sequence(self):
        ts = series(np.ones(16))
        with pytest.raises(ValueError):
            check_convergence(ts, [0.1, 0.1], 2)

    def test_rejects_floor_below_dt(self):
        ts = series(np.ones(16), dt=0.01)
        with pytest.raises(ValueError):
            check_convergence(ts, [0.1, 0.001], 2)


class TestHatField:
    def test_constant_integrates_linearly(self):
        ts = series(np.full(11, 2.0), dt=0.1)
        out = hat_field(ts)
        np.testing.assert_allclose(out.samples, 2.0 * ts.times, atol=1e-14)
        assert out.samples[0] == 0.0

    def test_linear_exact_at_samples(self):
        ts = linear_series(0.0, 1.0)
        out = hat_field(ts)
        np.testing.assert_allclose(out.samples, 0.5 * ts.times**2, atol=1e-14)

    def test_centered_difference_recovers_samples(self, rng):
        dt = 1.0 / 128
        t = np.arange(129) * dt
        ts = TimeSeries(0.0, dt, np.cos(3 * t))
        hat = hat_field(ts).samples
        centered = (hat[2:] - hat[:-2]) / (2 * dt)
        assert np.abs(centered - ts.samples[1:-1]).max() <= 5.0 * dt**2 * 27


class TestInterpolantEvaluation:
    def test_values_outside_are_zero(self):
        ts = series([1.0, 2.0, 3.0], dt=0.5)
        vals = values_at(ts, np.array([-0.1, 0.0, 1.0, 1.6]))[:, 0]
        np.testing.assert_allclose(vals, [0.0, 1.0, 3.0, 0.0], atol=1e-15)

    def test_selftest_passes(self):
        rep = selftest(trials=60, seed=3)
        assert rep["all_ok"]
