"""Forward temporal mollification of uniformly sampled time series, with the
property suite that the energy-equality proof machinery rests on, plus the
running-integral (hat) construction used by the uniqueness argument.

A TimeSeries stands for the piecewise-linear interpolant of its samples,
extended by zero outside [t0, T]; the extension policy is part of the type,
never a parameter. All integrals here are computed exactly for that
interpolant class (segment-wise closed forms and low-order Gauss rules), so
the identity checks measure code correctness rather than quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Identity residuals are judged against scale times this factor.
IDENTITY_RTOL = 1e-12

_GAUSS2 = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


@dataclass(frozen=True)
class TimeSeries:
    """Uniform samples of a scalar or vector-valued function of time."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim not in (1, 2) or arr.shape[0] < 2:
            raise ValueError("samples must be (N,) or (N, m) with N >= 2")
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return 1 if self.samples.ndim == 1 else self.samples.shape[1]

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n_samples - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) * self.dt

    def flat(self) -> np.ndarray:
        """Samples as (N, m) regardless of scalar/vector storage."""
        if self.samples.ndim == 1:
            return self.samples[:, None]
        return self.samples

    def like(self, flat_samples: np.ndarray) -> "TimeSeries":
        """New series on the same grid, restoring scalar shape if needed."""
        if self.samples.ndim == 1:
            flat_samples = flat_samples.reshape(self.n_samples)
        return TimeSeries(self.t0, self.dt, flat_samples)


def _locate(ts: TimeSeries, t: np.ndarray):
    """Clamp to [t0, T] and return (segment index, offset within segment)."""
    tau = np.clip(t, ts.t0, ts.t_end)
    k = np.floor((tau - ts.t0) / ts.dt).astype(np.int64)
    np.clip(k, 0, ts.n_samples - 2, out=k)
    return k, tau - (ts.t0 + k * ts.dt)


def values_at(ts: TimeSeries, t) -> np.ndarray:
    """Interpolant values at arbitrary times, zero outside [t0, T].

    Returns shape t.shape + (m,).
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    f = ts.flat()
    k, s = _locate(ts, t)
    val = f[k] + (s / ts.dt)[..., None] * (f[k + 1] - f[k])
    inside = (t >= ts.t0) & (t <= ts.t_end)
    return np.where(inside[..., None], val, 0.0)


def _segment_cumulative(ts: TimeSeries) -> np.ndarray:
    """C[n] = integral of the interpolant from t0 to t_n, shape (N, m)."""
    f = ts.flat()
    seg = 0.5 * ts.dt * (f[:-1] + f[1:])
    out = np.zeros_like(f)
    np.cumsum(seg, axis=0, out=out[1:])
    return out


def cumulative_at(ts: TimeSeries, t, cum: np.ndarray | None = None) -> np.ndarray:
    """Exact running integral of the zero-extended interpolant, evaluated at
    arbitrary times; constant past T, zero before t0."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    f = ts.flat()
    if cum is None:
        cum = _segment_cumulative(ts)
    k, s = _locate(ts, t)
    slope = (f[k + 1] - f[k]) / ts.dt
    return cum[k] + s[..., None] * f[k] + (0.5 * s * s)[..., None] * slope


def steklov_mean(f: TimeSeries, lam: float) -> TimeSeries:
    """Forward moving average g(t) = (1/lam) * int_t^{t+lam} f, sampled on
    f's own grid; the integral is exact for the interpolant."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    tn = f.times
    cum = _segment_cumulative(f)
    g = (cumulative_at(f, tn + lam, cum) - cumulative_at(f, tn, cum)) / lam
    return f.like(g)


def steklov_derivative(f: TimeSeries, lam: float) -> TimeSeries:
    """Pointwise weak derivative of the Steklov mean,
    (f(t + lam) - f(t)) / lam on the zero-extended interpolant."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    tn = f.times
    d = (values_at(f, tn + lam) - values_at(f, tn)) / lam
    return f.like(d)


def hat_field(f: TimeSeries) -> TimeSeries:
    """Running integral from t0 by cumulative trapezoid; hat(t0) = 0."""
    return f.like(_segment_cumulative(f))


# ---------------------------------------------------------------------------
# Norms over the space-time cylinder (uniform unit spatial weight)
# ---------------------------------------------------------------------------

def lp_norm(ts: TimeSeries, p) -> float:
    """L^p norm of the interpolant over [t0, T], exact per segment.

    Vector samples are treated as extra quadrature points of unit weight
    (the discrete stand-in for the spatial integral).
    """
    f = ts.flat()
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(f)))
    a, b = f[:-1], f[1:]
    if p == 2:
        seg = (ts.dt / 3.0) * (a * a + a * b + b * b)
        return float(np.sqrt(np.sum(seg)))
    if p == 1:
        same = a * b >= 0.0
        den = np.abs(a) + np.abs(b)
        crossing = np.where(den > 0.0, (a * a + b * b) / np.where(den > 0.0, den, 1.0),
                            0.0)
        seg = ts.dt * np.where(same, 0.5 * den, 0.5 * crossing)
        return float(np.sum(seg))
    raise ValueError(f"p must be 1, 2 or inf, got {p}")


def check_nonexpansive(f: TimeSeries, lam: float, p) -> tuple[bool, float, float]:
    """Non-expansiveness of the mean: returns (ok, ||f_lam||_p, ||f||_p)."""
    lhs = lp_norm(steklov_mean(f, lam), p)
    rhs = lp_norm(f, p)
    return (lhs <= rhs + IDENTITY_RTOL * rhs, lhs, rhs)


# ---------------------------------------------------------------------------
# The adjoint (Fubini) identity
# ---------------------------------------------------------------------------

def _gauss_segments(breaks: np.ndarray):
    """2-point Gauss nodes and weights on each nonempty [breaks_i, breaks_i+1];
    exact for piecewise-cubic integrands."""
    a, b = breaks[:-1], breaks[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    ds = b - a
    pts = np.concatenate([a + _GAUSS2[0] * ds, a + _GAUSS2[1] * ds])
    wts = np.concatenate([0.5 * ds, 0.5 * ds])
    return pts, wts


def _support_window(alpha: TimeSeries) -> tuple[float, float]:
    """Support interval of alpha's zero-extended interpolant."""
    nz = np.nonzero(np.any(alpha.flat() != 0.0, axis=1))[0]
    if nz.size == 0:
        return (alpha.t0, alpha.t0)
    times = alpha.times
    lo = times[max(int(nz[0]) - 1, 0)]
    hi = times[min(int(nz[-1]) + 1, alpha.n_samples - 1)]
    return (float(lo), float(hi))


def check_adjoint_identity(f: TimeSeries, alpha: TimeSeries, lam: float) -> float:
    """|LHS - RHS| of the exchange identity

        (1/lam) int f(t) (int_{t-lam}^t alpha) dt  =  int f_lam(t) alpha(t) dt,

    both sides integrated exactly for the shared interpolation rule. Requires
    alpha supported in a strict subinterval and lam < T - t1.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    a_flat = alpha.flat()
    if a_flat.shape[1] != 1:
        raise ValueError("alpha must be a scalar series")
    if np.any(a_flat[0] != 0.0) or np.any(a_flat[-1] != 0.0):
        raise ValueError("alpha must vanish at the ends of its own grid")
    lo, hi = _support_window(alpha)
    if lo < 0.0:
        raise ValueError("alpha support must start after time zero")
    if lam >= f.t_end - hi:
        raise ValueError(
            f"lambda = {lam:g} must stay below T - t1 = {f.t_end - hi:g}")

    f_grid = f.times
    a_grid = alpha.times
    breaks = np.unique(np.clip(np.concatenate(
        [f_grid, a_grid, a_grid + lam, f_grid - lam]), f.t0, f.t_end))
    pts, wts = _gauss_segments(breaks)

    f_cum = _segment_cumulative(f)
    a_cum = _segment_cumulative(alpha)

    f_vals = values_at(f, pts)
    window = (cumulative_at(alpha, pts, a_cum)
              - cumulative_at(alpha, pts - lam, a_cum))[:, 0]
    lhs = np.sum(f_vals * (wts * window)[:, None], axis=0) / lam

    f_lam_pts = (cumulative_at(f, pts + lam, f_cum)
                 - cumulative_at(f, pts, f_cum)) / lam
    a_vals = values_at(alpha, pts)[:, 0]
    rhs = np.sum(f_lam_pts * (wts * a_vals)[:, None], axis=0)

    return float(np.max(np.abs(lhs - rhs)))


def check_convergence(f: TimeSeries, lam_sequence, p) -> list[float]:
    """||f_lam - f||_p for a strictly decreasing lambda sequence with floor
    >= dt; the mean is compared to f on the sample grid."""
    lams = [float(v) for v in lam_sequence]
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambda sequence must be strictly decreasing")
    if not lams or lams[-1] < f.dt:
        raise ValueError("lambda sequence must stay at or above dt")
    out = []
    for lam in lams:
        diff = steklov_mean(f, lam).flat() - f.flat()
        out.append(lp_norm(TimeSeries(f.t0, f.dt, diff), p))
    return out


# ---------------------------------------------------------------------------
# Randomized property suite (CLI self-test and acceptance backing)
# ---------------------------------------------------------------------------

def selftest(trials: int = 200, seed: int = 20250) -> dict:
    """Randomized trials of the mollifier property suite.

    Returns a flat report dict with one numeric field per property and
    pass/fail booleans.
    """
    rng = np.random.default_rng(seed)
    tiny = np.finfo(np.float64).tiny

    worst_expansion = 0.0
    for _ in range(trials):
        n = int(rng.integers(17, 129))
        dt = float(rng.uniform(0.005, 0.05))
        ts = TimeSeries(0.0, dt, rng.standard_normal(n))
        lam = float(rng.uniform(0.1, 8.0)) * dt
        p = (1, 2, np.inf)[int(rng.integers(3))]
        ok, lhs, rhs = check_nonexpansive(ts, lam, p)
        worst_expansion = max(worst_expansion, (lhs - rhs) / (rhs + tiny))
    nonexpansive_ok = worst_expansion <= IDENTITY_RTOL

    # Weak-derivative identity against the zero-extended closed form of an
    # affine profile (interpolation is exact there).
    worst_deriv = 0.0
    for _ in range(trials):
        n = int(rng.integers(17, 129))
        dt = float(rng.uniform(0.005, 0.05))
        a, b = rng.standard_normal(2)
        tgrid = np.arange(n) * dt
        ts = TimeSeries(0.0, dt, a + b * tgrid)
        lam = float(rng.uniform(0.3, 6.0)) * dt
        t_end = tgrid[-1]

        def closed(t):
            return np.where((t >= 0.0) & (t <= t_end), a + b * t, 0.0)

        expected = (closed(tgrid + lam) - closed(tgrid)) / lam
        got = steklov_derivative(ts, lam).samples
        scale = max(abs(a) + abs(b) * t_end, 1.0) / lam
        worst_deriv = max(worst_deriv, float(np.max(np.abs(got - expected))) / scale)
    derivative_ok = worst_deriv <= 1e-12

    worst_adjoint = 0.0
    for _ in range(trials):
        n = int(rng.integers(33, 129))
        dt = float(rng.uniform(0.005, 0.05))
        f = TimeSeries(0.0, dt, rng.standard_normal(n))
        alpha_vals = np.zeros(n)
        pad = int(rng.integers(2, max(3, n // 4)))
        alpha_vals[pad:n - pad] = rng.standard_normal(n - 2 * pad)
        alpha = TimeSeries(0.0, dt, alpha_vals)
        _, hi = _support_window(alpha)
        max_lam = f.t_end - hi
        if max_lam <= 0.0:
            continue
        lam = float(rng.uniform(0.05, 0.95)) * max_lam
        res = check_adjoint_identity(f, alpha, lam)
        scale = lp_norm(f, 2) * lp_norm(alpha, 2) + tiny
        worst_adjoint = max(worst_adjoint, res / scale)
    adjoint_ok = worst_adjoint <= IDENTITY_RTOL

    # Convergence of the mean on a smooth profile.
    n = 257
    t_end = 1.0
    dt = t_end / (n - 1)
    tgrid = np.arange(n) * dt
    smooth = TimeSeries(0.0, dt, np.sin(2.0 * np.pi * tgrid / t_end))
    lams = []
    lam = t_end / 4.0
    while lam >= dt:
        lams.append(lam)
        lam *= 0.5
    norms = check_convergence(smooth, lams, 2)
    monotone = all(b <= a * (1.0 + IDENTITY_RTOL) for a, b in zip(norms, norms[1:]))
    convergence_ok = monotone and norms[-1] <= 0.1 * norms[0]

    return {
        "trials": trials,
        "nonexpansive_worst_excess": worst_expansion,
        "nonexpansive_ok": bool(nonexpansive_ok),
        "derivative_worst_residual": worst_deriv,
        "derivative_ok": bool(derivative_ok),
        "adjoint_worst_residual": worst_adjoint,
        "adjoint_ok": bool(adjoint_ok),
        "convergence_initial_norm": norms[0],
        "convergence_final_norm": norms[-1],
        "convergence_ok": bool(convergence_ok),
        "all_ok": bool(nonexpansive_ok and derivative_ok and adjoint_ok
                       and convergence_ok),
    }
