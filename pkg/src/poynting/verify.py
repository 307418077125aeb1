"""Certification of the weak-solution machinery on solver traces: the
integral identity satisfied by weak solutions, the temporally mollified
semi-discrete identities and the scalar energy-rate identity they imply, the
zero-data uniqueness mechanism with its hat-field energy bound and Gronwall
envelope, and the divergence/charge bookkeeping diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import energy
from .errors import ContractViolationError, HypothesisViolationError
from .materials import (CurrentSpec, MaterialSet, SampledMaterials,
                        sample_on_faces)
from .materials import validate as validate_materials
from .mesh import (EdgeField, FaceField, Grid, apply_pec_mask, build_grid,
                   cell_divergence, curl_e, curl_h, is_pec_conforming,
                   nodal_divergence, pack, satisfies_v0_criterion, unpack_edge,
                   unpack_face, _dot, deterministic_reductions)
from .steklov import TimeSeries, hat_field, steklov_derivative, steklov_mean
from .stepper import FieldState, StepperConfig, TraceArrays, simulate

SCALE_FLOOR = 1e-30

# Interior window for the mollified checks, as fractions of the run length;
# respects the support constraints of the regularized identities.
STEKLOV_WINDOW = (0.1, 0.8)

# Any uniform snapshot stride works for the audits; they assume nothing
# finer than the trace they are given.
MIN_SNAPSHOT_STRIDE = 1


def suggest_lambda(t_end: float, sample_dt: float) -> float:
    """Default mollification width: eight samples, capped so the interior
    window constraint lam < T - t1 always admits it."""
    cap = max(1, int(np.floor(0.15 * t_end / sample_dt)))
    return min(8, cap) * sample_dt


def _rows_dot(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-by-row dot products, honoring the deterministic reduction mode."""
    if deterministic_reductions():
        return np.array([_dot(r, vec) for r in rows])
    return rows @ vec


# ---------------------------------------------------------------------------
# Solver traces
# ---------------------------------------------------------------------------

@dataclass
class SolutionTrace:
    """Uniformly sampled packed snapshots of one run (h time-centered)."""

    grid: Grid
    materials: MaterialSet
    dt: float
    times: np.ndarray
    e: np.ndarray
    h: np.ndarray
    j: np.ndarray
    scheme: str = "midpoint"
    stride: int = 1

    def __post_init__(self):
        s = len(self.times)
        if not (self.e.shape[0] == self.h.shape[0] == self.j.shape[0] == s):
            raise ContractViolationError(
                "trace snapshot counts are inconsistent with the time axis")
        masked = _masked_edge_indices(self.grid)
        if self.e.size and np.any(self.e[:, masked] != 0.0):
            raise ContractViolationError(
                "trace holds non-PEC-conforming electric snapshots")

    @property
    def sample_dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_sim(cls, g: Grid, m: MaterialSet, arrays: TraceArrays,
                 scheme: str) -> "SolutionTrace":
        return cls(grid=g, materials=m, dt=arrays.dt, times=arrays.times,
                   e=arrays.e, h=arrays.h, j=arrays.j, scheme=scheme,
                   stride=arrays.stride)

    def save(self, path: str) -> None:
        """Write the trace file (NumPy .npz archive, documented keys)."""
        m = self.materials
        np.savez_compressed(
            path, format_version=1, scheme=self.scheme, dt=self.dt,
            stride=self.stride, n=np.asarray(self.grid.n),
            extent=np.asarray(self.grid.extent), eps=m.eps, mu=m.mu,
            sigma=m.sigma, j1_preset=m.j1.preset,
            j1_amplitude=np.asarray(m.j1.amplitude),
            j1_t_center=m.j1.t_center, j1_tau=m.j1.tau, j1_freq=m.j1.freq,
            times=self.times, e=self.e, h=self.h, j=self.j)

    @classmethod
    def load(cls, path: str) -> "SolutionTrace":
        with np.load(path, allow_pickle=False) as z:
            g = build_grid(tuple(int(v) for v in z["n"]),
                           tuple(float(v) for v in z["extent"]))
            j1 = CurrentSpec(preset=str(z["j1_preset"]),
                             amplitude=tuple(float(v) for v in z["j1_amplitude"]),
                             t_center=float(z["j1_t_center"]),
                             tau=float(z["j1_tau"]), freq=float(z["j1_freq"]))
            m = MaterialSet(eps=z["eps"], mu=z["mu"], sigma=z["sigma"], j1=j1)
            return cls(grid=g, materials=m, dt=float(z["dt"]),
                       times=z["times"], e=z["e"], h=z["h"], j=z["j"],
                       scheme=str(z["scheme"]), stride=int(z["stride"]))


def _masked_edge_indices(g: Grid) -> np.ndarray:
    probe = EdgeField(*(np.ones(s) for s in g.edge_shapes))
    apply_pec_mask(probe)
    return np.nonzero(pack(probe) == 0.0)[0]


# ---------------------------------------------------------------------------
# Separable test pairs
# ---------------------------------------------------------------------------

class TimeProfile:
    """Smooth temporal weight with closed-form derivative; zero at the final
    time by construction."""

    def __init__(self, name: str, t_end: float):
        if name not in ("linear", "cos2", "bump"):
            raise ContractViolationError(f"unknown time profile '{name}'")
        self.name = name
        self.t_end = float(t_end)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        T = self.t_end
        if self.name == "linear":
            val = 1.0 - t / T
        elif self.name == "cos2":
            val = np.cos(0.5 * np.pi * t / T) ** 2
        else:
            val = self._bump(t)
        return np.where(t >= T, 0.0, val)

    def deriv(self, t):
        # One-sided at t_end: the profile lives on [0, t_end].
        t = np.asarray(t, dtype=np.float64)
        T = self.t_end
        if self.name == "linear":
            val = np.full_like(t, -1.0 / T)
        elif self.name == "cos2":
            val = -(0.5 * np.pi / T) * np.sin(np.pi * t / T)
        else:
            val = self._bump(t, derivative=True)
        return np.where(t > T, 0.0, val)

    def _bump(self, t, derivative: bool = False):
        # Compactly supported on [0.1 T, 0.9 T].
        T = self.t_end
        s = (t - 0.5 * T) / (0.4 * T)
        inside = np.abs(s) < 1.0
        s = np.where(inside, s, 0.0)
        q = 1.0 - s * s
        val = np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, q, 1.0)), 0.0)
        if not derivative:
            return val
        return np.where(inside, val * (-2.0 * s / (q * q)) / (0.4 * T), 0.0)


@dataclass
class TestPair:
    __test__ = False  # not a pytest collectable

    phi: EdgeField
    psi: FaceField
    zeta: TimeProfile


@dataclass
class TestFunctionBank:
    __test__ = False  # not a pytest collectable

    pairs: list[TestPair] = field(default_factory=list)

    @classmethod
    def build(cls, g: Grid, t_end: float, size: int = 5,
              seed: int = 0) -> "TestFunctionBank":
        """Random separable test pairs.

        Spatial factors are seeded random combinations of the lowest interior
        sine modes, so the same seed produces samples of the same smooth
        fields at every resolution; temporal factors cycle the three profile
        shapes. Electric factors are masked, hence conforming by construction.
        """
        rng = np.random.default_rng(seed)
        profiles = ("linear", "cos2", "bump")
        pairs = []
        for idx in range(size):
            phi = _random_mode_field(EdgeField, g, rng)
            psi = _random_mode_field(FaceField, g, rng)
            apply_pec_mask(phi)
            pairs.append(TestPair(phi=phi, psi=psi,
                                  zeta=TimeProfile(profiles[idx % 3], t_end)))
        return cls(pairs=pairs)


_MODES = (1, 2)


def _random_mode_field(cls, g: Grid, rng: np.random.Generator):
    coeffs = rng.standard_normal((3, len(_MODES), len(_MODES), len(_MODES)))
    out = cls.zeros(g)
    for comp, arr in enumerate(out.components):
        coords = (g.edge_coords(comp) if cls is EdgeField
                  else g.face_coords(comp))
        acc = np.zeros(arr.shape)
        for a, ma in enumerate(_MODES):
            sa = np.sin(np.pi * ma * coords[0] / g.extent[0])
            for b, mb in enumerate(_MODES):
                sb = np.sin(np.pi * mb * coords[1] / g.extent[1])
                for c, mc in enumerate(_MODES):
                    sc = np.sin(np.pi * mc * coords[2] / g.extent[2])
                    acc += (coeffs[comp, a, b, c]
                            * sa[:, None, None] * sb[None, :, None]
                            * sc[None, None, :])
        arr[...] = acc
    return out


# ---------------------------------------------------------------------------
# Weak-form residual
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeakformResidual:
    value: float    # raw / scale
    raw: float
    scale: float
    profile: str


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    dt = times[1] - times[0]
    w = np.full(len(times), dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def weakform_residual(tr: SolutionTrace, bank: TestFunctionBank
                      ) -> list[WeakformResidual]:
    """Defect of the space-time integral identity for each test pair.

    Both sides are assembled with trapezoid time quadrature and the discrete
    inner products; for a second-order trace the scaled defect shrinks by
    about four under simultaneous halving of dt and the mesh width.
    """
    g, m = tr.grid, tr.materials
    sm = SampledMaterials.build(m, g)
    times = tr.times
    w = _trapezoid_weights(times)
    dv = g.dv
    out = []
    for pair in bank.pairs:
        if float(pair.zeta(times[-1])) != 0.0:
            raise ContractViolationError(
                "test pair rejected: temporal profile does not vanish at the "
                "final time")
        if not is_pec_conforming(pair.phi):
            raise ContractViolationError(
                "test pair rejected: electric factor is not PEC-conforming")
        if not satisfies_v0_criterion(pair.phi, pair.psi, g):
            raise ContractViolationError(
                "test pair rejected: electric factor fails the adjointness "
                "membership criterion")

        eps_phi = pack(sm.eps_edge * pair.phi)
        mu_psi = pack(sm.mu_face * pair.psi)
        curl_phi = pack(curl_e(pair.phi, g))
        curl_psi = pack(curl_h(pair.psi, g))
        phi_vec = pack(pair.phi)

        a_time = dv * (_rows_dot(tr.e, eps_phi) + _rows_dot(tr.h, mu_psi))
        a_curl = dv * (-_rows_dot(tr.h, curl_phi) + _rows_dot(tr.e, curl_psi))
        a_j = dv * _rows_dot(tr.j, phi_vec)

        zeta = pair.zeta(times)
        dzeta = pair.zeta.deriv(times)
        z0 = float(pair.zeta(times[0]))

        raw = (-np.sum(w * dzeta * a_time)
               + np.sum(w * zeta * a_curl)
               + np.sum(w * zeta * a_j)
               - a_time[0] * z0)
        scale = (np.sum(w * np.abs(dzeta) * np.abs(a_time))
                 + np.sum(w * np.abs(zeta) * np.abs(a_curl))
                 + np.sum(w * np.abs(zeta) * np.abs(a_j))
                 + abs(a_time[0] * z0) + SCALE_FLOOR)
        out.append(WeakformResidual(value=float(raw / scale), raw=float(raw),
                                    scale=float(scale), profile=pair.zeta.name))
    return out


# ---------------------------------------------------------------------------
# Steklov-regularized semi-discrete identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemidiscreteResult:
    r_e: float
    r_h: float
    r_energy: float
    lam: float
    n_window: int


def semidiscrete_rows(tr: SolutionTrace, lam: float, phi: EdgeField,
                      psi: FaceField,
                      window: tuple[float, float] = STEKLOV_WINDOW):
    """Scaled residual time series of the mollified identities on the
    interior window: (times, r_e, r_h, r_energy)."""
    g, m = tr.grid, tr.materials
    sm = SampledMaterials.build(m, g)
    times = tr.times
    t0, t_end = float(times[0]), float(times[-1])
    lo = t0 + window[0] * (t_end - t0)
    hi = t0 + window[1] * (t_end - t0)
    if not (0.0 < lam < t_end - hi):
        raise ValueError(
            f"lambda = {lam:g} outside (0, T - t1) = (0, {t_end - hi:g})")
    sample_dt = tr.sample_dt
    dv = g.dv

    eps_vec = pack(sm.eps_edge)
    mu_vec = pack(sm.mu_face)
    ts_e = TimeSeries(t0, sample_dt, tr.e)
    ts_h = TimeSeries(t0, sample_dt, tr.h)
    ts_j = TimeSeries(t0, sample_dt, tr.j)
    ts_ee = TimeSeries(t0, sample_dt, tr.e * eps_vec)
    ts_mh = TimeSeries(t0, sample_dt, tr.h * mu_vec)

    d_ee = steklov_derivative(ts_ee, lam).samples
    d_mh = steklov_derivative(ts_mh, lam).samples
    e_lam = steklov_mean(ts_e, lam).samples
    h_lam = steklov_mean(ts_h, lam).samples
    j_lam = steklov_mean(ts_j, lam).samples

    sel = (times >= lo) & (times <= hi)

    phi_vec = pack(phi)
    psi_vec = pack(psi)
    curl_phi = pack(curl_e(phi, g))
    curl_psi = pack(curl_h(psi, g))

    t1 = dv * _rows_dot(d_ee[sel], phi_vec)
    t2 = dv * _rows_dot(h_lam[sel], curl_phi)
    t3 = dv * _rows_dot(j_lam[sel], phi_vec)
    scale_e = np.max(np.abs(t1) + np.abs(t2) + np.abs(t3)) + SCALE_FLOOR
    r_e_rows = (t1 - t2 + t3) / scale_e

    u1 = dv * _rows_dot(d_mh[sel], psi_vec)
    u2 = dv * _rows_dot(e_lam[sel], curl_psi)
    scale_h = np.max(np.abs(u1) + np.abs(u2)) + SCALE_FLOOR
    r_h_rows = (u1 + u2) / scale_h

    # Scalar identity: the mollified energy rate balances the mollified
    # current work; rests on the tensor symmetry and the exact adjointness.
    v1 = dv * np.sum(d_ee[sel] * e_lam[sel], axis=1)
    v2 = dv * np.sum(d_mh[sel] * h_lam[sel], axis=1)
    v3 = dv * np.sum(j_lam[sel] * e_lam[sel], axis=1)
    scale_en = np.max(np.abs(v1) + np.abs(v2) + np.abs(v3)) + SCALE_FLOOR
    r_en_rows = (v1 + v2 + v3) / scale_en

    return times[sel], r_e_rows, r_h_rows, r_en_rows


def semidiscrete_residual(tr: SolutionTrace, lam: float, phi: EdgeField,
                          psi: FaceField,
                          window: tuple[float, float] = STEKLOV_WINDOW
                          ) -> SemidiscreteResult:
    """Residuals of the mollified field equations tested against (phi, psi),
    plus the scalar energy-rate identity, evaluated at every sample time in
    the interior window.

    The mollified equations hold exactly for the semi-discrete dynamics, so
    the residuals measure the trace's time-discretization error and shrink
    by about four under dt halving at fixed lam/dt.
    """
    t_win, r_e, r_h, r_en = semidiscrete_rows(tr, lam, phi, psi, window)
    return SemidiscreteResult(
        r_e=float(np.max(np.abs(r_e))),
        r_h=float(np.max(np.abs(r_h))),
        r_energy=float(np.max(np.abs(r_en))),
        lam=lam, n_window=len(t_win))


# ---------------------------------------------------------------------------
# Uniqueness experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniquenessReport:
    zero_field_max: float
    zero_ok: bool
    gronwall_rate: float
    gronwall_prefactor: float
    gronwall_margin: float
    gronwall_ok: bool
    hat_energy_max: float
    identity_defect: float
    identity_defect_fine: float
    identity_ratio: float
    identity_ok: bool
    delta: float
    dt: float
    n_steps: int
    # Per-step curves of the perturbed run, kept for reporting.
    times: np.ndarray | None = None
    hat_energy: np.ndarray | None = None
    envelope: np.ndarray | None = None


def _hat_energy_defect(tr: SolutionTrace, sm: SampledMaterials,
                       e0_vec: np.ndarray, h0_vec: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Hat-field energy and the defect of its integral identity.

    With initial data folded in, the identity reads

        E_hat(t) = int_0^t [ (eps e0) . e_hat + (mu h0) . h_hat ]
                 - int_0^t (sigma e_hat) . e_hat,

    which reduces to the zero-data statement when e0 = h0 = 0.
    """
    g = tr.grid
    dv = g.dv
    eps_vec = pack(sm.eps_edge)
    mu_vec = pack(sm.mu_face)
    sig_vec = pack(sm.sigma_edge)
    sample_dt = tr.sample_dt

    e_hat = hat_field(TimeSeries(tr.times[0], sample_dt, tr.e)).samples
    h_hat = hat_field(TimeSeries(tr.times[0], sample_dt, tr.h)).samples

    hat_energy = 0.5 * dv * (np.sum(e_hat * eps_vec * e_hat, axis=1)
                             + np.sum(h_hat * mu_vec * h_hat, axis=1))
    work_init = dv * (_rows_dot(e_hat, eps_vec * e0_vec)
                      + _rows_dot(h_hat, mu_vec * h0_vec))
    work_ohm = dv * np.sum(e_hat * sig_vec * e_hat, axis=1)

    def cumtrapz(y):
        out = np.zeros_like(y)
        out[1:] = np.cumsum(0.5 * sample_dt * (y[1:] + y[:-1]))
        return out

    defect = hat_energy - cumtrapz(work_init) + cumtrapz(work_ohm)
    return hat_energy, defect


def uniqueness_experiment(g: Grid, m: MaterialSet, cfg: StepperConfig,
                          n_steps: int, *, delta: float = 1e-8, seed: int = 7,
                          eps_star: float, mu_star: float,
                          initial_state: FieldState | None = None
                          ) -> UniquenessReport:
    """Numerical realization of the zero-data uniqueness mechanism.

    (a) a run from exactly zero data must stay exactly zero;
    (b) a run from data perturbed to initial energy delta^2 must keep its
        hat-field energy under the closed-form Gronwall envelope
        C delta^2 exp(L t) and satisfy the hat-energy integral identity to
        second order in dt (checked by an internal dt/2 rerun).
    """
    validate_materials(m, g, mode="uniqueness", eps_star=eps_star,
                       mu_star=mu_star)
    if m.j1.preset != "zero":
        raise HypothesisViolationError(
            "the uniqueness hypothesis admits only the conduction current; "
            "disable the impressed source")
    if initial_state is not None and initial_state.max_abs() != 0.0:
        raise HypothesisViolationError(
            "uniqueness requires exactly zero initial data")

    # (a) zero data stays exactly zero (linear scheme, zero input).
    zero_max = 0.0

    def watch(n, t, s):
        nonlocal zero_max
        zero_max = max(zero_max, s.max_abs())

    simulate(g, m, FieldState.zeros(g), cfg, n_steps, on_sample=watch)
    zero_ok = zero_max == 0.0

    # (b) perturbed data, normalized so the ordinary initial energy is
    # delta^2.
    rng = np.random.default_rng(seed)
    e0 = unpack_edge(rng.standard_normal(g.num_edge_dofs), g)
    apply_pec_mask(e0)
    h0 = unpack_face(rng.standard_normal(g.num_face_dofs), g)
    state = FieldState(e0, h0, 0.0)
    raw_energy = energy(state, m, g)
    scalef = delta / np.sqrt(raw_energy)
    state = FieldState(scalef * e0, scalef * h0, 0.0)
    e0_vec = pack(state.e)
    h0_vec = pack(state.h)

    sm = SampledMaterials.build(m, g)
    res = simulate(g, m, state.copy(), cfg, n_steps, record_stride=1)
    tr = SolutionTrace.from_sim(g, m, res.trace, cfg.scheme)
    hat_energy, defect = _hat_energy_defect(tr, sm, e0_vec, h0_vec)

    # Worst-case envelope: the spectral bound gives
    # E_hat(t) <= delta^2 (e^t - 1); with rate L = 2 max sigma / min eps the
    # prefactor below keeps C delta^2 e^{L t} above that for any L >= 0.
    rate = 2.0 * float(m.sigma.max()) / float(m.eps.min())
    t_end = float(tr.times[-1])
    prefactor = 1.0 if rate >= 1.0 else float(np.exp((1.0 - rate) * t_end))
    envelope = prefactor * delta**2 * np.exp(rate * tr.times)
    gaps = (envelope - hat_energy) / envelope
    gronwall_margin = float(gaps.min())
    gronwall_ok = bool(np.all(hat_energy <= envelope))

    energy_scale = max(float(hat_energy.max()), np.finfo(np.float64).tiny)
    identity_defect = float(np.max(np.abs(defect))) / energy_scale

    # dt/2 rerun with the same perturbation: the identity defect is a
    # second-order quantity.
    cfg_fine = StepperConfig(dt=0.5 * cfg.dt, scheme=cfg.scheme,
                             cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)
    res_f = simulate(g, m, state.copy(), cfg_fine, 2 * n_steps, record_stride=1)
    tr_f = SolutionTrace.from_sim(g, m, res_f.trace, cfg.scheme)
    hat_f, defect_f = _hat_energy_defect(tr_f, sm, e0_vec, h0_vec)
    scale_f = max(float(hat_f.max()), np.finfo(np.float64).tiny)
    identity_defect_fine = float(np.max(np.abs(defect_f))) / scale_f

    ratio = identity_defect / max(identity_defect_fine, np.finfo(np.float64).tiny)
    identity_ok = 3.0 <= ratio <= 5.0

    return UniquenessReport(
        zero_field_max=zero_max, zero_ok=bool(zero_ok),
        gronwall_rate=rate, gronwall_prefactor=prefactor,
        gronwall_margin=gronwall_margin, gronwall_ok=gronwall_ok,
        hat_energy_max=float(hat_energy.max()),
        identity_defect=identity_defect,
        identity_defect_fine=identity_defect_fine,
        identity_ratio=float(ratio), identity_ok=bool(identity_ok),
        delta=delta, dt=cfg.dt, n_steps=n_steps,
        times=tr.times, hat_energy=hat_energy, envelope=envelope)


# ---------------------------------------------------------------------------
# Gauss / charge diagnostics
# ---------------------------------------------------------------------------

@dataclass
class GaussReport:
    times: np.ndarray
    divb_defect: np.ndarray     # per step, max cellwise
    charge_defect: np.ndarray   # per step, max nodewise
    rho: np.ndarray             # per step charge field, packed nodes
    divb_scale: float
    charge_scale: float

    @property
    def divb_rel(self) -> float:
        return float(self.divb_defect.max()) / self.divb_scale

    @property
    def charge_rel(self) -> float:
        return float(self.charge_defect.max()) / self.charge_scale


def gauss_check(tr: SolutionTrace) -> GaussReport:
    """Divergence bookkeeping along a trace.

    The magnetic-flux divergence must be transported unchanged; the electric
    one must track the accumulated charge, the negative running integral of
    the current divergence (trapezoid in time, hence second order for the
    sampled snapshots).
    """
    g, m = tr.grid, tr.materials
    eps_vec = pack(SampledMaterials.build(m, g).eps_edge)
    mu_vec = pack(sample_on_faces(m.mu, g))
    s = len(tr.times)
    sample_dt = tr.sample_dt

    divb = np.stack([cell_divergence(unpack_face(tr.h[n] * mu_vec, g), g).ravel()
                     for n in range(s)])
    dive = np.stack([nodal_divergence(unpack_edge(tr.e[n] * eps_vec, g), g).ravel()
                     for n in range(s)])
    divj = np.stack([nodal_divergence(unpack_edge(tr.j[n], g), g).ravel()
                     for n in range(s)])

    rho = np.zeros_like(divj)
    rho[1:] = -np.cumsum(0.5 * sample_dt * (divj[1:] + divj[:-1]), axis=0)

    divb_defect = np.max(np.abs(divb - divb[0]), axis=1)
    charge_defect = np.max(np.abs(dive - dive[0] - rho), axis=1)

    dsum = sum(2.0 / d for d in g.spacing)
    divb_scale = max(dsum * float(np.abs(tr.h * mu_vec).max()), SCALE_FLOOR)
    charge_scale = max(float(np.abs(dive).max()) + float(np.abs(rho).max()),
                       SCALE_FLOOR)

    return GaussReport(times=tr.times, divb_defect=divb_defect,
                       charge_defect=charge_defect, rho=rho,
                       divb_scale=divb_scale, charge_scale=charge_scale)
