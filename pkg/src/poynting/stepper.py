"""Time integration of the staggered Maxwell system.

Two paths:

* `step_leapfrog` -- the classic explicit staggered update (h held at
  t - dt/2), with the conduction term folded in through the unconditionally
  stable time-averaged form.
* `step_midpoint` -- implicit midpoint (Crank-Nicolson). Eliminating h
  leaves one symmetric positive definite system for the electric midpoint
  value, solved matrix-free by preconditioned conjugate gradients. Because
  the two discrete curls are exact adjoints, this scheme satisfies the
  discrete energy identity to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import EnergyLedger, energy, poynting_flux
from .mesh import norm as field_norm
from .errors import (BlowUpError, ConfigurationError, ContractViolationError,
                     SolverError)
from .materials import CurrentSource, MaterialSet, SampledMaterials, validate
from .mesh import (EdgeField, FaceField, Grid, curl_e, curl_h, inner,
                   is_pec_conforming, pack, _dot)

CG_TOL_DEFAULT = 1e-12
CG_MAXIT_DEFAULT = 2000
CFL_SAFETY = 0.95


@dataclass
class FieldState:
    """Fields at one time level.

    `h_offset` is the signed time offset of h relative to t (0 for the
    midpoint scheme, -dt/2 for a staggered leapfrog state).
    """

    e: EdgeField
    h: FaceField
    t: float = 0.0
    h_offset: float = 0.0

    @classmethod
    def zeros(cls, g: Grid, t: float = 0.0) -> "FieldState":
        return cls(EdgeField.zeros(g), FaceField.zeros(g), t)

    def copy(self) -> "FieldState":
        return FieldState(self.e.copy(), self.h.copy(), self.t, self.h_offset)

    def max_abs(self) -> float:
        return max(self.e.max_abs(), self.h.max_abs())

    def all_finite(self) -> bool:
        return self.e.all_finite() and self.h.all_finite()


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    scheme: str = "midpoint"
    cg_tol: float = CG_TOL_DEFAULT
    cg_maxit: int = CG_MAXIT_DEFAULT

    def __post_init__(self):
        if self.scheme not in ("midpoint", "leapfrog"):
            raise ConfigurationError(f"unknown scheme '{self.scheme}'")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not (0.0 < self.cg_tol < 1.0):
            raise ConfigurationError(f"cg_tol must lie in (0, 1), got {self.cg_tol}")
        if self.cg_maxit < 1:
            raise ConfigurationError("cg_maxit must be at least 1")


@dataclass
class StepAux:
    """Per-step bookkeeping for the energy ledger.

    The midpoint increments use the scheme's own midpoint values, which is
    what makes the ledger residual measure the identity rather than a
    quadrature mismatch.
    """

    cg_iterations: int = 0
    cg_residual: float = 0.0
    joule_increment: float = 0.0
    source_increment: float = 0.0
    jnorm2_increment: float = 0.0
    enorm2_increment: float = 0.0


def cfl_limit(m: MaterialSet, g: Grid) -> float:
    """Largest leapfrog-stable dt: CFL_SAFETY / (c_max sqrt(sum 1/di^2)),
    with c_max the worst-case cell wave speed."""
    with np.errstate(divide="ignore"):
        inv_eps = (1.0 / m.eps).max(axis=0)
        inv_mu = (1.0 / m.mu).max(axis=0)
    c2 = float((inv_eps * inv_mu).max())
    if not np.isfinite(c2) or c2 <= 0.0:
        return 0.0
    dx, dy, dz = g.spacing
    return CFL_SAFETY / (np.sqrt(c2) * np.sqrt(1.0 / dx**2 + 1.0 / dy**2 + 1.0 / dz**2))


# ---------------------------------------------------------------------------
# Conjugate gradients (matrix-free)
# ---------------------------------------------------------------------------

def cg_solve(apply_A, b, tol: float = CG_TOL_DEFAULT, maxit: int = CG_MAXIT_DEFAULT,
             *, precond=None, x0=None):
    """Solve A x = b for a symmetric positive definite operator.

    `b` may be a flat array or an Edge/FaceField (the operator then maps the
    same layout). `precond` is either a positive diagonal (array matching the
    packed layout) or a callable r -> M^{-1} r. Returns (x, iterations,
    relative residual). Raises SolverError when maxit is exhausted.
    """
    if isinstance(b, (EdgeField, FaceField)):
        cls = type(b)
        shapes = [c.shape for c in b.components]
        sizes = [int(np.prod(s)) for s in shapes]

        def unflatten(v):
            parts = np.split(v, np.cumsum(sizes)[:-1])
            return cls(*(p.reshape(s) for p, s in zip(parts, shapes)))

        flat_apply = lambda v: pack(apply_A(unflatten(v)))
        x, it, res = _cg_flat(flat_apply, pack(b), tol, maxit, precond,
                              pack(x0) if x0 is not None else None)
        return unflatten(x), it, res
    return _cg_flat(apply_A, np.asarray(b, dtype=np.float64), tol, maxit,
                    precond, x0)


def _cg_flat(apply_A, b, tol, maxit, precond, x0):
    norm_b = np.sqrt(_dot(b, b))
    if norm_b == 0.0:
        return np.zeros_like(b), 0, 0.0
    if not np.isfinite(norm_b):
        raise SolverError("conjugate gradients: right-hand side is not finite",
                          residual=float("nan"), iterations=0)

    if precond is None:
        apply_M = lambda r: r
    elif callable(precond):
        apply_M = precond
    else:
        inv_diag = 1.0 / np.asarray(precond, dtype=np.float64)
        apply_M = lambda r: r * inv_diag

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - apply_A(x) if x0 is not None else b.copy()
    z = apply_M(r)
    p = z.copy()
    rz = _dot(r, z)
    for it in range(maxit + 1):
        rel = np.sqrt(_dot(r, r)) / norm_b
        if rel <= tol:
            return x, it, float(rel)
        if it == maxit:
            break
        Ap = apply_A(p)
        pAp = _dot(p, Ap)
        if pAp <= 0.0:
            raise SolverError(
                "conjugate gradients: operator is not positive definite "
                f"(p.Ap = {pAp:g})", residual=float(rel), iterations=it)
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        z = apply_M(r)
        rz_new = _dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"conjugate gradients did not reach tol={tol:g} within {maxit} "
        f"iterations (residual {rel:g})", residual=float(rel), iterations=maxit)


# ---------------------------------------------------------------------------
# Implicit midpoint
# ---------------------------------------------------------------------------

def _curlcurl_diagonal(inv_mu: FaceField, g: Grid) -> EdgeField:
    """Diagonal of curl_h mu^{-1} curl_e on the masked edge subspace."""
    dx, dy, dz = g.spacing
    imx, imy, imz = inv_mu.components
    d = EdgeField.zeros(g)
    d.x[:, 1:-1, 1:-1] = ((imz[:, 1:, 1:-1] + imz[:, :-1, 1:-1]) / dy**2
                          + (imy[:, 1:-1, 1:] + imy[:, 1:-1, :-1]) / dz**2)
    d.y[1:-1, :, 1:-1] = ((imx[1:-1, :, 1:] + imx[1:-1, :, :-1]) / dz**2
                          + (imz[1:, :, 1:-1] + imz[:-1, :, 1:-1]) / dx**2)
    d.z[1:-1, 1:-1, :] = ((imy[1:, 1:-1, :] + imy[:-1, 1:-1, :]) / dx**2
                          + (imx[1:-1, 1:, :] + imx[1:-1, :-1, :]) / dy**2)
    return d


@dataclass
class _Workspace:
    g: Grid
    sm: SampledMaterials
    source: CurrentSource
    ccdiag: EdgeField | None = None

    @classmethod
    def build(cls, m: MaterialSet, g: Grid) -> "_Workspace":
        sm = SampledMaterials.build(m, g)
        sm.require_invertible()
        return cls(g=g, sm=sm, source=CurrentSource(m.j1, g),
                   ccdiag=_curlcurl_diagonal(sm.inv_mu_face, g))


def _midpoint_advance(s: FieldState, ws: _Workspace, dt: float,
                      cg_tol: float, cg_maxit: int) -> tuple[FieldState, StepAux]:
    """One midpoint step of signed length dt.

    For dt < 0 (used only to stagger leapfrog initial data) the eliminated
    system is negated to restore positive definiteness, which requires
    2 eps / |dt| > sigma at every DOF.
    """
    g, sm = ws.g, ws.sm
    ad = abs(dt)
    sign = 1.0 if dt > 0 else -1.0
    j1_mid = ws.source.at(s.t + 0.5 * dt)

    b = curl_h(s.h, g) + (2.0 / dt) * (sm.eps_edge * s.e) - j1_mid
    if sign < 0:
        gap = min(float(((2.0 / ad) * ce - cs).min())
                  for ce, cs in zip(sm.eps_edge.components,
                                    sm.sigma_edge.components))
        if gap <= 0.0:
            raise ConfigurationError(
                "backward midpoint half-step needs 2 eps / dt > sigma at "
                "every DOF; decrease dt or the conductivity")
        b = -b

    def apply_A(x: EdgeField) -> EdgeField:
        ke = curl_h(sm.inv_mu_face * curl_e(x, g, check=False), g)
        return ((2.0 / ad) * (sm.eps_edge * x) + sign * (sm.sigma_edge * x)
                + (0.5 * ad) * ke)

    diag = ((2.0 / ad) * sm.eps_edge + sign * sm.sigma_edge
            + (0.5 * ad) * ws.ccdiag)
    u, iters, res = cg_solve(apply_A, b, cg_tol, cg_maxit,
                             precond=pack(diag), x0=s.e)

    e_new = 2.0 * u - s.e
    h_new = s.h - dt * (sm.inv_mu_face * curl_e(u, g, check=False))
    out = FieldState(e_new, h_new, s.t + dt, h_offset=0.0)

    aux = StepAux(cg_iterations=iters, cg_residual=res)
    if sign > 0:
        sig_u = sm.sigma_edge * u
        j_mid = sig_u + j1_mid
        aux.joule_increment = dt * inner(sig_u, u, g)
        aux.source_increment = dt * inner(j1_mid, u, g)
        aux.jnorm2_increment = dt * inner(j_mid, j_mid, g)
        aux.enorm2_increment = dt * inner(u, u, g)
    return out, aux


def step_midpoint(s: FieldState, m: MaterialSet, g: Grid, cfg: StepperConfig,
                  *, workspace: _Workspace | None = None
                  ) -> tuple[FieldState, StepAux]:
    """Advance one implicit-midpoint step of length cfg.dt."""
    if s.h_offset != 0.0:
        raise ContractViolationError(
            "midpoint stepping expects h collocated with e (h_offset == 0)")
    ws = workspace if workspace is not None else _Workspace.build(m, g)
    return _midpoint_advance(s, ws, cfg.dt, cfg.cg_tol, cfg.cg_maxit)


# ---------------------------------------------------------------------------
# Leapfrog
# ---------------------------------------------------------------------------

def initialize_leapfrog(s: FieldState, m: MaterialSet, g: Grid,
                        cfg: StepperConfig,
                        *, workspace: _Workspace | None = None) -> FieldState:
    """Shift h to t - dt/2 by one backward midpoint half-step, preserving
    second-order accuracy of the staggered start."""
    if s.h_offset != 0.0:
        raise ContractViolationError("initial state already staggered")
    ws = workspace if workspace is not None else _Workspace.build(m, g)
    back, _ = _midpoint_advance(s, ws, -0.5 * cfg.dt, cfg.cg_tol, cfg.cg_maxit)
    return FieldState(s.e.copy(), back.h, s.t, h_offset=-0.5 * cfg.dt)


def step_leapfrog(s: FieldState, m: MaterialSet, g: Grid, dt: float,
                  *, workspace: _Workspace | None = None
                  ) -> tuple[FieldState, StepAux]:
    """Advance one explicit staggered step of length dt.

    h update first (t - dt/2 -> t + dt/2), then e with the conduction term
    in time-averaged form:

        e^{n+1} = [ (eps/dt - sigma/2) e^n + curl_h h^{n+1/2} - j1 ]
                  / (eps/dt + sigma/2)
    """
    limit = cfl_limit(m, g)
    if dt > limit:
        raise ConfigurationError(
            f"dt={dt:g} violates the CFL bound {limit:g} for this grid and "
            "material set")
    if abs(s.h_offset + 0.5 * dt) > 1e-9 * dt:
        raise ContractViolationError(
            "leapfrog expects h staggered to t - dt/2; "
            "call initialize_leapfrog first")
    ws = workspace if workspace is not None else _Workspace.build(m, g)
    g_, sm = ws.g, ws.sm

    h_new = s.h - dt * (sm.inv_mu_face * curl_e(s.e, g_, check=False))
    j1_half = ws.source.at(s.t + 0.5 * dt)
    den = (1.0 / dt) * sm.eps_edge + 0.5 * sm.sigma_edge
    num = (1.0 / dt) * sm.eps_edge - 0.5 * sm.sigma_edge
    e_new = (num * s.e + curl_h(h_new, g_) - j1_half) / den
    return FieldState(e_new, h_new, s.t + dt, h_offset=-0.5 * dt), StepAux()


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------

@dataclass
class TraceArrays:
    """Uniformly sampled packed snapshots of a run, h time-centered."""

    times: np.ndarray        # (S,)
    e: np.ndarray            # (S, num_edge_dofs)
    h: np.ndarray            # (S, num_face_dofs)
    j: np.ndarray            # (S, num_edge_dofs)
    stride: int
    dt: float                # solver step, not the sample spacing


@dataclass
class SimResult:
    state: FieldState
    ledger: EnergyLedger
    trace: TraceArrays | None
    cg_iterations: int = 0


def _centered_h(s: FieldState, ws: _Workspace) -> FaceField:
    if s.h_offset == 0.0:
        return s.h
    return s.h + s.h_offset * (ws.sm.inv_mu_face * curl_e(s.e, ws.g, check=False))


def simulate(g: Grid, m: MaterialSet, state0: FieldState, cfg: StepperConfig,
             n_steps: int, *, record_stride: int = 0,
             on_sample=None) -> SimResult:
    """Integrate n_steps from state0 and build the energy ledger.

    With record_stride > 0, packed (e, h, j) snapshots are kept every that
    many steps (n_steps must be a multiple). `on_sample(n, t, state)` is
    invoked at every step including the initial one.
    """
    if n_steps < 1:
        raise ConfigurationError("n_steps must be at least 1")
    if record_stride < 0 or (record_stride and n_steps % record_stride != 0):
        raise ConfigurationError(
            "record_stride must be positive and divide n_steps")
    validate(m, g, mode="weak")
    ws = _Workspace.build(m, g)
    if not is_pec_conforming(state0.e):
        raise ContractViolationError("initial e is not PEC-conforming")
    if not state0.all_finite():
        raise ContractViolationError("initial state holds non-finite values")

    state = state0.copy()
    dt = cfg.dt
    t0 = state.t
    leapfrog = cfg.scheme == "leapfrog"
    if leapfrog:
        limit = cfl_limit(m, g)
        if dt > limit:
            raise ConfigurationError(
                f"dt={dt:g} violates the CFL bound {limit:g}")
        if state.h_offset == 0.0:
            state = initialize_leapfrog(state, m, g, cfg, workspace=ws)
    elif state.h_offset != 0.0:
        raise ContractViolationError(
            "midpoint stepping expects h collocated with e (h_offset == 0)")

    ledger = EnergyLedger(cfg.scheme)
    joule = src_work = jn2 = en2 = 0.0
    cg_total = 0

    def current_samples(s: FieldState):
        # Trapezoid integrands at a sample time (leapfrog quadrature).
        sig_e = ws.sm.sigma_edge * s.e
        j1_now = ws.source.at(s.t)
        j_tot = sig_e + j1_now
        return (inner(sig_e, s.e, g), inner(j1_now, s.e, g),
                inner(j_tot, j_tot, g), inner(s.e, s.e, g), j_tot)

    times, snaps_e, snaps_h, snaps_j = [], [], [], []

    def capture(s: FieldState):
        times.append(s.t)
        snaps_e.append(pack(s.e))
        snaps_h.append(pack(_centered_h(s, ws)))
        snaps_j.append(pack(ws.sm.sigma_edge * s.e + ws.source.at(s.t)))

    def ledger_row(s: FieldState, jl: float, sw: float) -> None:
        ledger.append(s.t, energy(s, m, g, sampled=ws.sm), poynting_flux(s, g),
                      jl, sw,
                      flux_scale=field_norm(s.e, g) * field_norm(s.h, g))

    ledger_row(state, 0.0, 0.0)
    if leapfrog:
        q_prev, p_prev, jn2_prev, en2_prev, _ = current_samples(state)
    if record_stride:
        capture(state)
    if on_sample is not None:
        on_sample(0, state.t, state)

    for n in range(1, n_steps + 1):
        if leapfrog:
            state, aux = step_leapfrog(state, m, g, dt, workspace=ws)
        else:
            state, aux = _midpoint_advance(state, ws, dt, cfg.cg_tol, cfg.cg_maxit)
        state.t = t0 + n * dt
        cg_total += aux.cg_iterations
        if not state.all_finite():
            raise BlowUpError(
                f"non-finite field value after step {n} (t = {state.t:g})",
                step=n)

        if leapfrog:
            q_n, p_n, jn2_n, en2_n, _ = current_samples(state)
            joule += 0.5 * dt * (q_prev + q_n)
            src_work += 0.5 * dt * (p_prev + p_n)
            jn2 += 0.5 * dt * (jn2_prev + jn2_n)
            en2 += 0.5 * dt * (en2_prev + en2_n)
            q_prev, p_prev, jn2_prev, en2_prev = q_n, p_n, jn2_n, en2_n
        else:
            joule += aux.joule_increment
            src_work += aux.source_increment
            jn2 += aux.jnorm2_increment
            en2 += aux.enorm2_increment

        ledger_row(state, joule, src_work)
        if record_stride and n % record_stride == 0:
            capture(state)
        if on_sample is not None:
            on_sample(n, state.t, state)

    ledger.j_norm = float(np.sqrt(max(jn2, 0.0)))
    ledger.e_norm = float(np.sqrt(max(en2, 0.0)))

    trace = None
    if record_stride:
        trace = TraceArrays(times=np.asarray(times), e=np.stack(snaps_e),
                            h=np.stack(snaps_h), j=np.stack(snaps_j),
                            stride=record_stride, dt=dt)
    return SimResult(state=state, ledger=ledger, trace=trace,
                     cg_iterations=cg_total)
