"""Scenario presets, run orchestration, and the analytic cavity oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..energy import (FLUX_RELATIVE_TOL, MIDPOINT_BALANCE_TOL, EnergyLedger,
                      balance_residual, energy_bound_check,
                      energy_bound_margin, flux_nullity)
from ..materials import CurrentSpec, MaterialSet, load_material_file, validate
from ..mesh import (EdgeField, FaceField, Grid, apply_pec_mask, build_grid,
                    inner, set_deterministic)
from ..stepper import FieldState, SimResult, StepperConfig, simulate
from ..verify import (SolutionTrace, TestFunctionBank, gauss_check,
                      semidiscrete_residual, uniqueness_experiment,
                      weakform_residual)
from .config import SimConfig

# Single-run audit values are Theta(dt^2) quantities without an a-priori
# constant; these coarse ceilings only catch gross breakage. The sharp gates
# are the refinement-ratio tests of the acceptance suite.
WEAKFORM_SANITY = 1e-3
SEMIDISCRETE_SANITY = 5e-2
CHARGE_SANITY = 5e-2
GAUSS_DIVB_TOL = 1e-12
CAVITY_FREQ_TOL = 0.02


def cavity_frequency(g: Grid) -> float:
    """Angular frequency of the standing mode, for unit materials."""
    lx, ly, _ = g.extent
    return np.pi * np.sqrt(1.0 / lx**2 + 1.0 / ly**2)


def cavity_mode(g: Grid, t: float) -> tuple[EdgeField, FaceField]:
    """Closed-form standing-mode fields at time t, sampled at the DOFs.

    The mode is z-uniform (the 2D transverse-magnetic mode extruded), so the
    tangential electric field vanishes on all six walls exactly:

        e_z = sin(pi x / Lx) sin(pi y / Ly) cos(omega t)
        h_x = -(ky / omega) sin(kx x) cos(ky y) sin(omega t)
        h_y =  (kx / omega) cos(kx x) sin(ky y) sin(omega t)
    """
    lx, ly, _ = g.extent
    kx, ky = np.pi / lx, np.pi / ly
    omega = cavity_frequency(g)
    e = EdgeField.zeros(g)
    cx, cy, _ = g.edge_coords(2)
    e.z[...] = (np.sin(kx * cx)[:, None, None]
                * np.sin(ky * cy)[None, :, None]) * np.cos(omega * t)
    apply_pec_mask(e)
    h = FaceField.zeros(g)
    fx = g.face_coords(0)
    h.x[...] = (-(ky / omega) * np.sin(kx * fx[0])[:, None, None]
                * np.cos(ky * fx[1])[None, :, None]) * np.sin(omega * t)
    fy = g.face_coords(1)
    h.y[...] = ((kx / omega) * np.cos(kx * fy[0])[:, None, None]
                * np.sin(ky * fy[1])[None, :, None]) * np.sin(omega * t)
    return e, h


class CavityProbe:
    """Accumulates the pointwise error against the closed-form mode and a
    modal amplitude trace for the discrete-frequency estimate."""

    def __init__(self, g: Grid, err_stride: int = 5):
        self.g = g
        self.err_stride = max(1, err_stride)
        self.e_ref, _ = cavity_mode(g, 0.0)
        self.omega = cavity_frequency(g)
        self.max_error = 0.0
        self.times: list[float] = []
        self.amplitude: list[float] = []

    def __call__(self, n: int, t: float, state: FieldState) -> None:
        self.times.append(t)
        self.amplitude.append(inner(state.e, self.e_ref, self.g))
        if n % self.err_stride == 0:
            e_exact, h_exact = cavity_mode(self.g, t)
            err = max((state.e - e_exact).max_abs(),
                      (state.h - h_exact).max_abs())
            self.max_error = max(self.max_error, err)

    def frequency_estimate(self) -> float:
        """Angular frequency from sign changes of the modal amplitude.

        With a single crossing the estimate falls back to the quarter
        period, exact for a mode launched at its amplitude maximum.
        """
        s = np.asarray(self.amplitude)
        t = np.asarray(self.times)
        idx = np.nonzero(np.diff(np.sign(s)) != 0)[0]
        if len(idx) == 0:
            return float("nan")
        crossings = t[idx] - s[idx] * (t[idx + 1] - t[idx]) / (s[idx + 1] - s[idx])
        if len(crossings) == 1:
            return float(0.5 * np.pi / crossings[0])
        return float(np.pi / np.mean(np.diff(crossings)))

    def result(self) -> dict:
        est = self.frequency_estimate()
        rel = abs(est - self.omega) / self.omega if np.isfinite(est) else np.inf
        return {
            "cavity_max_error": self.max_error,
            "cavity_freq_estimate": est,
            "cavity_freq_exact": self.omega,
            "cavity_freq_error": rel,
            "cavity_freq_ok": bool(rel <= CAVITY_FREQ_TOL),
        }


def build_materials(cfg: SimConfig, g: Grid) -> MaterialSet:
    j1 = CurrentSpec(preset=cfg.source_preset, amplitude=cfg.source_amplitude,
                     t_center=cfg.source_t_center, tau=cfg.source_tau,
                     freq=cfg.source_freq)
    if cfg.materials_file:
        return load_material_file(cfg.materials_file, g, j1=j1)
    return MaterialSet.homogeneous(g, eps=cfg.eps, mu=cfg.mu, sigma=cfg.sigma,
                                   j1=j1)


def initial_state(cfg: SimConfig, g: Grid) -> FieldState:
    if cfg.scenario in ("cavity_te101", "damped_cavity"):
        e0, _ = cavity_mode(g, 0.0)
        return FieldState(e0, FaceField.zeros(g), 0.0)
    return FieldState.zeros(g)


@dataclass
class ScenarioResult:
    config: SimConfig
    grid: Grid
    materials: MaterialSet
    ledger: EnergyLedger
    trace: SolutionTrace | None
    reports: dict
    artifacts: dict = field(default_factory=dict)
    sim: SimResult | None = None

    @property
    def all_ok(self) -> bool:
        return all(v for k, v in self.reports.items() if k.endswith("_ok"))


def run_scenario(cfg: SimConfig) -> ScenarioResult:
    """Run the configured scenario, collect the ledger, the optional trace,
    and the enabled verification reports."""
    set_deterministic(cfg.deterministic)
    g = build_grid(cfg.grid_n, cfg.grid_extent)
    m = build_materials(cfg, g)
    validate(m, g, mode="weak")
    state0 = initial_state(cfg, g)
    scfg = StepperConfig(dt=cfg.dt_effective, scheme=cfg.scheme,
                         cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)

    need_trace = (cfg.save_trace or cfg.verify_weakform or cfg.verify_steklov
                  or cfg.verify_gauss)
    probe = CavityProbe(g) if cfg.scenario == "cavity_te101" else None

    sim = simulate(g, m, state0, scfg, cfg.steps_effective,
                   record_stride=cfg.snapshot_stride if need_trace else 0,
                   on_sample=probe)
    ledger = sim.ledger

    reports: dict = {}
    reports["balance_residual"] = balance_residual(ledger)
    if cfg.scheme == "midpoint":
        reports["balance_ok"] = bool(
            reports["balance_residual"] <= MIDPOINT_BALANCE_TOL)
    reports["flux_max_rel"] = flux_nullity(ledger)
    reports["flux_ok"] = bool(reports["flux_max_rel"] <= FLUX_RELATIVE_TOL)
    reports["energy_bound_margin"] = energy_bound_margin(
        ledger, ledger.j_norm, ledger.e_norm)
    reports["energy_bound_ok"] = bool(
        energy_bound_check(ledger, ledger.j_norm, ledger.e_norm))
    if probe is not None:
        reports.update(probe.result())

    trace = None
    artifacts: dict = {}
    if need_trace:
        trace = SolutionTrace.from_sim(g, m, sim.trace, cfg.scheme)

    bank = None
    if cfg.verify_weakform or cfg.verify_steklov:
        bank = TestFunctionBank.build(g, trace.t_end,
                                      size=cfg.verify_bank_size, seed=cfg.seed)
    if cfg.verify_weakform:
        pair_residuals = weakform_residual(trace, bank)
        artifacts["weakform"] = pair_residuals
        worst = max(abs(r.value) for r in pair_residuals)
        reports["weakform_max_residual"] = worst
        reports["weakform_ok"] = bool(worst <= WEAKFORM_SANITY)
    if cfg.verify_steklov:
        results = [semidiscrete_residual(trace, lam, bank.pairs[0].phi,
                                         bank.pairs[0].psi)
                   for lam in cfg.verify_lambdas]
        artifacts["semidiscrete"] = results
        reports["semidiscrete_r_e"] = max(r.r_e for r in results)
        reports["semidiscrete_r_h"] = max(r.r_h for r in results)
        reports["semidiscrete_r_energy"] = max(r.r_energy for r in results)
        reports["semidiscrete_ok"] = bool(
            max(reports["semidiscrete_r_e"], reports["semidiscrete_r_h"],
                reports["semidiscrete_r_energy"]) <= SEMIDISCRETE_SANITY)
    if cfg.verify_gauss:
        gr = gauss_check(trace)
        artifacts["gauss"] = gr
        reports["gauss_divb_rel"] = gr.divb_rel
        reports["gauss_divb_ok"] = bool(gr.divb_rel <= GAUSS_DIVB_TOL)
        reports["gauss_charge_rel"] = gr.charge_rel
        reports["gauss_charge_ok"] = bool(gr.charge_rel <= CHARGE_SANITY)
    if cfg.verify_uniqueness:
        urep = uniqueness_experiment(
            g, m, scfg, cfg.steps_effective, delta=cfg.verify_delta,
            seed=cfg.seed, eps_star=cfg.eps_star, mu_star=cfg.mu_star)
        artifacts["uniqueness"] = urep
        reports["uniqueness_zero_max"] = urep.zero_field_max
        reports["uniqueness_zero_ok"] = urep.zero_ok
        reports["uniqueness_gronwall_margin"] = urep.gronwall_margin
        reports["uniqueness_gronwall_ok"] = urep.gronwall_ok
        reports["uniqueness_identity_ratio"] = urep.identity_ratio
        reports["uniqueness_identity_ok"] = urep.identity_ok

    return ScenarioResult(config=cfg, grid=g, materials=m, ledger=ledger,
                          trace=trace, reports=reports, artifacts=artifacts,
                          sim=sim)
