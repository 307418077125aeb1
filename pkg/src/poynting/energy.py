"""Electromagnetic energy functional, Joule power, boundary Poynting flux,
and the run ledger whose residual certifies the discrete energy equality."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractViolationError
from .materials import MaterialSet, SampledMaterials
from .mesh import EdgeField, Grid, curl_e, inner

if TYPE_CHECKING:
    from .stepper import FieldState

# Guards relative residuals when the initial energy vanishes.
ENERGY_FLOOR = 1e-30

# Balance gate applied to implicit-midpoint runs (the scheme satisfies the
# discrete energy identity to solver precision; leapfrog is second order and
# is gated by refinement ratios instead).
MIDPOINT_BALANCE_TOL = 1e-10

# PEC flux nullity: |flux| <= this factor times ||e|| ||h||.
FLUX_RELATIVE_TOL = 1e-13


class EnergyLedger:
    """Time series of (t, E, boundary flux, cumulative Joule work, cumulative
    source work, raw balance defect).

    The defect column stores E(t) - E(0) + joule_cum(t) + source_cum(t),
    unnormalized; `balance_residual` reduces it to the relative certificate.
    Joule work (sigma e) and source work (impressed current) are kept apart;
    their sum is the single current-work integral of the energy equality.
    """

    def __init__(self, scheme: str = ""):
        self.scheme = scheme
        self._t: list[float] = []
        self._energy: list[float] = []
        self._flux: list[float] = []
        self._joule: list[float] = []
        self._source: list[float] = []
        self._flux_scale: list[float] = []
        # Discrete space-time L2 norms of the total current and of e,
        # accumulated with the scheme's own quadrature.
        self.j_norm = 0.0
        self.e_norm = 0.0

    def append(self, t: float, energy: float, flux: float,
               joule_cum: float, source_cum: float,
               flux_scale: float = 0.0) -> None:
        if self._t and t <= self._t[-1]:
            raise ContractViolationError(
                f"ledger times must be strictly increasing: {t} after {self._t[-1]}")
        self._t.append(float(t))
        self._energy.append(float(energy))
        self._flux.append(float(flux))
        self._joule.append(float(joule_cum))
        self._source.append(float(source_cum))
        self._flux_scale.append(float(flux_scale))

    def __len__(self) -> int:
        return len(self._t)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self._t)

    @property
    def energy(self) -> np.ndarray:
        return np.asarray(self._energy)

    @property
    def flux(self) -> np.ndarray:
        return np.asarray(self._flux)

    @property
    def joule_cum(self) -> np.ndarray:
        return np.asarray(self._joule)

    @property
    def source_cum(self) -> np.ndarray:
        return np.asarray(self._source)

    @property
    def flux_scale(self) -> np.ndarray:
        return np.asarray(self._flux_scale)

    @property
    def residual(self) -> np.ndarray:
        e = self.energy
        return e - e[0] + self.joule_cum + self.source_cum

    def rows(self):
        """Iterate (t, E, flux, joule_cum, source_cum, residual) tuples."""
        res = self.residual
        for i in range(len(self)):
            yield (self._t[i], self._energy[i], self._flux[i],
                   self._joule[i], self._source[i], float(res[i]))


def energy(s: "FieldState", m: MaterialSet, g: Grid,
           sampled: SampledMaterials | None = None) -> float:
    """E = (1/2) [ inner(eps e, e) + inner(mu h, h) ].

    For a leapfrog state (h stored at t - dt/2) h is first averaged across
    the two adjacent half levels, which the state's offset encodes exactly:
    (h^{n-1/2} + h^{n+1/2})/2 = h + offset * mu^{-1} curl_e e.
    """
    sm = sampled if sampled is not None else SampledMaterials.build(m, g)
    h_eval = s.h
    if s.h_offset != 0.0:
        h_eval = s.h + s.h_offset * (sm.inv_mu_face * curl_e(s.e, g, check=False))
    return 0.5 * (inner(sm.eps_edge * s.e, s.e, g)
                  + inner(sm.mu_face * h_eval, h_eval, g))


def joule_power(s: "FieldState", j: EdgeField, g: Grid) -> float:
    """Instantaneous current work rate, inner(j, e)."""
    return inner(j, s.e, g)


def poynting_flux(s: "FieldState", g: Grid) -> float:
    """Surface quadrature of n . (e x h) over the six boundary faces.

    Tangential e and h values are interpolated to the boundary face centers
    (h from the nearest interior half layer). Exactly zero up to roundoff
    for PEC-conforming e, since every tangential e factor is masked.
    """
    dx, dy, dz = g.spacing
    ex, ey, ez = s.e.components
    hx, hy, hz = s.h.components
    total = 0.0

    def _zface(ke: int, kh: int, sign: float) -> float:
        exc = 0.5 * (ex[:, :-1, ke] + ex[:, 1:, ke])
        eyc = 0.5 * (ey[:-1, :, ke] + ey[1:, :, ke])
        hyc = 0.5 * (hy[:, :-1, kh] + hy[:, 1:, kh])
        hxc = 0.5 * (hx[:-1, :, kh] + hx[1:, :, kh])
        return sign * float(np.sum(exc * hyc - eyc * hxc)) * dx * dy

    def _xface(ie: int, ih: int, sign: float) -> float:
        eyc = 0.5 * (ey[ie, :, :-1] + ey[ie, :, 1:])
        ezc = 0.5 * (ez[ie, :-1, :] + ez[ie, 1:, :])
        hzc = 0.5 * (hz[ih, :, :-1] + hz[ih, :, 1:])
        hyc = 0.5 * (hy[ih, :-1, :] + hy[ih, 1:, :])
        return sign * float(np.sum(eyc * hzc - ezc * hyc)) * dy * dz

    def _yface(je: int, jh: int, sign: float) -> float:
        ezc = 0.5 * (ez[:-1, je, :] + ez[1:, je, :])
        exc = 0.5 * (ex[:, je, :-1] + ex[:, je, 1:])
        hxc = 0.5 * (hx[:-1, jh, :] + hx[1:, jh, :])
        hzc = 0.5 * (hz[:, jh, :-1] + hz[:, jh, 1:])
        return sign * float(np.sum(ezc * hxc - exc * hzc)) * dx * dz

    total += _zface(-1, -1, +1.0) + _zface(0, 0, -1.0)
    total += _xface(-1, -1, +1.0) + _xface(0, 0, -1.0)
    total += _yface(-1, -1, +1.0) + _yface(0, 0, -1.0)
    return total


def balance_residual(ledger: EnergyLedger) -> float:
    """max_n |E(t_n) - E(0) + joule_cum(t_n) + source_cum(t_n)| relative to
    max(E(0), floor)."""
    if len(ledger) == 0:
        raise ContractViolationError("balance_residual needs a populated ledger")
    scale = max(float(ledger.energy[0]), ENERGY_FLOOR)
    return float(np.max(np.abs(ledger.residual))) / scale


def energy_bound_check(ledger: EnergyLedger, j_norm: float, e_norm: float) -> bool:
    """max_n E(t_n) <= E(0) + ||j|| ||e|| within 1e-10 E(0) slack."""
    return energy_bound_margin(ledger, j_norm, e_norm) >= -1e-10 * float(ledger.energy[0])


def energy_bound_margin(ledger: EnergyLedger, j_norm: float, e_norm: float) -> float:
    """Slack of the bound: E(0) + ||j|| ||e|| - max_n E(t_n)."""
    if len(ledger) == 0:
        raise ContractViolationError("energy bound needs a populated ledger")
    e = ledger.energy
    return float(e[0] + j_norm * e_norm - np.max(e))


def flux_nullity(ledger: EnergyLedger) -> float:
    """max_n |flux(t_n)| relative to the recorded ||e|| ||h|| scale."""
    if len(ledger) == 0:
        raise ContractViolationError("flux nullity needs a populated ledger")
    scale = np.maximum(ledger.flux_scale, ENERGY_FLOOR)
    return float(np.max(np.abs(ledger.flux) / scale))
