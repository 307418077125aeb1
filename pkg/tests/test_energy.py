import numpy as np
import pytest

from poynting.energy import (EnergyLedger, balance_residual, energy,
                             energy_bound_check, energy_bound_margin,
                             flux_nullity, joule_power, poynting_flux)
from poynting.errors import ContractViolationError
from poynting.materials import MaterialSet
from poynting.mesh import EdgeField, FaceField, build_grid, inner, norm
from poynting.stepper import FieldState, StepperConfig, simulate

from _oracles import naive_inner, naive_sample_edge, naive_sample_face
from conftest import random_edge, random_face


@pytest.fixture
def grid():
    return build_grid((4, 4, 4), (1.0, 1.0, 1.0))


class TestEnergyFunctional:
    def test_zero_state(self, grid):
        m = MaterialSet.homogeneous(grid)
        assert energy(FieldState.zeros(grid), m, grid) == 0.0

    def test_uniform_interior_e_field(self, grid):
        # interior-masked unit x-field: the discrete sum is half the kept
        # edge count times the cell volume
        m = MaterialSet.homogeneous(grid)
        e = EdgeField.zeros(grid)
        e.x[:, 1:-1, 1:-1] = 1.0
        val = energy(FieldState(e, FaceField.zeros(grid), 0.0), m, grid)
        expected = 0.5 * naive_inner(e.components, e.components, grid.dv)
        assert val == pytest.approx(expected, rel=1e-14)
        kept = grid.n[0] * (grid.n[1] - 1) * (grid.n[2] - 1)
        assert val == pytest.approx(0.5 * kept * grid.dv, rel=1e-14)

    def test_random_state_vs_naive_loop(self, grid, rng):
        m = MaterialSet.homogeneous(grid)
        m.eps *= rng.uniform(0.5, 2.0, size=m.eps.shape)
        m.mu *= rng.uniform(0.5, 2.0, size=m.mu.shape)
        s = FieldState(random_edge(grid, rng), random_face(grid, rng), 0.0)
        eps_dof = naive_sample_edge(m.eps, grid.n)
        mu_dof = naive_sample_face(m.mu, grid.n)
        expected = 0.5 * (
            naive_inner([a * c for a, c in zip(eps_dof, s.e.components)],
                        s.e.components, grid.dv)
            + naive_inner([a * c for a, c in zip(mu_dof, s.h.components)],
                          s.h.components, grid.dv))
        assert energy(s, m, grid) == pytest.approx(expected, rel=1e-14)

    def test_nonnegative(self, grid, rng):
        m = MaterialSet.homogeneous(grid)
        for _ in range(10):
            s = FieldState(random_edge(grid, rng), random_face(grid, rng), 0.0)
            assert energy(s, m, grid) >= 0.0


class TestJoulePower:
    def test_zero_current(self, grid, rng):
        s = FieldState(random_edge(grid, rng), random_face(grid, rng), 0.0)
        assert joule_power(s, EdgeField.zeros(grid), grid) == 0.0

    def test_self_current_nonnegative(self, grid, rng):
        e = random_edge(grid, rng)
        s = FieldState(e, random_face(grid, rng), 0.0)
        assert joule_power(s, e, grid) == pytest.approx(inner(e, e, grid))

    def test_random_vs_naive(self, grid, rng):
        e, j = random_edge(grid, rng), random_edge(grid, rng)
        s = FieldState(e, FaceField.zeros(grid), 0.0)
        expected = naive_inner(j.components, e.components, grid.dv)
        assert joule_power(s, j, grid) == pytest.approx(expected, rel=1e-14)


class TestPoyntingFlux:
    def test_zero_fields(self, grid):
        assert poynting_flux(FieldState.zeros(grid), grid) == 0.0

    def test_conforming_e_gives_zero_flux(self, grid, rng):
        s = FieldState(random_edge(grid, rng), random_face(grid, rng), 0.0)
        scale = norm(s.e, grid) * norm(s.h, grid)
        assert abs(poynting_flux(s, grid)) <= 1e-13 * scale

    def test_unmasked_uniform_fields_cancel_by_symmetry(self, grid):
        # e = (1,0,0), h = (0,1,0): top and bottom walls carry +/- area
        e = EdgeField(*(np.zeros(sh) for sh in grid.edge_shapes))
        e.x[...] = 1.0
        h = FaceField(*(np.zeros(sh) for sh in grid.face_shapes))
        h.y[...] = 1.0
        s = FieldState(e, h, 0.0)
        assert poynting_flux(s, grid) == pytest.approx(0.0, abs=1e-14)

    def test_unmasked_half_space_field_gives_area(self, grid):
        # kill the bottom contribution: the top wall then contributes
        # exactly its area
        e = EdgeField(*(np.zeros(sh) for sh in grid.edge_shapes))
        e.x[:, :, -1] = 1.0
        h = FaceField(*(np.zeros(sh) for sh in grid.face_shapes))
        h.y[:, :, -1] = 1.0
        s = FieldState(e, h, 0.0)
        lx, ly, _ = grid.extent
        assert poynting_flux(s, grid) == pytest.approx(lx * ly, rel=1e-14)


class TestLedger:
    def _run(self, sigma=0.0, steps=50):
        g = build_grid((6, 6, 6), (1.0, 1.0, 1.0))
        m = MaterialSet.homogeneous(g, sigma=(sigma,) * 3)
        from poynting.cli.scenarios import cavity_mode
        e0, _ = cavity_mode(g, 0.0)
        s0 = FieldState(e0, FaceField.zeros(g), 0.0)
        cfg = StepperConfig(dt=0.01, cg_tol=1e-13)
        return simulate(g, m, s0, cfg, steps).ledger

    def test_zero_run_residual(self):
        g = build_grid((4, 4, 4), (1.0, 1.0, 1.0))
        m = MaterialSet.homogeneous(g)
        led = simulate(g, m, FieldState.zeros(g), StepperConfig(dt=0.01), 5).ledger
        assert balance_residual(led) == 0.0

    def test_conservative_run(self):
        led = self._run()
        assert balance_residual(led) <= 1e-10

    def test_damped_run(self):
        led = self._run(sigma=0.5)
        assert balance_residual(led) <= 1e-10
        assert np.all(np.diff(led.energy) <= 1e-12 * led.energy[0])

    def test_rows_and_invariants(self):
        led = self._run(steps=10)
        rows = list(led.rows())
        assert len(rows) == 11
        assert rows[0][5] == 0.0  # residual starts at zero
        assert np.all(np.diff(led.t) > 0)
        assert np.all(led.energy >= 0.0)

    def test_empty_ledger_rejected(self):
        with pytest.raises(ContractViolationError):
            balance_residual(EnergyLedger())

    def test_non_monotone_time_rejected(self):
        led = EnergyLedger()
        led.append(0.0, 1.0, 0.0, 0.0, 0.0)
        with pytest.raises(ContractViolationError):
            led.append(0.0, 1.0, 0.0, 0.0, 0.0)

    def test_flux_nullity_gate(self):
        led = self._run(steps=10)
        assert flux_nullity(led) <= 1e-13


class TestEnergyBound:
    def test_conservative_run_equality_margin(self):
        g = build_grid((6, 6, 6), (1.0, 1.0, 1.0))
        m = MaterialSet.homogeneous(g)
        from poynting.cli.scenarios import cavity_mode
        e0, _ = cavity_mode(g, 0.0)
        led = simulate(g, m, FieldState(e0, FaceField.zeros(g), 0.0),
                       StepperConfig(dt=0.01, cg_tol=1e-13), 50).ledger
        assert energy_bound_check(led, led.j_norm, led.e_norm)
        # j = 0: max E equals E(0) up to solver noise
        assert abs(energy_bound_margin(led, led.j_norm, led.e_norm)) <= \
            1e-10 * led.energy[0]

    def test_damped_run(self):
        g = build_grid((6, 6, 6), (1.0, 1.0, 1.0))
        m = MaterialSet.homogeneous(g, sigma=(0.5, 0.5, 0.5))
        from poynting.cli.scenarios import cavity_mode
        e0, _ = cavity_mode(g, 0.0)
        led = simulate(g, m, FieldState(e0, FaceField.zeros(g), 0.0),
                       StepperConfig(dt=0.01, cg_tol=1e-13), 50).ledger
        assert energy_bound_check(led, led.j_norm, led.e_norm)
        assert energy_bound_margin(led, led.j_norm, led.e_norm) > 0.0

    def test_driven_run(self):
        from poynting.materials import CurrentSpec
        g = build_grid((6, 6, 6), (1.0, 1.0, 1.0))
        j1 = CurrentSpec(preset="gaussian-pulse", amplitude=(0.0, 0.0, 1.0),
                         t_center=0.2, tau=0.06)
        m = MaterialSet.homogeneous(g, j1=j1)
        led = simulate(g, m, FieldState.zeros(g),
                       StepperConfig(dt=0.01, cg_tol=1e-13), 60).ledger
        assert led.energy.max() > 0.0
        assert energy_bound_check(led, led.j_norm, led.e_norm)
