#!/usr/bin/python
#
# Copyright (c) 2026 The osmoflow developers
#
# Copying and distribution of this file, with or without modification,
# are permitted in any medium without royalty provided the copyright
# notice and this notice are preserved.
"""Unit tests for the strong solver and the weak form residuals."""
import math
import os
import unittest

import numpy as np
from scipy.integrate import quad

from osmoflow import pde_oracle
from osmoflow.energy import (cell_densities, equilibrium_state, square,
                             zlogz)
from osmoflow.geometry import DomainError, PERMEABILITY, perimeter
from osmoflow.jko import JkoConfig, StepRecord, Trajectory, run_flow
from osmoflow.profile import (MassError, gaussian_density, gaussian_profile,
                              uniform_profile)
from osmoflow.scaling import PhysicalParams
from osmoflow.state import MetricConfig, RadialState

SLOW = bool(os.environ.get("OSMOFLOW_SLOW_TESTS"))


def moving_ball(times, radius):
    """Trajectory of a uniform profile in a ball of radius radius(t)."""
    traj = Trajectory(MetricConfig(2))
    for t in times:
        r = radius(t)
        traj.append(t, RadialState(r, uniform_profile(0.5 * r, 2, 10)),
                    StepRecord(None))
    return traj


class TestOracleGrid(unittest.TestCase):
    """Test OracleGrid."""

    def test_invalid(self):
        """pde_oracle: invalid grids are rejected"""
        self.assertRaises(DomainError, pde_oracle.OracleGrid, cells=1)
        self.assertRaises(DomainError, pde_oracle.OracleGrid, dt=0)
        self.assertRaises(DomainError, pde_oracle.OracleGrid,
                          scheme="spectral")
        self.assertRaises(DomainError, pde_oracle.OracleGrid, quantiles=0)


class TestStrongSolver(unittest.TestCase):
    """Test StrongSolver and solve_strong()."""

    def setUp(self):
        self.f = zlogz()
        self.cfg = MetricConfig(2)

    def test_discretize_state(self):
        """pde_oracle: uniform states give uniform cell densities"""
        solver = pde_oracle.StrongSolver(self.f, self.cfg,
                                         pde_oracle.OracleGrid(cells=50))
        state = RadialState(1.0, uniform_profile(1.0, 2, 40))
        r, m = solver.discretize(state)
        self.assertEqual(r, 1.0)
        self.assertAlmostEqual(m.sum(), 1.0, places=14)
        np.testing.assert_allclose(solver.densities(r, m), 1 / math.pi,
                                   rtol=1e-10)

    def test_discretize_density(self):
        """pde_oracle: densities need a radius and the right mass"""
        solver = pde_oracle.StrongSolver(self.f, self.cfg,
                                         pde_oracle.OracleGrid(cells=50))
        u = gaussian_density(0.3, 1.0, 2)
        self.assertRaises(DomainError, solver.discretize, u)
        r, m = solver.discretize(u, 1.0)
        self.assertAlmostEqual(m.sum(), 1.0, places=12)
        self.assertRaises(MassError, solver.discretize, u.scaled(1.0, 2.0),
                          1.0)
        self.assertRaises(TypeError, solver.discretize, [0.1, 0.2])

    def test_physical_integrand(self):
        """pde_oracle: physical coefficients need z log z"""
        self.assertRaises(DomainError, pde_oracle.StrongSolver, square(),
                          self.cfg, pde_oracle.OracleGrid(),
                          PhysicalParams(2, sigma=2.0))

    def test_equilibrium(self):
        """pde_oracle: the equilibrium is stationary"""
        for variant in ("surface-tension", PERMEABILITY):
            cfg = MetricConfig(2, 1.0, variant)
            eq = equilibrium_state(self.f, 2, 100)
            grid = pde_oracle.OracleGrid(cells=100, dt=0.01, quantiles=100,
                                         record_every=10)
            traj = pde_oracle.solve_strong(eq, 1.0, self.f, cfg, grid)
            self.assertEqual(len(traj), 11)
            np.testing.assert_allclose(traj.radii(), eq.r, rtol=1e-8)

    def test_mass_and_energy(self):
        """pde_oracle: mass is conserved and energy decreases"""
        grid = pde_oracle.OracleGrid(cells=100, dt=2e-3)
        solver = pde_oracle.StrongSolver(self.f, self.cfg, grid)
        r, m = solver.discretize(gaussian_density(0.3, 1.0, 2), 1.0)
        energy = solver.energy(r, m)
        start = energy.total
        for _ in range(50):
            r, m, new = solver.advance(r, m, grid.dt, energy)
            self.assertLessEqual(new.total, energy.total + 1e-8)
            energy = new
        self.assertAlmostEqual(m.sum(), 1.0, places=11)
        self.assertLess(energy.total, start)
        self.assertLess(r, 1.0)

    def test_explicit(self):
        """pde_oracle: explicit and semi-implicit schemes agree"""
        initial = RadialState(1.0, gaussian_profile(0.3, 0.9, 2, 50))
        finals = []
        for scheme in pde_oracle.SCHEMES:
            grid = pde_oracle.OracleGrid(cells=60, dt=1e-3, scheme=scheme,
                                         quantiles=50, record_every=50)
            traj = pde_oracle.solve_strong(initial, 0.1, self.f, self.cfg,
                                           grid)
            energies = traj.energies()
            self.assertTrue(np.all(np.diff(energies) <= 1e-8))
            finals.append(traj.final.r)
        self.assertAlmostEqual(finals[0], finals[1], places=2)

    def test_trace(self):
        """pde_oracle: membrane trace is a linear extrapolation clamped
        at zero"""
        solver = pde_oracle.StrongSolver(self.f, self.cfg,
                                         pde_oracle.OracleGrid(cells=10))
        self.assertAlmostEqual(solver.trace(np.array([1.0, 2.0, 3.0])), 3.5)
        self.assertAlmostEqual(solver.trace(np.full(4, 0.3)), 0.3)
        self.assertEqual(solver.trace(np.array([1.0, 1.0, 0.1])), 0.0)
        self.assertAlmostEqual(solver.velocity(1.0, np.array([1.0, 0.1])),
                               -1.0)

    def test_horizon(self):
        """pde_oracle: horizons must be positive"""
        eq = equilibrium_state(self.f, 2, 20)
        self.assertRaises(DomainError, pde_oracle.solve_strong, eq, 0.0,
                          self.f, self.cfg)


class TestBump(unittest.TestCase):
    """Test BumpTestFunction."""

    def setUp(self):
        self.phi = pde_oracle.BumpTestFunction(0.5, 0.25, 0.8)

    def test_support(self):
        """pde_oracle: bump vanishes outside its time window"""
        self.assertEqual(float(self.phi.time_factor(0.2)), 0.0)
        self.assertEqual(float(self.phi.time_derivative(0.8)), 0.0)
        self.assertGreater(float(self.phi.time_factor(0.5)), 0.0)
        self.phi.check_window(0.0, 1.0)
        self.assertRaises(pde_oracle.TestFunctionError,
                          self.phi.check_window, 0.3, 1.0)

    def test_derivatives(self):
        """pde_oracle: bump derivatives match difference quotients"""
        h = 1e-6
        for t in (0.35, 0.5, 0.7):
            fd = (self.phi.time_factor(t + h) -
                  self.phi.time_factor(t - h)) / (2 * h)
            self.assertAlmostEqual(float(self.phi.time_derivative(t)),
                                   float(fd), places=6)
        for rho in (0.1, 0.9):
            fd = (self.phi.space_factor(rho + h) -
                  self.phi.space_factor(rho - h)) / (2 * h)
            self.assertAlmostEqual(float(self.phi.space_derivative(rho)),
                                   float(fd), places=6)

    def test_ball_integral(self):
        """pde_oracle: ball integral matches radial quadrature"""
        cfg = MetricConfig(3)
        for r in (0.3, 1.0, 2.5):
            value, _err = quad(lambda s: float(perimeter(s, 3) *
                                               self.phi.space_factor(s)),
                               0, r)
            self.assertAlmostEqual(float(self.phi.ball_integral(r, cfg.dim)),
                                   value, places=10)

    def test_family(self):
        """pde_oracle: default test functions fit the horizon"""
        for phi in pde_oracle.default_test_functions(2.0):
            phi.check_window(0.0, 2.0)

    def test_invalid(self):
        """pde_oracle: bumps need positive widths"""
        self.assertRaises(DomainError, pde_oracle.BumpTestFunction, 0.5, 0.0)


class TestWeakForms(unittest.TestCase):
    """Test the weak form residuals."""

    def setUp(self):
        self.f = zlogz()
        self.cfg = MetricConfig(2)

    def test_stationary(self):
        """pde_oracle: stationary trajectories satisfy both weak forms"""
        eq = equilibrium_state(self.f, 2, 50)
        traj = Trajectory(self.cfg)
        for t in np.linspace(0, 1, 1001):
            traj.append(t, eq, StepRecord(None))
        for phi in pde_oracle.default_test_functions(1.0):
            diffusion = pde_oracle.weak_residual_diffusion(traj, phi, self.f,
                                                           self.cfg)
            self.assertAlmostEqual(diffusion.residual, 0.0, places=7)
            boundary = pde_oracle.weak_residual_boundary(traj, phi, self.f,
                                                         self.cfg)
            self.assertAlmostEqual(boundary.residual, 0.0, places=7)

    def test_window(self):
        """pde_oracle: test functions must fit the trajectory"""
        traj = moving_ball(np.linspace(0, 1, 11), lambda t: 1.0)
        phi = pde_oracle.BumpTestFunction(0.9, 0.25)
        self.assertRaises(pde_oracle.TestFunctionError,
                          pde_oracle.weak_residual_diffusion, traj, phi,
                          self.f, self.cfg)
        self.assertRaises(pde_oracle.TestFunctionError,
                          pde_oracle.weak_residual_boundary, traj, phi,
                          self.f, self.cfg)

    def test_transport(self):
        """pde_oracle: boundary transport of a linearly growing ball"""
        traj = moving_ball(np.linspace(0, 1, 2001), lambda t: 1 + 0.1 * t)
        psi = pde_oracle.BumpTestFunction(0.5, 0.3, 1.5)
        value = pde_oracle.boundary_transport(traj, psi, self.cfg)
        exact, _err = quad(lambda t: float(-psi(1 + 0.1 * t, t) *
                                           perimeter(1 + 0.1 * t, 2) * 0.1),
                           0.2, 0.8, epsabs=1e-13)
        self.assertAlmostEqual(value, exact, places=7)
        lhs = pde_oracle.weak_residual_boundary(traj, psi, self.f,
                                                self.cfg).lhs
        self.assertAlmostEqual(lhs, exact, places=7)

    def test_strong_solution(self):
        """pde_oracle: strong solutions satisfy the weak forms"""
        initial = RadialState(1.0, gaussian_profile(0.4, 1.0, 2, 100))
        grid = pde_oracle.OracleGrid(cells=200, dt=1e-3, quantiles=100,
                                     record_every=5)
        traj = pde_oracle.solve_strong(initial, 0.2, self.f, self.cfg, grid)
        for phi in pde_oracle.default_test_functions(0.2):
            diffusion = pde_oracle.weak_residual_diffusion(traj, phi, self.f,
                                                           self.cfg)
            self.assertLess(diffusion.scaled, 0.05, diffusion)
            boundary = pde_oracle.weak_residual_boundary(traj, phi, self.f,
                                                         self.cfg)
            self.assertLess(boundary.scaled, 0.05, boundary)


    def test_minimizing_movement(self):
        """pde_oracle: minimizing movement flows satisfy the weak forms"""
        initial = RadialState(1.0, gaussian_profile(0.4, 1.0, 2, 100))
        traj = run_flow(initial, 0.2, self.f, self.cfg,
                        JkoConfig(tau=1e-3, M=100))
        for phi in pde_oracle.default_test_functions(0.2):
            diffusion = pde_oracle.weak_residual_diffusion(traj, phi, self.f,
                                                           self.cfg)
            self.assertLess(diffusion.scaled, 0.05, diffusion)
            boundary = pde_oracle.weak_residual_boundary(traj, phi, self.f,
                                                         self.cfg)
            self.assertLess(boundary.scaled, 0.05, boundary)


class TestCompare(unittest.TestCase):
    """Test compare()."""

    def setUp(self):
        self.f = zlogz()
        self.cfg = MetricConfig(2)

    def test_equilibrium(self):
        """pde_oracle: both solvers stay at the equilibrium"""
        eq = equilibrium_state(self.f, 2, 50)
        flow = run_flow(eq, 0.5, self.f, self.cfg, JkoConfig(tau=0.1, M=50))
        strong = pde_oracle.solve_strong(
            eq, 0.5, self.f, self.cfg,
            pde_oracle.OracleGrid(cells=100, dt=0.01, quantiles=50))
        report = pde_oracle.compare(flow, strong, self.cfg)
        self.assertEqual(len(report.times), len(flow))
        self.assertLess(report.max_distance, 1e-6)

    def test_mismatch(self):
        """pde_oracle: runs from different states are not compared"""
        eq = equilibrium_state(self.f, 2, 20)
        other = RadialState(1.0, uniform_profile(1.0, 2, 20))
        flow = run_flow(eq, 0.2, self.f, self.cfg, JkoConfig(tau=0.1, M=20))
        strong = pde_oracle.solve_strong(
            other, 0.2, self.f, self.cfg,
            pde_oracle.OracleGrid(cells=40, dt=0.01, quantiles=20))
        self.assertRaises(pde_oracle.SetupMismatch, pde_oracle.compare, flow,
                          strong, self.cfg)

    def check_flow(self, flow):
        energies = flow.energies()
        self.assertTrue(np.all(np.diff(energies) <= 1e-12), energies)
        for state in flow.states:
            widths, _masses, densities = cell_densities(state.u, state.r)
            self.assertAlmostEqual(np.sum(widths * densities), 1.0,
                                   places=12)

    def test_refinement(self):
        """pde_oracle: refining both solvers brings them closer"""
        distances = []
        for tau, M, cells in ((0.01, 50, 100), (0.005, 100, 200)):
            initial = RadialState(1.0, gaussian_profile(0.4, 1.0, 2, M))
            flow = run_flow(initial, 0.2, self.f, self.cfg,
                            JkoConfig(tau=tau, M=M))
            self.check_flow(flow)
            strong = pde_oracle.solve_strong(
                initial, 0.2, self.f, self.cfg,
                pde_oracle.OracleGrid(cells=cells, dt=0.1 * tau,
                                      quantiles=M))
            distances.append(
                pde_oracle.compare(flow, strong, self.cfg).max_distance)
        self.assertLess(distances[1], distances[0])

    @unittest.skipUnless(SLOW, "set OSMOFLOW_SLOW_TESTS to run")
    def test_desk_benchmark(self):
        """pde_oracle: flow and strong solution agree on the desk case"""
        initial = RadialState(1.0, gaussian_profile(0.4, 1.0, 2, 200))
        flow = run_flow(initial, 0.5, self.f, self.cfg,
                        JkoConfig(tau=1e-3, M=200))
        strong = pde_oracle.solve_strong(
            initial, 0.5, self.f, self.cfg,
            pde_oracle.OracleGrid(cells=400, dt=1e-3, quantiles=200))
        self.check_flow(flow)
        report = pde_oracle.compare(flow, strong, self.cfg)
        self.assertLessEqual(report.max_distance, 0.02)

    @unittest.skipUnless(SLOW, "set OSMOFLOW_SLOW_TESTS to run")
    def test_desk_benchmark_uniform(self):
        """pde_oracle: flow and strong solution agree from rest"""
        initial = RadialState(1.0, uniform_profile(1.0, 2, 100))
        flow = run_flow(initial, 0.5, self.f, self.cfg,
                        JkoConfig(tau=1e-3, M=100))
        self.check_flow(flow)
        strong = pde_oracle.solve_strong(
            initial, 0.5, self.f, self.cfg,
            pde_oracle.OracleGrid(cells=200, dt=1e-3, quantiles=100))
        report = pde_oracle.compare(flow, strong, self.cfg)
        self.assertLessEqual(report.max_distance, 1e-3)


if __name__ == "__main__":
    unittest.main()
