#!/usr/bin/python
#
# Copyright (c) 2026 The osmoflow developers
#
# Copying and distribution of this file, with or without modification,
# are permitted in any medium without royalty provided the copyright
# notice and this notice are preserved.
"""Unit tests for the slope, dissipation and convexity diagnostics."""
import math
import os
import unittest

import numpy as np

from osmoflow import diagnostics
from osmoflow.energy import equilibrium_state, zlogz
from osmoflow.geometry import PERMEABILITY
from osmoflow.jko import JkoConfig, run_flow
from osmoflow.profile import gaussian_profile, uniform_profile
from osmoflow.state import MetricConfig, RadialState, random_state

SLOW = bool(os.environ.get("OSMOFLOW_SLOW_TESTS"))


class TestSlope(unittest.TestCase):
    """Test local_slope() and its parts."""

    def setUp(self):
        self.f = zlogz()
        self.unit = RadialState(1.0, uniform_profile(1.0, 2, 50))

    def test_boundary_density(self):
        """diagnostics: uniform profiles extrapolate to their density"""
        self.assertAlmostEqual(diagnostics.boundary_density(self.unit),
                               1 / math.pi, places=12)
        single = RadialState(1.0, uniform_profile(1.0, 2, 1))
        self.assertAlmostEqual(diagnostics.boundary_density(single),
                               1 / math.pi, places=12)

    def test_boundary_density_clamped(self):
        """diagnostics: boundary density is never negative"""
        s = RadialState(1.0, gaussian_profile(0.2, 0.9, 2, 40))
        self.assertGreaterEqual(diagnostics.boundary_density(s), 0.0)

    def test_unit_ball(self):
        """diagnostics: slope of the uniform state on B_1"""
        report = diagnostics.local_slope(self.unit, self.f, MetricConfig(2))
        self.assertAlmostEqual(report.interior_term, 0.0, places=15)
        self.assertAlmostEqual(report.slope,
                               (1 - 1 / math.pi) * math.sqrt(2 * math.pi),
                               places=10)
        self.assertAlmostEqual(report.slope, 1.70874, places=5)

    def test_unit_ball_permeable(self):
        """diagnostics: permeability slope of the uniform state on B_1"""
        cfg = MetricConfig(2, variant=PERMEABILITY)
        report = diagnostics.local_slope(self.unit, self.f, cfg)
        self.assertAlmostEqual(report.slope, 1 - 1 / math.pi, places=10)
        self.assertAlmostEqual(report.slope, 0.68169, places=5)

    def test_equilibrium(self):
        """diagnostics: the equilibrium has zero slope"""
        for n in (2, 3):
            eq = equilibrium_state(self.f, n, 40)
            report = diagnostics.local_slope(eq, self.f, MetricConfig(n))
            self.assertLess(report.slope, 1e-10)

    def test_quantile_gradient(self):
        """diagnostics: quantile gradient vanishes for uniform profiles and
        has the sign of the pressure drop otherwise"""
        np.testing.assert_allclose(
            diagnostics.quantile_gradient(self.unit, self.f), 0, atol=1e-9)
        s = RadialState(1.0, gaussian_profile(0.3, 0.9, 2, 40))
        grad = diagnostics.quantile_gradient(s, self.f)
        self.assertEqual(len(grad), 40)
        self.assertLess(np.median(grad), 0)

    def test_lyapunov_rate(self):
        """diagnostics: strong energy rate is minus the squared slope"""
        s = RadialState(1.0, gaussian_profile(0.3, 0.9, 2, 40))
        cfg = MetricConfig(2, 0.5)
        self.assertAlmostEqual(diagnostics.lyapunov_rate(s, self.f, cfg),
                               -diagnostics.local_slope(s, self.f,
                                                        cfg).slope ** 2)

    def test_kappa(self):
        """diagnostics: kappa scales the interior term"""
        s = RadialState(1.0, gaussian_profile(0.3, 0.9, 2, 40))
        one = diagnostics.local_slope(s, self.f, MetricConfig(2, 1.0))
        two = diagnostics.local_slope(s, self.f, MetricConfig(2, 2.0))
        self.assertAlmostEqual(two.interior_term, 2 * one.interior_term)
        self.assertAlmostEqual(two.boundary_term, one.boundary_term)


class TestDissipation(unittest.TestCase):
    """Test the dissipation identity along flows."""

    @classmethod
    def setUpClass(cls):
        cls.f = zlogz()
        cls.cfg = MetricConfig(2)
        cls.tau = 0.005
        initial = RadialState(1.0, uniform_profile(1.0, 2, 40))
        cls.uniform = run_flow(initial, 0.2, cls.f, cls.cfg,
                               JkoConfig(tau=cls.tau, M=40))
        initial = RadialState(1.0, gaussian_profile(0.4, 1.0, 2, 60))
        cls.gaussian = run_flow(initial, 0.2, cls.f, cls.cfg,
                                JkoConfig(tau=cls.tau, M=60))
        cls.gaussian_fine = run_flow(initial, 0.2, cls.f, cls.cfg,
                                     JkoConfig(tau=0.5 * cls.tau, M=60))

    def test_constant(self):
        """diagnostics: the equilibrium flow has no dissipation"""
        eq = equilibrium_state(self.f, 2, 20)
        traj = run_flow(eq, 0.3, self.f, self.cfg, JkoConfig(tau=0.1, M=20))
        sample = diagnostics.dissipation_residual(traj, 0.1, self.f,
                                                  self.cfg)
        self.assertLess(abs(sample.residual), 1e-12)

    def test_uniform_flow(self):
        """diagnostics: shrinking uniform state satisfies the identity"""
        samples = diagnostics.dissipation_series(self.uniform, self.f,
                                                 self.cfg)
        self.assertEqual(len(samples), len(self.uniform) - 2)
        self.assertLess(diagnostics.max_dissipation_ratio(
            samples, t_min=10 * self.tau), 0.05)

    def test_gaussian_flow(self):
        """diagnostics: gaussian initial state satisfies the identity"""
        samples = diagnostics.dissipation_series(self.gaussian, self.f,
                                                 self.cfg)
        self.assertLess(diagnostics.max_dissipation_ratio(
            samples, t_min=10 * self.tau), 0.2)

    def test_refinement(self):
        """diagnostics: halving the step shrinks the dissipation residual"""
        ratios = []
        for traj in (self.gaussian, self.gaussian_fine):
            samples = diagnostics.dissipation_series(traj, self.f, self.cfg)
            ratios.append(diagnostics.max_dissipation_ratio(
                samples, t_min=10 * self.tau))
        self.assertLess(ratios[1], ratios[0])

    def test_chain_rule(self):
        """diagnostics: chain rule rate agrees with the energy differences"""
        for traj in (self.uniform, self.gaussian):
            for t in (0.1, 0.15):
                sample = diagnostics.dissipation_residual(traj, t, self.f,
                                                          self.cfg)
                chain = diagnostics.energy_rate(traj, t, self.f, self.cfg)
                self.assertLess(abs(chain - sample.rate),
                                0.05 * abs(sample.rate))

    def test_range(self):
        """diagnostics: only interior nodes have derivatives"""
        sample = diagnostics.dissipation_residual(self.uniform, 0.0, self.f,
                                                  self.cfg)
        self.assertAlmostEqual(sample.t, self.tau)
        self.assertRaises(diagnostics.RangeError,
                          diagnostics.dissipation_residual, self.uniform,
                          5.0, self.f, self.cfg)

    def test_tables(self):
        """diagnostics: table rows follow the headers"""
        header, rows = diagnostics.trajectory_table(self.uniform, self.f,
                                                    self.cfg)
        self.assertEqual(len(rows), len(self.uniform))
        self.assertTrue(all(len(row) == len(header) for row in rows))
        self.assertTrue(math.isnan(rows[0][-1]))
        header, rows = diagnostics.diagnostics_table(
            self.uniform, self.f, self.cfg,
            probe=equilibrium_state(self.f, 2, 40))
        self.assertEqual(header, diagnostics.DIAGNOSTICS_HEADER)
        self.assertEqual(len(rows), len(self.uniform) - 2)
        self.assertFalse(math.isnan(rows[0][-1]))


class TestEvi(unittest.TestCase):
    """Test the evolution variational inequality residual."""

    @classmethod
    def setUpClass(cls):
        cls.f = zlogz()
        cls.cfg = MetricConfig(3)
        rng = np.random.default_rng(17)
        cls.traj = run_flow(random_state(rng, 3, 30), 0.06, cls.f, cls.cfg,
                            JkoConfig(tau=2e-3, M=30))
        cls.probes = [random_state(rng, 3, 30) for _ in range(3)]
        cls.probes.append(equilibrium_state(cls.f, 3, 30))

    def test_convex_flow(self):
        """diagnostics: EVI holds up to the one step energy drop"""
        energies = self.traj.energies()
        slack = 0.5 * (energies[1:-1] - energies[2:]) + 1e-7
        for probe in self.probes:
            values = diagnostics.evi_series(self.traj, probe, 0.0, self.f,
                                            self.cfg)
            self.assertTrue(np.all(values <= slack), values - slack)

    def test_overstated_modulus(self):
        """diagnostics: a modulus of +10 breaks EVI on the way to the
        equilibrium"""
        initial = RadialState(1.0, uniform_profile(1.0, 3, 30))
        traj = run_flow(initial, 0.02, self.f, self.cfg,
                        JkoConfig(tau=2e-3, M=30))
        probe = equilibrium_state(self.f, 3, 30)
        energies = traj.energies()
        slack = 0.5 * (energies[1:-1] - energies[2:]) + 1e-7
        flat = diagnostics.evi_series(traj, probe, 0.0, self.f, self.cfg)
        self.assertTrue(np.all(flat <= slack), flat - slack)
        steep = diagnostics.evi_series(traj, probe, 10.0, self.f, self.cfg)
        self.assertTrue(np.all(steep > 1.0), steep)

    def test_single(self):
        """diagnostics: evi_residual() matches the series"""
        probe = self.probes[0]
        values = diagnostics.evi_series(self.traj, probe, 0.0, self.f,
                                        self.cfg)
        self.assertAlmostEqual(
            diagnostics.evi_residual(self.traj, self.traj.times[3], probe,
                                     0.0, self.f, self.cfg),
            values[2])

    def test_probe_on_curve(self):
        """diagnostics: probing with the current state"""
        k = 5
        value = diagnostics.evi_residual(self.traj, self.traj.times[k],
                                         self.traj.states[k], 0.0, self.f,
                                         self.cfg)
        energies = self.traj.energies()
        self.assertLessEqual(value,
                             0.5 * (energies[k] - energies[k + 1]) + 1e-7)


class TestConvexity(unittest.TestCase):
    """Test convexity_probe() and contraction_report()."""

    def setUp(self):
        self.f = zlogz()
        self.rng = np.random.default_rng(23)

    def test_same_endpoints(self):
        """diagnostics: degenerate geodesics have no defect"""
        cfg = MetricConfig(3)
        a = random_state(self.rng, 3, 20)
        report = diagnostics.convexity_probe(a, a, a, 5, 0.1, self.f, cfg)
        self.assertEqual(report.energy_defect, 0.0)
        self.assertTrue(report.passed())

    def test_three_dimensions(self):
        """diagnostics: energy is convex along geodesics for n = 3"""
        cfg = MetricConfig(3, 0.5)
        for _ in range(5):
            a, b, w = [random_state(self.rng, 3, 20) for _ in range(3)]
            report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                 cfg)
            self.assertTrue(report.passed(), vars(report))
            self.assertEqual(report.energy_lambda, 0.0)
            self.assertAlmostEqual(report.dist_defect, 0.0, places=9)

    def test_overstated_modulus(self):
        """diagnostics: a modulus of +10 fails the three point test"""
        cfg = MetricConfig(3)
        a = RadialState(1.0, uniform_profile(1.0, 3, 20))
        b = equilibrium_state(self.f, 3, 20)
        w = random_state(self.rng, 3, 20)
        report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f, cfg)
        self.assertTrue(report.passed(), vars(report))
        self.assertLess(report.energy_modulus, 10.0)
        report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f, cfg,
                                             lam=10.0)
        self.assertFalse(report.passed())
        self.assertLess(report.energy_defect, -0.1)
        for _ in range(5):
            a, b, w = [random_state(self.rng, 3, 20) for _ in range(3)]
            modulus = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                  cfg).energy_modulus
            report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                 cfg, lam=modulus + 1.0)
            self.assertFalse(report.passed())

    @unittest.skipUnless(SLOW, "set OSMOFLOW_SLOW_TESTS to run")
    def test_three_dimensions_full(self):
        """diagnostics: five hundred random triples for n = 3"""
        cfg = MetricConfig(3)
        rng = np.random.default_rng(29)
        failed = 0
        for _ in range(500):
            a, b, w = [random_state(rng, 3, 20) for _ in range(3)]
            report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                 cfg)
            self.assertTrue(report.passed(), vars(report))
            report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                 cfg, lam=10.0)
            failed += not report.passed()
        self.assertGreater(failed, 250)

    def test_two_dimensions(self):
        """diagnostics: perimeter modulus bounds the defect for n = 2"""
        cfg = MetricConfig(2)
        for _ in range(5):
            a, b, w = [random_state(self.rng, 2, 20) for _ in range(3)]
            report = diagnostics.convexity_probe(a, b, w, 9, 0.1, self.f,
                                                 cfg)
            self.assertLess(report.modulus_bound, 0)
            self.assertTrue(report.passed(), vars(report))
            self.assertGreaterEqual(report.energy_modulus,
                                    report.modulus_bound - 1e-6)

    def test_contraction_identical(self):
        """diagnostics: identical flows have ratio zero"""
        cfg = MetricConfig(2)
        eq = equilibrium_state(self.f, 2, 10)
        traj = run_flow(eq, 0.2, self.f, cfg, JkoConfig(tau=0.1, M=10))
        report = diagnostics.contraction_report(traj, traj, -1.0, cfg)
        self.assertEqual(report.max_ratio, 0.0)
        self.assertEqual(report.max_excess, 0.0)
        short = run_flow(eq, 0.1, self.f, cfg, JkoConfig(tau=0.1, M=10))
        self.assertRaises(diagnostics.RangeError,
                          diagnostics.contraction_report, traj, short, 0.0,
                          cfg)


if __name__ == "__main__":
    unittest.main()
