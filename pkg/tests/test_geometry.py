#!/usr/bin/python
#
# Copyright (c) 2026 The osmoflow developers
#
# Copying and distribution of this file, with or without modification,
# are permitted in any medium without royalty provided the copyright
# notice and this notice are preserved.
"""Unit tests for the ball metrics in osmoflow.geometry."""
import math
import unittest

import numpy as np
from scipy.integrate import quad

from osmoflow import geometry
from osmoflow.geometry import PERMEABILITY, SURFACE_TENSION


class TestDimension(unittest.TestCase):
    """Test geometry.Dimension."""

    def test_omega(self):
        """geometry: unit ball volumes for n = 2, 3, 4"""
        self.assertAlmostEqual(geometry.Dimension(2).omega, math.pi)
        self.assertAlmostEqual(geometry.Dimension(3).omega, 4 * math.pi / 3)
        self.assertAlmostEqual(geometry.Dimension(4).omega,
                               math.pi ** 2 / 2)

    def test_invalid(self):
        """geometry: dimensions below two are rejected"""
        for n in (1, 0, -3, 2.5, "two", None):
            self.assertRaises(geometry.DomainError, geometry.Dimension, n)

    def test_identity(self):
        """geometry: Dimension equality and hashing"""
        self.assertEqual(geometry.Dimension(3), geometry.Dimension(3))
        self.assertNotEqual(geometry.Dimension(2), geometry.Dimension(3))
        self.assertEqual(geometry.Dimension(geometry.Dimension(2)).n, 2)
        self.assertEqual(len(set([geometry.Dimension(2),
                                  geometry.Dimension(2)])), 1)


class TestPerimeter(unittest.TestCase):
    """Test perimeter() and ball_volume()."""

    def test_values(self):
        """geometry: perimeter of the unit sphere"""
        self.assertAlmostEqual(geometry.perimeter(1, 2), 2 * math.pi)
        self.assertAlmostEqual(geometry.perimeter(1, 3), 4 * math.pi)
        self.assertEqual(geometry.perimeter(0, 3), 0)

    def test_domain(self):
        """geometry: negative and infinite radii are rejected"""
        self.assertRaises(geometry.DomainError, geometry.perimeter, -1, 2)
        self.assertRaises(geometry.DomainError, geometry.perimeter,
                          float("inf"), 2)
        self.assertRaises(geometry.DomainError, geometry.perimeter, 0, 2,
                          True)

    def test_derivative(self):
        """geometry: perimeter_derivative() matches a difference quotient"""
        h = 1e-6
        for n in (2, 3, 5):
            fd = (geometry.perimeter(1.3 + h, n) -
                  geometry.perimeter(1.3 - h, n)) / (2 * h)
            self.assertAlmostEqual(geometry.perimeter_derivative(1.3, n), fd,
                                   places=6)

    def test_vectorized(self):
        """geometry: perimeter() accepts arrays"""
        values = geometry.perimeter(np.array([0.0, 1.0, 2.0]), 2)
        np.testing.assert_allclose(values, [0, 2 * math.pi, 4 * math.pi])


class TestSetDist(unittest.TestCase):
    """Test the two radius distances."""

    def test_identical(self):
        """geometry: distance of a radius to itself is zero"""
        for variant in (SURFACE_TENSION, PERMEABILITY):
            self.assertEqual(geometry.radius_dist(0.7, 0.7, 3, variant), 0)

    def test_closed_form(self):
        """geometry: surface tension distance from the origin"""
        self.assertAlmostEqual(geometry.set_dist(0, 1, 2),
                               2 * math.sqrt(2 * math.pi) / 3, places=12)
        self.assertAlmostEqual(geometry.set_dist(0, 1, 2), 1.67109, places=5)

    def test_path_integral(self):
        """geometry: distance equals the integral of sqrt(P_n)"""
        for n in (2, 3, 4):
            value, _err = quad(
                lambda rho: math.sqrt(geometry.perimeter(rho, n)), 1, 2,
                epsabs=1e-13, epsrel=1e-13)
            self.assertAlmostEqual(geometry.set_dist(1, 2, n) / value, 1.0,
                                   places=10)

    def test_permeable(self):
        """geometry: permeability distance is the volume difference"""
        self.assertAlmostEqual(geometry.set_dist_permeable(1, 2, 2),
                               3 * math.pi)
        self.assertAlmostEqual(geometry.set_dist_permeable(0, 1, 3),
                               4 * math.pi / 3)

    def test_symmetric_triangle(self):
        """geometry: distances are symmetric and satisfy the triangle law"""
        rng = np.random.default_rng(7)
        for variant in (SURFACE_TENSION, PERMEABILITY):
            for _ in range(50):
                a, b, c = rng.uniform(0, 3, 3)
                def d(x, y, variant=variant):
                    return geometry.radius_dist(x, y, 3, variant)
                self.assertAlmostEqual(d(a, b), d(b, a))
                self.assertLessEqual(d(a, c), d(a, b) + d(b, c) + 1e-12)

    def test_unknown_variant(self):
        """geometry: unknown metric variants are rejected"""
        self.assertRaises(geometry.DomainError, geometry.radius_dist,
                          1, 2, 2, "elastic")


class TestIsometry(unittest.TestCase):
    """Test iota() and its inverse."""

    def test_origin(self):
        """geometry: iota(0) is zero"""
        self.assertEqual(geometry.iota(0, 2), 0)

    def test_round_trip(self):
        """geometry: iota_inverse(iota(r)) returns r"""
        for n in (2, 3, 6):
            for variant in (SURFACE_TENSION, PERMEABILITY):
                s = geometry.radius_iota(0.7, n, variant)
                self.assertAlmostEqual(
                    geometry.radius_iota_inverse(s, n, variant), 0.7,
                    places=14)

    def test_isometry(self):
        """geometry: iota turns the distance into an absolute difference"""
        self.assertEqual(abs(geometry.iota(1, 2) - geometry.iota(2, 2)),
                         geometry.set_dist(1, 2, 2))

    def test_derivatives(self):
        """geometry: radius_iota_derivative() matches difference quotients"""
        h = 1e-5
        for variant in (SURFACE_TENSION, PERMEABILITY):
            for order in (1, 2):
                def lower(r):
                    if order == 1:
                        return geometry.radius_iota(r, 3, variant)
                    return geometry.radius_iota_derivative(r, 3, variant)
                fd = (lower(1.2 + h) - lower(1.2 - h)) / (2 * h)
                exact = geometry.radius_iota_derivative(1.2, 3, variant,
                                                        order)
                self.assertAlmostEqual(exact / fd, 1.0, places=7)

    def test_metric_weight(self):
        """geometry: first derivative of iota is sqrt(P_n)"""
        self.assertAlmostEqual(
            geometry.radius_iota_derivative(1.5, 2),
            math.sqrt(geometry.perimeter(1.5, 2)), places=12)


class TestGeodesic(unittest.TestCase):
    """Test ball_geodesic()."""

    def test_endpoints(self):
        """geometry: geodesic endpoints"""
        for variant in (SURFACE_TENSION, PERMEABILITY):
            self.assertAlmostEqual(
                geometry.ball_geodesic(0.4, 1.9, 0, variant, 2), 0.4)
            self.assertAlmostEqual(
                geometry.ball_geodesic(0.4, 1.9, 1, variant, 2), 1.9)

    def test_midpoints(self):
        """geometry: closed form midpoints for both variants"""
        self.assertAlmostEqual(
            geometry.ball_geodesic(0, 1, 0.5, SURFACE_TENSION, 2),
            0.5 ** (2.0 / 3), places=12)
        self.assertAlmostEqual(
            geometry.ball_geodesic(1, 2, 0.5, PERMEABILITY, 2),
            math.sqrt(2.5), places=12)

    def test_constant_speed(self):
        """geometry: geodesics are constant speed curves"""
        taus = np.linspace(0, 1, 11)
        for variant in (SURFACE_TENSION, PERMEABILITY):
            rs = geometry.ball_geodesic(0.3, 2.2, taus, variant, 3)
            total = geometry.radius_dist(0.3, 2.2, 3, variant)
            for t, r in zip(taus, rs):
                self.assertAlmostEqual(
                    geometry.radius_dist(0.3, r, 3, variant), t * total,
                    places=10)

    def test_domain(self):
        """geometry: geodesic parameter outside [0, 1] is rejected"""
        self.assertRaises(geometry.DomainError, geometry.ball_geodesic,
                          1, 2, 1.5, SURFACE_TENSION, 2)
        self.assertRaises(geometry.DomainError, geometry.ball_geodesic,
                          1, 2, -0.1, PERMEABILITY, 2)


class TestPerimeterModulus(unittest.TestCase):
    """Test perimeter_modulus()."""

    def test_flat_in_three_dimensions(self):
        """geometry: perimeter is linear along geodesics for n = 3"""
        self.assertEqual(
            geometry.perimeter_modulus(0.2, 4.0, 3, SURFACE_TENSION), 0)
        rs = geometry.ball_geodesic(0.5, 2.0, np.linspace(0, 1, 5),
                                    SURFACE_TENSION, 3)
        np.testing.assert_allclose(
            np.diff(geometry.perimeter(rs, 3), 2), 0, atol=1e-12)

    def test_concave_cases(self):
        """geometry: modulus is negative for the concave cases"""
        self.assertLess(
            geometry.perimeter_modulus(0.5, 2, 2, SURFACE_TENSION), 0)
        self.assertLess(
            geometry.perimeter_modulus(0.5, 2, 3, PERMEABILITY), 0)

    def test_second_difference(self):
        """geometry: modulus matches the second derivative at the worst
        endpoint"""
        h = 1e-4
        for n, variant in ((2, SURFACE_TENSION), (3, PERMEABILITY)):
            s = geometry.radius_iota(0.5, n, variant)

            def g(x):
                return geometry.perimeter(
                    geometry.radius_iota_inverse(x, n, variant), n)
            fd = (g(s + h) - 2 * g(s) + g(s - h)) / h ** 2
            exact = geometry.perimeter_modulus(0.5, 2.0, n, variant)
            self.assertAlmostEqual(exact / fd, 1.0, places=4)

    def test_empty_interval(self):
        """geometry: reversed intervals are rejected"""
        self.assertRaises(geometry.DomainError, geometry.perimeter_modulus,
                          2, 1, 2)


if __name__ == "__main__":
    unittest.main()
