# geometry.py - balls centered at the origin and their radius metrics
#
#  Copyright (c) 2026 The osmoflow developers
#
#  This program is free software; you can redistribute it and/or
#  modify it under the terms of the GNU General Public License as
#  published by the Free Software Foundation; either version 2 of the
#  License, or (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program; if not, write to the Free Software
#  Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA 02111-1307
#  USA
"""Balls centered at the origin.

The radius is the only geometric degree of freedom of a radially symmetric
cell.  This module computes perimeters, the two radius metrics (surface
tension and permeability), their isometries to the half line and the
constant speed geodesics between radii.

All functions accept scalars as well as numpy arrays of radii.
"""
import math

import numpy as np
from scipy.special import gammaln

__all__ = ['SURFACE_TENSION', 'PERMEABILITY', 'VARIANTS', 'DomainError',
           'Dimension', 'check_variant', 'check_radius', 'perimeter',
           'perimeter_derivative', 'ball_volume', 'iota', 'iota_inverse',
           'iota_permeable', 'iota_permeable_inverse', 'radius_iota',
           'radius_iota_inverse', 'radius_iota_derivative', 'set_dist',
           'set_dist_permeable', 'radius_dist', 'radius_speed',
           'ball_geodesic', 'perimeter_modulus']

SURFACE_TENSION = "surface-tension"
PERMEABILITY = "permeability"
VARIANTS = (SURFACE_TENSION, PERMEABILITY)


class DomainError(ValueError):
    """A radius, dimension or curve parameter outside its domain."""


class Dimension(object):
    """The space dimension n and the volume of the unit ball in R^n.

    Dimension objects are immutable and compare equal to each other when
    their n agree.  A Dimension can be created from another Dimension.
    """

    def __init__(self, n):
        if isinstance(n, Dimension):
            n = n.n
        try:
            valid = int(n) == n and n >= 2
        except (TypeError, ValueError, OverflowError):
            valid = False
        if not valid:
            raise DomainError("dimension must be an integer >= 2, not %r" %
                              (n,))
        self._n = int(n)
        self._omega = math.exp(0.5 * self._n * math.log(math.pi) -
                               gammaln(0.5 * self._n + 1))

    @property
    def n(self):
        """The space dimension."""
        return self._n

    @property
    def omega(self):
        """The volume of the unit ball."""
        return self._omega

    @property
    def iota_constant(self):
        """The factor c of iota(r) = c * r**((n + 1) / 2)."""
        return 2.0 * math.sqrt(self._n * self._omega) / (self._n + 1)

    def __eq__(self, other):
        return isinstance(other, Dimension) and other.n == self._n

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self._n)

    def __repr__(self):
        return "Dimension(%d)" % self._n


def check_variant(variant):
    """Raise DomainError unless variant names a radius metric."""
    if variant not in VARIANTS:
        raise DomainError("unknown metric variant %r (expected one of %s)" %
                          (variant, ", ".join(VARIANTS)))
    return variant


def check_radius(r, positive=False, name="radius"):
    """Return r as float or array after checking its domain.

    Radii must be finite and nonnegative; with positive=True zero is
    rejected too.
    """
    value = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(value)):
        raise DomainError("%s must be finite, got %r" % (name, r))
    if positive and np.any(value <= 0):
        raise DomainError("%s must be positive, got %r" % (name, r))
    if np.any(value < 0):
        raise DomainError("%s must be nonnegative, got %r" % (name, r))
    if value.ndim == 0:
        return float(value)
    return value


def perimeter(r, dim, positive=False):
    """Return P_n(r) = n * omega * r**(n-1), the area of the sphere."""
    dim = Dimension(dim)
    r = check_radius(r, positive)
    return dim.n * dim.omega * np.power(r, dim.n - 1)


def perimeter_derivative(r, dim):
    """Return the derivative of the perimeter with respect to r."""
    dim = Dimension(dim)
    r = check_radius(r)
    return dim.n * (dim.n - 1) * dim.omega * np.power(r, dim.n - 2)


def ball_volume(r, dim):
    """Return omega * r**n."""
    dim = Dimension(dim)
    return dim.omega * np.power(check_radius(r), dim.n)


def iota(r, dim):
    """Map a radius isometrically to the half line (surface tension)."""
    dim = Dimension(dim)
    r = check_radius(r)
    return dim.iota_constant * np.power(r, 0.5 * (dim.n + 1))


def iota_inverse(s, dim):
    """Inverse of iota()."""
    dim = Dimension(dim)
    s = check_radius(s, name="isometry coordinate")
    return np.power(s / dim.iota_constant, 2.0 / (dim.n + 1))


def iota_permeable(r, dim):
    """Map a radius isometrically to the half line (permeability)."""
    return ball_volume(r, dim)


def iota_permeable_inverse(s, dim):
    """Inverse of iota_permeable()."""
    dim = Dimension(dim)
    s = check_radius(s, name="isometry coordinate")
    return np.power(s / dim.omega, 1.0 / dim.n)


def radius_iota(r, dim, variant=SURFACE_TENSION):
    """Isometry of the radius metric selected by variant."""
    if check_variant(variant) == SURFACE_TENSION:
        return iota(r, dim)
    return iota_permeable(r, dim)


def radius_iota_inverse(s, dim, variant=SURFACE_TENSION):
    """Inverse of radius_iota()."""
    if check_variant(variant) == SURFACE_TENSION:
        return iota_inverse(s, dim)
    return iota_permeable_inverse(s, dim)


def radius_iota_derivative(r, dim, variant=SURFACE_TENSION, order=1):
    """First (order=1) or second (order=2) derivative of radius_iota().

    The first derivative is the metric weight: sqrt(P_n) for surface
    tension, P_n for permeability.
    """
    dim = Dimension(dim)
    check_variant(variant)
    r = check_radius(r)
    n = dim.n
    if variant == PERMEABILITY:
        if order == 1:
            return perimeter(r, dim)
        return perimeter_derivative(r, dim)
    c = dim.iota_constant
    if order == 1:
        return c * 0.5 * (n + 1) * np.power(r, 0.5 * (n - 1))
    return c * 0.25 * (n + 1) * (n - 1) * np.power(r, 0.5 * (n - 3))


def set_dist(r0, r1, dim):
    """Surface tension distance between the balls B_r0 and B_r1."""
    return abs(iota(r1, dim) - iota(r0, dim))


def set_dist_permeable(r0, r1, dim):
    """Permeability distance between the balls B_r0 and B_r1."""
    return abs(iota_permeable(r1, dim) - iota_permeable(r0, dim))


def radius_dist(r0, r1, dim, variant=SURFACE_TENSION):
    """Distance between two radii in the metric selected by variant."""
    if check_variant(variant) == SURFACE_TENSION:
        return set_dist(r0, r1, dim)
    return set_dist_permeable(r0, r1, dim)


def radius_speed(r, rdot, dim, variant=SURFACE_TENSION):
    """Metric speed of a radius moving with velocity rdot."""
    return radius_iota_derivative(r, dim, variant) * np.abs(rdot)


def _geodesic_exponent(dim, variant):
    if variant == SURFACE_TENSION:
        return 0.5 * (dim.n + 1)
    return float(dim.n)


def ball_geodesic(r0, r1, tau, variant, dim):
    """Return the radius at parameter tau on the geodesic from r0 to r1.

    Geodesics are straight lines in the isometry coordinate, so
    r(tau)**p = (1 - tau) * r0**p + tau * r1**p with p = (n+1)/2 for
    surface tension and p = n for permeability.
    """
    dim = Dimension(dim)
    check_variant(variant)
    r0 = check_radius(r0, name="start radius")
    r1 = check_radius(r1, name="end radius")
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)) or np.any(tau < 0) or np.any(tau > 1):
        raise DomainError("geodesic parameter must lie in [0, 1], got %r" %
                          (tau.tolist(),))
    p = _geodesic_exponent(dim, variant)
    s = (1.0 - tau) * r0 ** p + tau * r1 ** p
    result = np.power(s, 1.0 / p)
    if result.ndim == 0:
        return float(result)
    return result


def perimeter_modulus(r_lo, r_hi, dim, variant=SURFACE_TENSION):
    """Return the convexity modulus of the perimeter on [r_lo, r_hi].

    This is the infimum over the interval of the second derivative of
    P_n composed with the inverse isometry.  Writing that composition as
    theta * s**a, the second derivative is monotone in s, so the infimum
    sits at an endpoint.  The result is 0 for n = 3 with surface tension
    and negative for the other concave cases.
    """
    dim = Dimension(dim)
    check_variant(variant)
    r_lo = check_radius(r_lo, positive=True, name="lower radius")
    r_hi = check_radius(r_hi, positive=True, name="upper radius")
    if r_lo > r_hi:
        raise DomainError("empty radius interval [%g, %g]" % (r_lo, r_hi))
    n = dim.n
    p = _geodesic_exponent(dim, variant)
    if variant == SURFACE_TENSION:
        c = dim.iota_constant
    else:
        c = dim.omega
    a = (n - 1) / p
    theta = n * dim.omega * c ** (-a)
    values = [theta * a * (a - 1) * (c * r ** p) ** (a - 2)
              for r in (r_lo, r_hi)]
    return float(min(values))
