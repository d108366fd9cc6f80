# profile.py - radial probability profiles stored as quantiles
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
"""Radial probability profiles.

A radially symmetric probability density on R^n is stored through its
radial quantile function sampled at the midpoints sigma_i = (i - 1/2) / M.
In this representation the Wasserstein distance is the L^2 distance of the
quantile functions and displacement interpolation is linear interpolation.

Densities are described by RadialDensity objects: piecewise linear in the
radius on a grid starting at the origin.
"""
import logging

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from osmoflow.geometry import Dimension, DomainError, check_radius

__all__ = ['ATOM_TOL', 'MASS_TOL', 'BRENTQ_RTOL',
           'ProfileError', 'AtomError', 'MassError',
           'MismatchError', 'DimensionMismatch', 'sigma_grid',
           'QuantileProfile', 'RadialDensity',
           'quantiles_from_density', 'density_from_quantiles',
           'quantiles_from_cell_masses', 'wasserstein2', 'optimal_map',
           'displacement_geodesic', 'resample', 'sorted_assignment_w2',
           'uniform_profile', 'gaussian_density', 'gaussian_profile']

ATOM_TOL = 1e-14
MASS_TOL = 1e-6
# smallest relative tolerance brentq accepts
BRENTQ_RTOL = 4 * np.finfo(float).eps


class ProfileError(ValueError):
    """A profile or density that is not a radial probability measure."""


class AtomError(ProfileError):
    """Coincident quantiles, that is mass concentrated on a sphere."""


class MassError(ProfileError):
    """A density whose total mass is not one."""


class MismatchError(ProfileError):
    """Profiles with different numbers of quantiles."""


class DimensionMismatch(ValueError):
    """Objects living in spaces of different dimension."""


def sigma_grid(M):
    """Return the midpoint mass levels (i - 1/2) / M for i = 1..M."""
    if int(M) != M or M < 1:
        raise ProfileError("number of quantiles must be a positive integer, "
                           "not %r" % (M,))
    M = int(M)
    return (np.arange(M) + 0.5) / M


class QuantileProfile(object):
    """Radial profile given by its quantiles q_1 <= ... <= q_M.

    q_i is the radius below which the fraction sigma_i of the mass lies.
    Every quantile carries the mass 1/M, so the total mass is one by
    construction.  The quantile array is read only.
    """

    def __init__(self, q, dim):
        self._dim = Dimension(dim)
        q = np.array(q, dtype=float)
        if q.ndim != 1 or q.size < 1:
            raise ProfileError("quantiles must be a nonempty vector")
        if not np.all(np.isfinite(q)):
            raise ProfileError("quantiles must be finite")
        if q[0] < 0:
            raise ProfileError("negative quantile %g" % q[0])
        if np.any(np.diff(q) < 0):
            raise ProfileError("quantiles must be nondecreasing")
        q.setflags(write=False)
        self._q = q

    @property
    def q(self):
        """The quantile radii."""
        return self._q

    @property
    def dim(self):
        """The Dimension of the ambient space."""
        return self._dim

    @property
    def M(self):
        """The number of quantiles."""
        return len(self._q)

    @property
    def sigma(self):
        """The mass levels of the quantiles."""
        return sigma_grid(self.M)

    @property
    def volumes(self):
        """Volumes omega * q_i**n of the balls bounded by the quantiles."""
        return self._dim.omega * self._q ** self._dim.n

    @property
    def support_radius(self):
        """The largest quantile."""
        return float(self._q[-1])

    def is_strict(self):
        """Return True if all quantiles are positive and distinct."""
        return (self._q[0] > ATOM_TOL and
                bool(np.all(np.diff(self._q) > ATOM_TOL)))

    def check_atoms(self):
        """Raise AtomError if the profile has an atom."""
        if self._q[0] <= ATOM_TOL:
            raise AtomError("mass concentrated at the origin")
        gaps = np.diff(self._q)
        if np.any(gaps <= ATOM_TOL):
            i = int(np.argmin(gaps))
            raise AtomError("quantiles %d and %d coincide at radius %g" %
                            (i + 1, i + 2, self._q[i]))

    def __len__(self):
        return self.M

    def __eq__(self, other):
        return (isinstance(other, QuantileProfile) and
                other.dim == self.dim and np.array_equal(other.q, self.q))

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return "<QuantileProfile n=%d M=%d support=%g>" % (
            self._dim.n, self.M, self.support_radius)


class RadialDensity(object):
    """Radial density, piecewise linear on a grid of radii.

    The density vanishes below grid[0] and beyond grid[-1].
    """

    def __init__(self, grid, values, dim):
        self._dim = Dimension(dim)
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or values.shape != grid.shape:
            raise ProfileError("density needs matching grid and values with "
                               "at least two points")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ProfileError("density grid and values must be finite")
        if grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ProfileError("density grid must be increasing from a "
                               "nonnegative radius")
        if np.any(values < 0):
            raise ProfileError("density must be nonnegative")
        grid.setflags(write=False)
        values.setflags(write=False)
        self._grid = grid
        self._values = values

    grid = property(lambda self: self._grid, doc="The grid radii.")
    values = property(lambda self: self._values,
                      doc="The density at the grid radii.")
    dim = property(lambda self: self._dim, doc="The Dimension.")

    def __call__(self, rho):
        return np.interp(rho, self._grid, self._values, left=0.0, right=0.0)

    def _segments(self):
        a, b = self._grid[:-1], self._grid[1:]
        slope = np.diff(self._values) / (b - a)
        return a, b, self._values[:-1] - slope * a, slope

    def _partial(self, lo, hi, alpha, beta):
        n = self._dim.n
        return self._dim.omega * (
            alpha * (hi ** n - lo ** n) +
            beta * n / (n + 1.0) * (hi ** (n + 1) - lo ** (n + 1)))

    def cumulative(self):
        """Mass inside each grid radius, in closed form."""
        a, b, alpha, beta = self._segments()
        pieces = self._partial(a, b, alpha, beta)
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def cdf(self, rho):
        """Mass inside the radii rho."""
        rho = np.clip(np.asarray(rho, dtype=float), self._grid[0],
                      self._grid[-1])
        cum = self.cumulative()
        k = np.clip(np.searchsorted(self._grid, rho, side='right') - 1,
                    0, len(self._grid) - 2)
        a, _b, alpha, beta = self._segments()
        return cum[k] + self._partial(a[k], rho, alpha[k], beta[k])

    def mass(self):
        """Total mass."""
        return float(self.cumulative()[-1])

    def normalized(self):
        """Return the density scaled to unit mass."""
        total = self.mass()
        if total <= 0:
            raise MassError("density has no mass")
        return RadialDensity(self._grid, self._values / total, self._dim)

    def scaled(self, length, concentration):
        """Return the density with radii times length and values times
        concentration."""
        return RadialDensity(self._grid * length,
                             self._values * concentration, self._dim)


def quantiles_from_density(u, M):
    """Return the QuantileProfile of the density u with M quantiles.

    The mass of u must be one within MASS_TOL.  Each quantile solves
    F(q) = sigma_i on the grid segment holding it, where the cumulative
    mass F is a polynomial.
    """
    if not isinstance(u, RadialDensity):
        raise ProfileError("expected a RadialDensity, got %r" % (u,))
    cum = u.cumulative()
    total = cum[-1]
    if abs(total - 1.0) > MASS_TOL:
        raise MassError("density has mass %.12g, expected 1" % total)
    if u.grid[-1] - u.grid[0] <= ATOM_TOL:
        raise AtomError("density support is below resolution")
    a, b, alpha, beta = u._segments()
    targets = sigma_grid(M) * total
    seg = np.clip(np.searchsorted(cum, targets, side='right') - 1,
                  0, len(a) - 1)
    q = np.empty(len(targets))
    for i, (k, target) in enumerate(zip(seg, targets)):
        def residual(rho, k=k, target=target):
            return cum[k] + u._partial(a[k], rho, alpha[k], beta[k]) - target
        lo, hi = residual(a[k]), residual(b[k])
        if lo >= 0:
            q[i] = a[k]
        elif hi <= 0:
            q[i] = b[k]
        else:
            q[i] = brentq(residual, a[k], b[k], xtol=1e-15,
                          rtol=BRENTQ_RTOL)
    profile = QuantileProfile(np.maximum.accumulate(q), u.dim)
    profile.check_atoms()
    return profile


def density_from_quantiles(u):
    """Return a RadialDensity reconstructing the profile u.

    The density at q_i is 1 / (dS/dsigma) with S the enclosed volume,
    using centered differences inside and one-sided ones at the ends.
    The grid is extended to the origin and to the extrapolated outer edge,
    and the values are normalized to unit mass.
    """
    u.check_atoms()
    S = u.volumes
    M = u.M
    if M == 1:
        slope = np.array([2.0 * S[0]])
        outer = 2.0 * S[0]
    else:
        slope = np.gradient(S, u.sigma)
        outer = S[-1] + 0.5 * (S[-1] - S[-2])
    values = 1.0 / slope
    edge = (outer / u.dim.omega) ** (1.0 / u.dim.n)
    grid = np.concatenate([[0.0], u.q, [edge]])
    values = np.concatenate([[values[0]], values, [values[-1]]])
    return RadialDensity(grid, values, u.dim).normalized()


def quantiles_from_cell_masses(edges, masses, dim, M):
    """Quantiles of a density that is constant on spherical shells.

    edges are the shell radii starting at the origin and masses the shell
    masses; they are normalized to unit total.  The enclosed mass is linear
    in the enclosed volume on each shell, so the inversion is exact.
    """
    dim = Dimension(dim)
    edges = np.asarray(edges, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if edges.ndim != 1 or masses.shape != (len(edges) - 1,):
        raise ProfileError("need one mass per shell")
    if np.any(masses < 0):
        raise ProfileError("negative shell mass")
    total = masses.sum()
    if total <= 0:
        raise MassError("shells carry no mass")
    cum = np.concatenate([[0.0], np.cumsum(masses) / total])
    volumes = dim.omega * edges ** dim.n
    S = np.interp(sigma_grid(M), cum, volumes)
    q = (S / dim.omega) ** (1.0 / dim.n)
    return QuantileProfile(np.maximum.accumulate(q), dim)


def _check_pair(u, w):
    if u.dim != w.dim:
        raise DimensionMismatch("profiles live in dimensions %d and %d" %
                                (u.dim.n, w.dim.n))


def wasserstein2(u, w, resample_to_first=False):
    """Return the quadratic Wasserstein distance between two profiles.

    With different M a MismatchError is raised unless resample_to_first is
    set, in which case w is resampled onto the quantile grid of u.
    """
    _check_pair(u, w)
    if u.M != w.M:
        if not resample_to_first:
            raise MismatchError("profiles have %d and %d quantiles" %
                                (u.M, w.M))
        w = resample(w, u.M)
    return float(np.sqrt(np.mean((u.q - w.q) ** 2)))


def optimal_map(u, w):
    """Return the optimal transport map from u to w at the quantiles of u.

    In one dimension the monotone rearrangement sends q_i to w.q_i.
    """
    _check_pair(u, w)
    if u.M != w.M:
        raise MismatchError("profiles have %d and %d quantiles" % (u.M, w.M))
    return np.array(w.q)


def displacement_geodesic(u0, u1, tau):
    """Return the profile at parameter tau on the displacement geodesic."""
    _check_pair(u0, u1)
    if u0.M != u1.M:
        raise MismatchError("profiles have %d and %d quantiles" %
                            (u0.M, u1.M))
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise DomainError("geodesic parameter must lie in [0, 1], got %r" %
                          tau)
    return QuantileProfile((1.0 - tau) * u0.q + tau * u1.q, u0.dim)


def resample(u, M):
    """Return u on a grid of M quantiles, interpolating linearly in sigma."""
    if M == u.M:
        return u
    logging.debug("resampling profile from %d to %d quantiles", u.M, M)
    return QuantileProfile(np.interp(sigma_grid(M), u.sigma, u.q), u.dim)


def sorted_assignment_w2(u, w):
    """Wasserstein distance of the empirical measures by brute force.

    Solves the assignment problem between the two sets of M atoms.  This is
    a cross check of wasserstein2() and scales cubically in M.
    """
    _check_pair(u, w)
    if u.M != w.M:
        raise MismatchError("profiles have %d and %d quantiles" % (u.M, w.M))
    cost = (u.q[:, None] - w.q[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum() / u.M))


def uniform_profile(r, dim, M):
    """The uniform probability profile on the ball of radius r."""
    dim = Dimension(dim)
    r = check_radius(r, positive=True)
    return QuantileProfile(r * sigma_grid(M) ** (1.0 / dim.n), dim)


def gaussian_density(width, r, dim, points=2001):
    """Gaussian exp(-rho**2 / (2 width**2)) cut off at r, unit mass."""
    check_radius(width, positive=True, name="width")
    r = check_radius(r, positive=True)
    grid = np.linspace(0.0, r, points)
    values = np.exp(-0.5 * (grid / width) ** 2)
    return RadialDensity(grid, values, dim).normalized()


def gaussian_profile(width, r, dim, M):
    """Quantiles of gaussian_density()."""
    return quantiles_from_density(gaussian_density(width, r, dim), M)
