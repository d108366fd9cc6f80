# state.py - cell states and the coupled metric
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
"""Cell states: a ball radius together with a radial profile.

The state space carries the product metric

    rho((r0, u0), (r1, u1))**2 = d(r0, r1)**2 + W2(u0, u1)**2 / kappa

where d is the radius metric of the configured variant.  A state is
admissible when the profile is supported in the ball, q_M <= r.
"""
import numpy as np

from osmoflow.geometry import (SURFACE_TENSION, Dimension, DomainError,
                               ball_geodesic, check_radius, check_variant,
                               radius_dist)
from osmoflow.profile import (DimensionMismatch, QuantileProfile,
                              displacement_geodesic, wasserstein2)

__all__ = ['SUPPORT_SLACK', 'SupportError', 'DimensionMismatch',
           'RangeError', 'MetricConfig', 'RadialState', 'rho_dist',
           'coupled_geodesic', 'metric_derivative', 'state_speed',
           'state_velocity', 'random_state']

SUPPORT_SLACK = 1e-12


class SupportError(ValueError):
    """A profile reaching beyond the membrane."""


class RangeError(ValueError):
    """A time outside the sampled part of a trajectory."""


class MetricConfig(object):
    """Parameters of the state metric.

    dim is the space dimension, kappa the diffusion constant weighting the
    profile part and variant selects the radius metric.
    """

    def __init__(self, dim, kappa=1.0, variant=SURFACE_TENSION):
        self.dim = Dimension(dim)
        kappa = float(kappa)
        if not np.isfinite(kappa) or kappa <= 0:
            raise DomainError("kappa must be positive, got %r" % kappa)
        self.kappa = kappa
        self.variant = check_variant(variant)

    def replace(self, **kwds):
        """Return a copy with some fields replaced."""
        args = dict(dim=self.dim, kappa=self.kappa, variant=self.variant)
        args.update(kwds)
        return MetricConfig(**args)

    def __eq__(self, other):
        return (isinstance(other, MetricConfig) and
                (self.dim, self.kappa, self.variant) ==
                (other.dim, other.kappa, other.variant))

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return "MetricConfig(dim=%d, kappa=%r, variant=%r)" % (
            self.dim.n, self.kappa, self.variant)


class RadialState(object):
    """A radius r and a QuantileProfile u supported in B_r."""

    def __init__(self, r, u):
        if not isinstance(u, QuantileProfile):
            raise TypeError("expected a QuantileProfile, got %r" % (u,))
        self._r = check_radius(r)
        if u.support_radius > self._r + SUPPORT_SLACK * max(1.0, self._r):
            raise SupportError("profile reaches %.17g outside the ball of "
                               "radius %.17g" % (u.support_radius, self._r))
        self._u = u

    r = property(lambda self: self._r, doc="The ball radius.")
    u = property(lambda self: self._u, doc="The QuantileProfile.")
    dim = property(lambda self: self._u.dim, doc="The Dimension.")
    M = property(lambda self: self._u.M, doc="The number of quantiles.")
    q = property(lambda self: self._u.q, doc="The quantile radii.")

    @classmethod
    def from_vector(cls, x, dim):
        """Build a state from the vector (q_1, ..., q_M, r)."""
        x = np.asarray(x, dtype=float)
        return cls(x[-1], QuantileProfile(x[:-1], dim))

    def as_vector(self):
        """Return the vector (q_1, ..., q_M, r)."""
        return np.append(self._u.q, self._r)

    def __eq__(self, other):
        return (isinstance(other, RadialState) and other.r == self.r and
                other.u == self.u)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return "<RadialState r=%.17g n=%d M=%d>" % (self._r, self.dim.n,
                                                    self.M)


def _check_states(a, b, cfg):
    if a.dim != cfg.dim or b.dim != cfg.dim:
        raise DimensionMismatch("states of dimension %d and %d under a "
                                "metric for dimension %d" %
                                (a.dim.n, b.dim.n, cfg.dim.n))


def rho_dist(a, b, cfg):
    """Return the state distance between a and b."""
    _check_states(a, b, cfg)
    d = radius_dist(a.r, b.r, cfg.dim, cfg.variant)
    w = wasserstein2(a.u, b.u)
    return float(np.sqrt(d * d + w * w / cfg.kappa))


def coupled_geodesic(a, b, tau, cfg):
    """Return the state at parameter tau on the geodesic from a to b.

    The radius moves on its metric geodesic and the profile on the
    displacement geodesic; the result is admissible whenever a and b are.
    """
    _check_states(a, b, cfg)
    r = ball_geodesic(a.r, b.r, tau, cfg.variant, cfg.dim)
    return RadialState(r, displacement_geodesic(a.u, b.u, tau))


def state_speed(a, b, dt, cfg):
    """The step quotient rho(a, b) / dt."""
    if dt <= 0:
        raise DomainError("time step must be positive, got %r" % dt)
    return rho_dist(a, b, cfg) / dt


def _node_index(times, t):
    """Index of the node at time t, or None if t lies between nodes."""
    scale = max(1.0, abs(times[-1]))
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) <= 1e-12 * scale:
        return k
    return None


def metric_derivative(traj, t, cfg):
    """Metric speed of a sampled curve at time t.

    traj is anything with sequences times and states.  Strictly between
    two nodes the step quotient of that step is returned, at an interior
    node the central quotient of its two neighbours.
    """
    times = np.asarray(traj.times, dtype=float)
    if len(times) < 2 or not times[0] < t < times[-1]:
        raise RangeError("time %r is not interior to the sampled curve" %
                         (t,))
    k = _node_index(times, t)
    if k is None:
        k = int(np.searchsorted(times, t)) - 1
        return state_speed(traj.states[k], traj.states[k + 1],
                           times[k + 1] - times[k], cfg)
    return state_speed(traj.states[k - 1], traj.states[k + 1],
                       times[k + 1] - times[k - 1], cfg)


def state_velocity(traj, k):
    """Central difference velocity (rdot, qdot) at the interior node k."""
    times = traj.times
    if not 0 < k < len(times) - 1:
        raise RangeError("node %r is not interior" % (k,))
    dt = times[k + 1] - times[k - 1]
    after, before = traj.states[k + 1], traj.states[k - 1]
    return (after.r - before.r) / dt, (after.q - before.q) / dt


def random_state(rng, dim, M, r_range=(0.5, 1.5), fill=(0.6, 1.0)):
    """Draw a random admissible state with positive distinct quantiles.

    The radius is uniform in r_range.  The profile spreads its mass over a
    ball filling a random fraction of the volume (drawn from fill) with
    cell volumes varying by a factor of up to three.
    """
    dim = Dimension(dim)
    r = rng.uniform(*r_range)
    volume = dim.omega * r ** dim.n * rng.uniform(*fill)
    cells = rng.uniform(0.5, 1.5, M + 1)
    cells[0] *= 0.5
    cells[-1] *= 0.5
    S = np.cumsum(cells)[:M] / cells.sum() * volume
    q = (S / dim.omega) ** (1.0 / dim.n)
    return RadialState(r, QuantileProfile(q, dim))
