# scaling.py - physical units and the scaled problem
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
"""Nondimensionalization.

The physical problem has the diffusion constant kappa, the membrane law
v = sigma H + beta u and the total mass theta.  With

    a = (sigma / (beta theta)) ** (1 / (n - 1))    x' = a x
    c = 1 / (theta a**n)                           u' = c u
    b = sigma a**2                                 t' = b t

the scaled problem has sigma = beta = 1, unit mass and the diffusion
constant kappa / sigma.  Quantile profiles are mass fractions, so only
radii and times change.
"""
import numpy as np

from osmoflow.energy import total_energy, zlogz
from osmoflow.geometry import Dimension, DomainError
from osmoflow.jko import StepRecord, Trajectory
from osmoflow.profile import QuantileProfile
from osmoflow.state import RadialState

__all__ = ['PhysicalParams', 'ScaleFactors', 'to_scaled', 'from_scaled',
           'density_to_scaled', 'density_from_scaled',
           'trajectory_to_scaled']


class PhysicalParams(object):
    """Physical coefficients of a cell."""

    def __init__(self, dim, kappa=1.0, sigma=1.0, beta=1.0, theta=1.0):
        self.dim = Dimension(dim)
        self.kappa = float(kappa)
        self.sigma = float(sigma)
        self.beta = float(beta)
        self.theta = float(theta)
        for name in ('kappa', 'sigma', 'beta', 'theta'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise DomainError("%s must be positive, got %r" %
                                  (name, value))

    @property
    def is_scaled(self):
        """True if all coefficients besides kappa are one."""
        return self.sigma == self.beta == self.theta == 1.0

    def factors(self):
        """Return the ScaleFactors of these parameters."""
        n = self.dim.n
        length = (self.sigma / (self.beta * self.theta)) ** (1.0 / (n - 1))
        return ScaleFactors(length, self.sigma * length ** 2,
                            1.0 / (self.theta * length ** n),
                            self.kappa / self.sigma)

    def __repr__(self):
        return ("PhysicalParams(dim=%d, kappa=%r, sigma=%r, beta=%r, "
                "theta=%r)" % (self.dim.n, self.kappa, self.sigma, self.beta,
                               self.theta))


class ScaleFactors(object):
    """Factors taking physical lengths, times and concentrations to
    scaled ones, and the scaled diffusion constant."""

    def __init__(self, length, time, concentration, kappa):
        self.length = length
        self.time = time
        self.concentration = concentration
        self.kappa = kappa

    def as_dict(self):
        return {'length': self.length, 'time': self.time,
                'concentration': self.concentration,
                'kappa_scaled': self.kappa}


def _dilate(state, factor):
    return RadialState(state.r * factor,
                       QuantileProfile(state.q * factor, state.dim))


def _check(p, state):
    if state.dim != p.dim:
        raise DomainError("state lives in dimension %d, not %d" %
                          (state.dim.n, p.dim.n))


def to_scaled(p, state, t):
    """Return (scaled state, scaled time, scaled kappa)."""
    _check(p, state)
    factors = p.factors()
    return _dilate(state, factors.length), t * factors.time, factors.kappa


def from_scaled(p, state, t):
    """Return (physical state, physical time, physical kappa)."""
    _check(p, state)
    factors = p.factors()
    return _dilate(state, 1.0 / factors.length), t / factors.time, p.kappa


def density_to_scaled(p, density):
    """Scale a physical RadialDensity of mass theta to unit mass."""
    factors = p.factors()
    return density.scaled(factors.length, factors.concentration)


def density_from_scaled(p, density):
    """Inverse of density_to_scaled()."""
    factors = p.factors()
    return density.scaled(1.0 / factors.length, 1.0 / factors.concentration)


def trajectory_to_scaled(p, traj, cfg):
    """Return the scaled version of a physical trajectory.

    cfg is the metric of the scaled problem; energies are recomputed with
    the z log z integrand.
    """
    f = zlogz()
    result = Trajectory(cfg, f, traj.method)
    for t, state, record in zip(traj.times, traj.states, traj.records):
        scaled, t_scaled, _kappa = to_scaled(p, state, t)
        result.append(t_scaled, scaled,
                      StepRecord(total_energy(scaled, f, cfg),
                                 iterations=record.iterations))
    return result
