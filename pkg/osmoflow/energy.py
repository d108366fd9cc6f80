# energy.py - the driving energy of the cell
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
"""The driving energy: perimeter plus internal energy.

E(r, u) = P_n(r) + integral of f(u) over B_r

The internal energy of a quantile profile is the exact integral of f over
its dual cell density.  The quantile volumes S_i = omega * q_i**n split the
ball into

  - an inner cell [0, S_1] carrying the mass 1/(2M),
  - M - 1 dual cells [S_i, S_i+1] carrying the mass 1/M each,
  - an outer cell carrying the mass 1/(2M), closed by the membrane for a
    state and by extrapolation for a bare profile,

and the density is constant on every cell.
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from osmoflow.geometry import (Dimension, DomainError, ball_volume,
                               check_radius, perimeter)
from osmoflow.profile import (ATOM_TOL, BRENTQ_RTOL, AtomError,
                              uniform_profile)
from osmoflow.state import RadialState

__all__ = ['SolverError', 'IntegrandError', 'BracketError',
           'EntropyIntegrand', 'zlogz', 'square', 'power', 'by_name',
           'IntegrandReport', 'validate_integrand', 'require_valid',
           'EnergyBreakdown', 'cell_masses', 'cell_widths', 'cell_densities',
           'internal_energy', 'total_energy', 'energy_floor',
           'equilibrium_radius', 'sublevel_radius_range',
           'equilibrium_state']


class SolverError(Exception):
    """A numerical solver failed."""


class IntegrandError(ValueError):
    """An integrand violating the structural assumptions."""


class BracketError(SolverError):
    """No bracket for a root or minimum could be found."""


class EntropyIntegrand(object):
    """An internal energy density f with its pressure.

    f_hat(z) = z * f'(z) - f(z) is the pressure.  All callables accept
    numpy arrays.  f_hat_prime defaults to a central difference of f_hat.
    """

    def __init__(self, name, f, f_prime, f_hat, f_hat_prime=None):
        self.name = name
        self.f = f
        self.f_prime = f_prime
        self.f_hat = f_hat
        if f_hat_prime is None:
            f_hat_prime = self._difference_quotient
        self.f_hat_prime = f_hat_prime

    def _difference_quotient(self, z):
        z = np.asarray(z, dtype=float)
        h = 1e-6 * np.maximum(z, 1e-8)
        return (self.f_hat(z + h) - self.f_hat(np.maximum(z - h, 0.0))) / (
            z + h - np.maximum(z - h, 0.0))

    def __repr__(self):
        return "<EntropyIntegrand %s>" % self.name


def zlogz():
    """The Boltzmann entropy f(z) = z log z."""
    return EntropyIntegrand(
        "zlogz",
        lambda z: xlogy(z, z),
        lambda z: np.log(z) + 1.0,
        lambda z: np.asarray(z, dtype=float) * 1.0,
        lambda z: np.ones_like(np.asarray(z, dtype=float)))


def power(m):
    """The power law f(z) = z**m / (m - 1) with pressure z**m."""
    m = float(m)
    if not m > 1:
        raise IntegrandError("power law exponent must exceed 1, got %r" % m)
    return EntropyIntegrand(
        "power:%g" % m,
        lambda z: np.power(z, m) / (m - 1.0),
        lambda z: m * np.power(z, m - 1.0) / (m - 1.0),
        lambda z: np.power(z, m),
        lambda z: m * np.power(z, m - 1.0))


def square():
    """f(z) = z**2."""
    f = power(2)
    f.name = "square"
    return f


def by_name(name):
    """Return the integrand called name: zlogz, square or power:<m>."""
    if name == "zlogz":
        return zlogz()
    if name == "square":
        return square()
    if name.startswith("power:"):
        try:
            m = float(name.split(":", 1)[1])
        except ValueError:
            raise IntegrandError("bad power law exponent in %r" % name)
        return power(m)
    raise IntegrandError("unknown integrand %r" % name)


class IntegrandReport(object):
    """Verdicts of validate_integrand().

    The required properties are zero_at_origin, convex, superlinear,
    f_hat_monotone and coercive.  doubling and mccann are reported for the
    compactness and convexity results that use them.
    """

    REQUIRED = ('zero_at_origin', 'convex', 'superlinear', 'f_hat_monotone',
                'coercive')
    OPTIONAL = ('doubling', 'mccann')

    def __init__(self, name, **verdicts):
        self.name = name
        self.doubling_constant = verdicts.pop('doubling_constant')
        for key in self.REQUIRED + self.OPTIONAL:
            setattr(self, key, bool(verdicts.pop(key)))
        if verdicts:
            raise TypeError("unexpected verdicts %s" % sorted(verdicts))

    @property
    def valid(self):
        """True if all required properties hold."""
        return all(getattr(self, key) for key in self.REQUIRED)

    @property
    def failures(self):
        """Names of the required properties that fail."""
        return [key for key in self.REQUIRED if not getattr(self, key)]

    def as_dict(self):
        """The verdicts as a dictionary, for run summaries."""
        result = dict((key, getattr(self, key))
                      for key in self.REQUIRED + self.OPTIONAL)
        result['name'] = self.name
        result['valid'] = self.valid
        result['doubling_constant'] = self.doubling_constant
        return result


def _nondecreasing(values, rtol=1e-9):
    diffs = np.diff(values)
    scale = np.abs(values[:-1]) + np.abs(values[1:]) + 1.0
    return bool(np.all(diffs >= -rtol * scale))


def _convex(x, y, rtol=1e-9):
    slopes = np.diff(y) / np.diff(x)
    return _nondecreasing(slopes, rtol)


def validate_integrand(f, dim):
    """Sample the structural assumptions on f and report the verdicts."""
    dim = Dimension(dim)
    n = dim.n
    z = np.logspace(-12, 8, 400)
    with np.errstate(all='ignore'):
        values = f.f(z)
        zero = abs(float(f.f(np.array([0.0]))[0])) <= 1e-12
        convex = _convex(z, values)
        ratio = values / z
        superlinear = (_nondecreasing(ratio) and
                       ratio[-1] > ratio[len(ratio) // 2] + 1.0)
        hat = f.f_hat(z)
        hat_monotone = bool(np.all(hat >= 0)) and _nondecreasing(hat)
        small = np.logspace(-12, -6, 7)
        coercive = bool(abs(small[0] ** (-1.0 / n) * f.f(small[:1])[0]) <=
                        1e-3)
        grid = np.logspace(-6, 6, 60)
        fz = f.f(grid)
        top = f.f(grid[:, None] + grid[None, :])
        bottom = 1.0 + fz[:, None] + fz[None, :]
        bottom = np.where(bottom > 0, bottom,
                          1.0 + np.abs(fz[:, None]) + np.abs(fz[None, :]))
        constant = float(np.max(top / bottom))
        s = np.logspace(-3, 3, 200)
        mccann_values = s ** n * f.f(s ** (-n))
        mccann = (_nondecreasing(-mccann_values) and
                  _convex(s, mccann_values))
    doubling = bool(np.isfinite(constant) and constant <= 1e3)
    report = IntegrandReport(f.name, zero_at_origin=zero, convex=convex,
                             superlinear=superlinear,
                             f_hat_monotone=hat_monotone, coercive=coercive,
                             doubling=doubling, mccann=mccann,
                             doubling_constant=constant)
    logging.debug("integrand %s in dimension %d: %s", f.name, n,
                  report.as_dict())
    return report


def require_valid(f, dim):
    """Validate f and raise IntegrandError if a required property fails."""
    report = validate_integrand(f, dim)
    if not report.valid:
        raise IntegrandError("integrand %s fails: %s" %
                             (f.name, ", ".join(report.failures)))
    return report


class EnergyBreakdown(object):
    """The perimeter and internal parts of an energy value."""

    def __init__(self, perimeter_term, internal_term):
        self.perimeter_term = float(perimeter_term)
        self.internal_term = float(internal_term)

    @property
    def total(self):
        """perimeter_term + internal_term"""
        return self.perimeter_term + self.internal_term

    def as_dict(self):
        return {'perimeter': self.perimeter_term,
                'internal': self.internal_term, 'total': self.total}

    def __repr__(self):
        return ("<EnergyBreakdown total=%.17g perimeter=%.17g "
                "internal=%.17g>" % (self.total, self.perimeter_term,
                                     self.internal_term))


def cell_masses(M):
    """Masses of the inner, dual and outer cells of M quantiles."""
    masses = np.full(M + 1, 1.0 / M)
    masses[0] = masses[-1] = 0.5 / M
    return masses


def cell_widths(u, radius=None):
    """Volumes of the inner, dual and outer cells of the profile u.

    With radius given the outer cell ends at the membrane, otherwise its
    width is extrapolated from the last dual cell.
    """
    S = u.volumes
    M = u.M
    widths = np.empty(M + 1)
    widths[0] = S[0]
    widths[1:M] = np.diff(S)
    if radius is not None:
        widths[M] = ball_volume(radius, u.dim) - S[-1]
    elif M == 1:
        widths[M] = S[0]
    else:
        widths[M] = 0.5 * (S[-1] - S[-2])
    return widths


def cell_densities(u, radius=None):
    """Return (widths, masses, densities) of the cells of u."""
    widths = cell_widths(u, radius)
    if widths[0] <= u.dim.omega * ATOM_TOL ** u.dim.n:
        raise AtomError("mass concentrated at the origin")
    if np.any(widths[1:-1] <= 0):
        raise AtomError("coincident quantiles")
    if widths[-1] <= 0:
        raise AtomError("mass touches the membrane")
    masses = cell_masses(u.M)
    return widths, masses, masses / widths


def internal_energy(u, f, dim=None, radius=None):
    """Return the internal energy of the profile u.

    radius closes the outer cell at a membrane; without it the outer cell
    is extrapolated.  Raises AtomError for profiles with atoms.
    """
    if dim is not None and Dimension(dim) != u.dim:
        raise DomainError("profile lives in dimension %d, not %r" %
                          (u.dim.n, dim))
    widths, _masses, densities = cell_densities(u, radius)
    return float(np.sum(widths * f.f(densities)))


def total_energy(s, f, cfg):
    """Return the EnergyBreakdown of the state s."""
    if s.dim != cfg.dim:
        raise DomainError("state lives in dimension %d, not %d" %
                          (s.dim.n, cfg.dim.n))
    return EnergyBreakdown(perimeter(s.r, s.dim, positive=True),
                           internal_energy(s.u, f, radius=s.r))


def energy_floor(r, f, dim):
    """The least energy of a state with radius r, attained by the uniform
    profile."""
    dim = Dimension(dim)
    r = check_radius(r, positive=True)
    volume = ball_volume(r, dim)
    return float(perimeter(r, dim) + volume * f.f(1.0 / volume))


def _floor_slope_sign(r, f, dim):
    """Sign-carrying factor of the derivative of energy_floor():
    (n - 1) / r - f_hat(1 / |B_r|)."""
    return (dim.n - 1) / r - float(f.f_hat(1.0 / ball_volume(r, dim)))


def equilibrium_radius(f, dim):
    """Return the radius minimizing energy_floor().

    Stationarity means (n - 1) / r = f_hat(1 / |B_r|).  The root is
    bracketed on a logarithmic scan and polished with brentq.
    """
    dim = Dimension(dim)
    logs = np.arange(-30.0, 30.5, 0.5)
    signs = []
    for t in logs:
        with np.errstate(all='ignore'):
            signs.append(_floor_slope_sign(math.exp(t), f, dim))
    signs = np.array(signs)
    changes = np.nonzero((signs[:-1] < 0) & (signs[1:] >= 0))[0]
    if not len(changes):
        raise BracketError("no equilibrium radius for %s in dimension %d" %
                           (f.name, dim.n))
    k = changes[0]
    if signs[k + 1] == 0:
        return math.exp(logs[k + 1])
    t = brentq(lambda t: _floor_slope_sign(math.exp(t), f, dim),
               logs[k], logs[k + 1], xtol=1e-15, rtol=BRENTQ_RTOL)
    r = math.exp(t)
    logging.debug("equilibrium radius for %s in dimension %d: %.17g",
                  f.name, dim.n, r)
    return r


def sublevel_radius_range(level, f, dim):
    """Return (r_lo, r_hi) with energy_floor(r) <= level exactly inside.

    All states with energy at most level have their radius in this range.
    r_lo is 0 when the floor stays below level near the origin.
    """
    dim = Dimension(dim)
    r_star = equilibrium_radius(f, dim)
    bottom = energy_floor(r_star, f, dim)
    if level < bottom:
        raise DomainError("level %g is below the least energy %g" %
                          (level, bottom))

    def excess(t):
        return energy_floor(math.exp(t), f, dim) - level

    def edge(step):
        t = math.log(r_star)
        while abs(t) < 700:
            with np.errstate(all='ignore'):
                value = excess(t + step)
            if value > 0 and np.isfinite(value):
                lo, hi = sorted((t, t + step))
                return math.exp(brentq(excess, lo, hi, xtol=1e-14))
            if not value <= 0:
                return math.exp(t)
            t += step
        return 0.0 if step < 0 else float('inf')

    return edge(-1.0), edge(1.0)


def equilibrium_state(f, dim, M):
    """The equilibrium: the uniform profile on the ball of radius r*."""
    r = equilibrium_radius(f, dim)
    return RadialState(r, uniform_profile(r, dim, M))
