# pde_oracle.py - strong form solver and weak form checks
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
"""Independent solver of the strong free boundary problem.

    u_t = kappa div(u grad f'(u))   in B_r(t)
    zero mass flux through the moving membrane
    r' = -(n - 1) / r + f_hat(u(r))   (surface tension)
    P_n(r) r' = -(n - 1) / r + f_hat(u(r))   (permeability)

The equation is solved by finite volumes on the mapped grid y = rho / r(t)
in [0, 1], split into J equal cells whose shell volumes
omega (y_j+1**n - y_j**n) are fixed, so the cell volumes scale with r**n.
Edge fluxes include the grid velocity r' y and vanish at the origin and at
the membrane, which conserves the mass exactly.  The diffusion is taken
linearized-implicit or explicit and the radius explicit; time steps are
halved when a step produces negative densities or raises the energy.

The module also holds the bump test functions, the weak form residuals of
sampled trajectories and the comparison of two trajectories.
"""
import logging
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve
from scipy.special import gamma, gammainc

from osmoflow.diagnostics import boundary_density, quantile_gradient
from osmoflow.energy import EnergyBreakdown, SolverError
from osmoflow.geometry import (PERMEABILITY, DomainError, perimeter)
from osmoflow.jko import StepRecord, Trajectory
from osmoflow.profile import (MASS_TOL, MassError, ProfileError,
                              RadialDensity, quantiles_from_cell_masses,
                              resample)
from osmoflow.progress import base
from osmoflow.state import (RadialState, RangeError, rho_dist)

__all__ = ['SEMI_IMPLICIT', 'EXPLICIT', 'SCHEMES', 'OracleError',
           'StabilityError', 'NegativityError', 'TestFunctionError',
           'SetupMismatch', 'OracleGrid', 'StrongSolver', 'solve_strong',
           'BumpTestFunction', 'default_test_functions', 'WeakResidual',
           'weak_residual_diffusion', 'weak_residual_boundary',
           'boundary_transport', 'CompareReport', 'compare']

SEMI_IMPLICIT = "semi-implicit"
EXPLICIT = "explicit"
SCHEMES = (SEMI_IMPLICIT, EXPLICIT)

MASS_DRIFT = 1e-10


class OracleError(SolverError):
    """The strong solver failed; trajectory holds the computed part."""

    def __init__(self, msg, trajectory=None):
        SolverError.__init__(self, msg)
        self.trajectory = trajectory


class StabilityError(OracleError):
    """The time step fell below its floor."""


class NegativityError(OracleError):
    """Negative densities persisted down to the smallest time step."""


class TestFunctionError(ValueError):
    """A test function whose time support leaves the trajectory."""


class SetupMismatch(ValueError):
    """Trajectories that do not start from the same state."""


class OracleGrid(object):
    """Discretization of the strong solver.

    cells is the number J of finite volumes, dt the nominal time step,
    quantiles the resolution of the recorded states and record_every the
    number of nominal steps between records.  A step may be halved
    max_halvings times.
    """

    def __init__(self, cells=400, dt=1e-3, scheme=SEMI_IMPLICIT,
                 quantiles=200, record_every=1, max_halvings=20):
        self.cells = int(cells)
        self.dt = float(dt)
        self.scheme = scheme
        self.quantiles = int(quantiles)
        self.record_every = int(record_every)
        self.max_halvings = int(max_halvings)
        if self.cells < 2:
            raise DomainError("need at least two cells, got %d" % self.cells)
        if not self.dt > 0:
            raise DomainError("time step must be positive, got %r" % dt)
        if scheme not in SCHEMES:
            raise DomainError("unknown scheme %r" % (scheme,))
        if self.quantiles < 1 or self.record_every < 1:
            raise DomainError("quantiles and record_every must be positive")


class _Rejected(Exception):
    """A time step that has to be retried with a smaller dt."""

    def __init__(self, reason, negative=False):
        Exception.__init__(self, reason)
        self.negative = negative


class StrongSolver(object):
    """One finite volume discretization of the strong problem.

    physical, when given, is an object with attributes sigma, beta, theta
    and kappa; the membrane then moves with -sigma (n - 1) / r + beta u,
    the total mass is theta and the integrand must be z log z.
    """

    def __init__(self, f, cfg, grid, physical=None):
        self.f = f
        self.cfg = cfg
        self.grid = grid
        self.n = cfg.dim.n
        self.omega = cfg.dim.omega
        J = grid.cells
        self.y = np.linspace(0.0, 1.0, J + 1)
        self.dy = 1.0 / J
        self.shells = self.omega * np.diff(self.y ** self.n)
        if physical is None:
            self.sigma = self.beta = self.total = 1.0
            self.kappa = cfg.kappa
        else:
            if f.name != "zlogz":
                raise DomainError("physical parameters need the z log z "
                                  "integrand, not %s" % f.name)
            self.sigma = float(physical.sigma)
            self.beta = float(physical.beta)
            self.total = float(physical.theta)
            self.kappa = float(physical.kappa)

    def discretize(self, initial, radius=None):
        """Return (r, cell masses) of a RadialState or a RadialDensity
        supported in the ball of the given radius."""
        if isinstance(initial, RadialState):
            initial.u.check_atoms()
            r = initial.r
            S = initial.u.volumes
            knots = np.concatenate([[0.0], S, [self.omega * r ** self.n]])
            levels = np.concatenate([[0.0], initial.u.sigma, [1.0]])
            edges = self.omega * (r * self.y) ** self.n
            cum = np.interp(edges, knots, levels)
        elif isinstance(initial, RadialDensity):
            if radius is None:
                raise DomainError("a density needs an initial radius")
            r = float(radius)
            mass = initial.mass()
            if abs(mass - self.total) > MASS_TOL * self.total:
                raise MassError("density has mass %.12g, expected %.12g" %
                                (mass, self.total))
            cum = initial.cdf(r * self.y) / mass
            if cum[-1] < 1.0 - 1e-9:
                raise ProfileError("density is not supported in the ball "
                                   "of radius %g" % r)
            cum /= cum[-1]
        else:
            raise TypeError("cannot discretize %r" % (initial,))
        if not r > 0:
            raise DomainError("initial radius must be positive")
        return r, np.diff(cum) * self.total

    def densities(self, r, m):
        return m / (r ** self.n * self.shells)

    def trace(self, u):
        """Density at the membrane, extrapolated linearly from the
        centers of the last two cells and clamped at zero as in
        boundary_density()."""
        return max(u[-1] + 0.5 * (u[-1] - u[-2]), 0.0)

    def velocity(self, r, u):
        """r' from the boundary law."""
        force = (-self.sigma * (self.n - 1) / r +
                 self.beta * float(self.f.f_hat(self.trace(u))))
        if self.cfg.variant == PERMEABILITY:
            return force / perimeter(r, self.cfg.dim)
        return force

    def energy(self, r, m):
        """EnergyBreakdown of the discrete state."""
        volumes = r ** self.n * self.shells
        u = m / volumes
        return EnergyBreakdown(self.sigma * perimeter(r, self.cfg.dim),
                               self.beta * np.sum(volumes * self.f.f(u)))

    def _edges(self, r, rdot):
        edges = r * self.y[1:-1]
        area = perimeter(edges, self.cfg.dim)
        conductance = self.kappa * area / (r * self.dy)
        drift = area * rdot * self.y[1:-1]
        return conductance, drift

    def explicit_limit(self, r, m):
        """Largest stable step of the explicit scheme."""
        u = self.densities(r, m)
        conductance, _drift = self._edges(r, 0.0)
        total = np.zeros(len(m))
        total[:-1] += conductance
        total[1:] += conductance
        slope = np.maximum(self.f.f_hat_prime(u), 1e-300)
        volumes = r ** self.n * self.shells
        return 0.45 * float(np.min(volumes / (total * slope)))

    def advance(self, r, m, dt, energy):
        """Return (r, m, energy) after one step of size dt or raise
        _Rejected."""
        u = self.densities(r, m)
        rdot = self.velocity(r, u)
        r_new = r + dt * rdot
        if not r_new > 0:
            raise _Rejected("radius collapsed")
        volumes = r_new ** self.n * self.shells
        conductance, drift = self._edges(r_new, rdot)
        if self.grid.scheme == SEMI_IMPLICIT:
            h1 = self.f.f_hat_prime(u)
            c = self.f.f_hat(u) - h1 * u
            main = volumes.copy()
            main[:-1] += dt * (conductance * h1[:-1] - 0.5 * drift)
            main[1:] += dt * (conductance * h1[1:] + 0.5 * drift)
            upper = dt * (-conductance * h1[1:] - 0.5 * drift)
            lower = dt * (-conductance * h1[:-1] + 0.5 * drift)
            rhs = np.array(m, dtype=float)
            jump = dt * conductance * np.diff(c)
            rhs[:-1] += jump
            rhs[1:] -= jump
            matrix = diags([lower, main, upper], [-1, 0, 1], format='csc')
            u_new = spsolve(matrix, rhs)
            m_new = u_new * volumes
        else:
            h = self.f.f_hat(u)
            flux = (-conductance * np.diff(h) -
                    0.5 * drift * (u[:-1] + u[1:]))
            m_new = np.array(m, dtype=float)
            m_new[:-1] -= dt * flux
            m_new[1:] += dt * flux
            u_new = m_new / volumes
        if not np.all(np.isfinite(u_new)):
            raise _Rejected("non-finite density")
        if np.any(u_new < 0):
            raise _Rejected("negative density %g" % np.min(u_new), True)
        drift_error = abs(m_new.sum() - m.sum())
        if drift_error > MASS_DRIFT * self.total:
            raise OracleError("mass drifted by %g in one step" % drift_error)
        new_energy = self.energy(r_new, m_new)
        if new_energy.total > energy.total + 1e-9 * max(1.0,
                                                         abs(energy.total)):
            raise _Rejected("energy rose from %.17g to %.17g" %
                            (energy.total, new_energy.total))
        return r_new, m_new, new_energy

    def snapshot(self, r, m):
        """RadialState of the discrete state."""
        profile = quantiles_from_cell_masses(r * self.y, m, self.cfg.dim,
                                             self.grid.quantiles)
        return RadialState(r, profile)


def solve_strong(initial, horizon, f, cfg, grid=None, radius=None,
                 physical=None, progress=None):
    """Solve the strong problem up to horizon and return a Trajectory.

    initial is a RadialState or a RadialDensity together with radius.
    States are recorded every grid.record_every nominal steps.
    """
    grid = grid or OracleGrid()
    progress = progress or base.OpProgress()
    horizon = float(horizon)
    if not horizon > 0:
        raise DomainError("horizon must be positive, got %r" % horizon)
    solver = StrongSolver(f, cfg, grid, physical)
    r, m = solver.discretize(initial, radius)
    energy = solver.energy(r, m)
    traj = Trajectory(cfg, f, "oracle")
    state = solver.snapshot(r, m)
    traj.append(0.0, state, StepRecord(energy))
    count = max(1, int(math.ceil(horizon / grid.dt - 1e-9)))
    floor = grid.dt * 2.0 ** -grid.max_halvings
    dt, t, substeps = grid.dt, 0.0, 0
    progress.op = "Solving the strong problem"
    progress.update(0)
    for k in range(1, count + 1):
        target = min(k * grid.dt, horizon)
        while target - t > 1e-12 * max(1.0, target):
            step = min(dt, target - t)
            if grid.scheme == EXPLICIT:
                step = min(step, solver.explicit_limit(r, m))
            try:
                r, m, energy = solver.advance(r, m, step, energy)
            except _Rejected as reason:
                dt = 0.5 * step
                logging.debug("t=%.6g: %s, halving dt to %g", t, reason, dt)
                if dt < floor:
                    error = (NegativityError if reason.negative
                             else StabilityError)
                    raise error("time step below %g at t=%g: %s" %
                                (floor, t, reason), traj)
                continue
            except OracleError as error:
                error.trajectory = traj
                raise
            t += step
            substeps += 1
            dt = min(grid.dt, 2 * dt)
        t = target
        if k % grid.record_every == 0 or k == count:
            new_state = solver.snapshot(r, m)
            traj.append(t, new_state,
                        StepRecord(energy, rho_dist(state, new_state, cfg),
                                   substeps))
            state, substeps = new_state, 0
        progress.update(100.0 * k / count)
    progress.done()
    logging.info("strong solve reached t=%g with r=%.12g, last dt %g", t, r,
                 dt)
    return traj


class BumpTestFunction(object):
    """Test function exp(-(rho / length)**2) b((t - center) / width)
    with the smooth bump b(s) = exp(-1 / (1 - s**2)) on |s| < 1."""

    def __init__(self, center, width, length=1.0):
        if not width > 0 or not length > 0:
            raise DomainError("bump width and length must be positive")
        self.center = float(center)
        self.width = float(width)
        self.length = float(length)

    def _s(self, t):
        return (np.asarray(t, dtype=float) - self.center) / self.width

    def _gap(self, t):
        s = self._s(t)
        inside = np.abs(s) < 1
        return s, inside, np.where(inside, 1.0 - s ** 2, 1.0)

    def time_factor(self, t):
        _s, inside, gap = self._gap(t)
        return np.where(inside, np.exp(-1.0 / gap), 0.0)

    def time_derivative(self, t):
        s, inside, gap = self._gap(t)
        return np.where(inside, np.exp(-1.0 / gap) * -2.0 * s / gap ** 2 /
                        self.width, 0.0)

    def space_factor(self, rho):
        return np.exp(-(np.asarray(rho, dtype=float) / self.length) ** 2)

    def space_derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -2.0 * rho / self.length ** 2 * self.space_factor(rho)

    def __call__(self, rho, t):
        return self.space_factor(rho) * self.time_factor(t)

    def ball_integral(self, r, dim):
        """Integral of the space factor over the ball of radius r."""
        half = 0.5 * dim.n
        return (dim.n * dim.omega * self.length ** dim.n * gamma(half) / 2 *
                gammainc(half, (np.asarray(r) / self.length) ** 2))

    def check_window(self, start, end):
        if self.center - self.width < start or self.center + self.width > end:
            raise TestFunctionError(
                "test function support (%g, %g) leaves [%g, %g]" %
                (self.center - self.width, self.center + self.width,
                 start, end))

    def __repr__(self):
        return "BumpTestFunction(%r, %r, %r)" % (self.center, self.width,
                                                 self.length)


def default_test_functions(horizon):
    """A family of bumps with supports inside (0, horizon)."""
    return [BumpTestFunction(c * horizon, 0.25 * horizon, length)
            for c in (0.3, 0.5, 0.7) for length in (0.5, 1.0)]


class WeakResidual(object):
    """Both sides of a weak identity and the scale of their integrands."""

    def __init__(self, lhs, rhs, scale):
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        self.scale = float(scale)

    @property
    def residual(self):
        return self.lhs - self.rhs

    @property
    def scaled(self):
        """residual / scale"""
        if self.scale == 0:
            return 0.0
        return abs(self.residual) / self.scale

    def __repr__(self):
        return "<WeakResidual %.3g of %.3g>" % (self.residual, self.scale)


def weak_residual_diffusion(traj, phi, f, cfg):
    """Weak form of the diffusion equation tested with phi.

    lhs = (1 / kappa) int int u phi_t and rhs = int int u grad f'(u) .
    grad phi, with the space integrals taken by midpoint quadrature over
    the quantiles and the time integrals by the trapezoidal rule.
    """
    times = np.asarray(traj.times)
    phi.check_window(times[0], times[-1])
    rows = []
    for t, state in zip(times, traj.states):
        b, db = phi.time_factor(t), phi.time_derivative(t)
        if b == 0 and db == 0:
            rows.append((0.0, 0.0, 0.0, 0.0))
            continue
        left = phi.space_factor(state.q) * db / cfg.kappa
        right = (quantile_gradient(state, f) *
                 phi.space_derivative(state.q) * b)
        rows.append((np.mean(left), np.mean(right), np.mean(np.abs(left)),
                     np.mean(np.abs(right))))
    lhs, rhs, lhs_abs, rhs_abs = np.array(rows).T
    return WeakResidual(trapezoid(lhs, times), trapezoid(rhs, times),
                        trapezoid(lhs_abs, times) + trapezoid(rhs_abs, times))


def _boundary_weight(r, cfg):
    if cfg.variant == PERMEABILITY:
        return 1.0
    return perimeter(r, cfg.dim)


def weak_residual_boundary(traj, psi, f, cfg):
    """Weak form of the boundary law tested with psi.

    lhs = int int_B_r psi_t and rhs = int w(r) ((n - 1) / r - f_hat(u(r)))
    psi(r, t) dt with the metric weight w.
    """
    times = np.asarray(traj.times)
    psi.check_window(times[0], times[-1])
    dim = cfg.dim
    lhs, rhs = [], []
    for t, state in zip(times, traj.states):
        lhs.append(float(psi.time_derivative(t) *
                         psi.ball_integral(state.r, dim)))
        force = ((dim.n - 1) / state.r -
                 float(f.f_hat(boundary_density(state))))
        rhs.append(float(_boundary_weight(state.r, cfg) * force *
                         psi(state.r, t)))
    lhs, rhs = np.array(lhs), np.array(rhs)
    return WeakResidual(trapezoid(lhs, times), trapezoid(rhs, times),
                        trapezoid(np.abs(lhs), times) +
                        trapezoid(np.abs(rhs), times))


def boundary_transport(traj, psi, cfg):
    """-int psi(r, t) P_n(r) r' dt along the sampled radius."""
    times = np.asarray(traj.times)
    radii = traj.radii()
    rdot = np.gradient(radii, times)
    values = -psi(radii, times) * perimeter(radii, cfg.dim) * rdot
    return float(trapezoid(values, times))


class CompareReport(object):
    """Distances between two trajectories at common times."""

    def __init__(self, times, distances):
        self.times = np.asarray(times)
        self.distances = np.asarray(distances)

    @property
    def max_distance(self):
        return float(np.max(self.distances))

    @property
    def final_distance(self):
        return float(self.distances[-1])


def compare(jko_traj, oracle_traj, cfg, start_tol=0.05):
    """Compare a flow with a strong solution at the flow's times.

    Oracle states are interpolated in time and resampled to the flow's
    quantile count.  The runs must start within start_tol of each other.
    """
    first = resample(oracle_traj.states[0].u, jko_traj.states[0].M)
    start = rho_dist(jko_traj.states[0],
                     RadialState(oracle_traj.states[0].r, first), cfg)
    if start > start_tol:
        raise SetupMismatch("trajectories start %g apart" % start)
    end = min(jko_traj.times[-1], oracle_traj.times[-1])
    times, distances = [], []
    for t, state in zip(jko_traj.times, jko_traj.states):
        if t > end * (1 + 1e-12):
            break
        try:
            other = oracle_traj.state_at(min(t, oracle_traj.times[-1]))
        except RangeError:
            continue
        other = RadialState(other.r, resample(other.u, state.M))
        times.append(t)
        distances.append(rho_dist(state, other, cfg))
    return CompareReport(times, distances)
