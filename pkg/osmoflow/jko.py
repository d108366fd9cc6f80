# jko.py - minimizing movement steps and discrete flows
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
"""Minimizing movements.

One step from the state prev with time step tau minimizes

    Phi(x) = E(x) + rho(prev, x)**2 / (2 tau)

over admissible states x = (q_1, ..., q_M, r).  In these coordinates the
squared distance is separable, (iota(r) - iota(r_prev))**2 plus
sum((q - q_prev)**2) / (M kappa), and the energy only couples neighbouring
quantiles, so the Hessian of Phi is tridiagonal.  Steps are computed by
damped Newton iterations (or L-BFGS-B) under a decreasing log barrier on
the gaps 0 < q_1 < ... < q_M < r.
"""
import logging

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded
from scipy.optimize import minimize

from osmoflow.energy import (SolverError, cell_masses, total_energy)
from osmoflow.geometry import (DomainError, perimeter, perimeter_derivative,
                               radius_iota, radius_iota_derivative)
from osmoflow.profile import ProfileError, resample
from osmoflow.progress import base
from osmoflow.state import (RadialState, RangeError, SupportError,
                            rho_dist)

__all__ = ['NEWTON', 'LBFGS', 'SOLVERS', 'SolverError', 'ConvergenceError',
           'FlowError', 'JkoConfig', 'MoreauYosida', 'StepResult',
           'StepRecord', 'Trajectory', 'minimize_step', 'jko_step',
           'moreau_yosida_objective', 'objective_gradient', 'run_flow',
           'refinement_study']

NEWTON = "newton"
LBFGS = "lbfgs"
SOLVERS = (NEWTON, LBFGS)

ARMIJO = 1e-4


class ConvergenceError(SolverError):
    """The step minimization did not reach the tolerance."""

    def __init__(self, msg, residual, iterations):
        SolverError.__init__(self, msg)
        self.residual = residual
        self.iterations = iterations


class FlowError(SolverError):
    """A discrete flow stopped early; trajectory holds what was computed."""

    def __init__(self, msg, trajectory, step):
        SolverError.__init__(self, msg)
        self.trajectory = trajectory
        self.step = step


class JkoConfig(object):
    """Settings of the minimizing movement scheme.

    tau is the uniform time step unless an explicit sequence of steps is
    given.  M is the number of quantiles of a flow.  barrier_schedule lists
    the log barrier weights of the successive solves, the last one may be
    zero.  modulus is an optional (negative) convexity modulus, which
    limits tau to below 1 / -modulus.
    """

    def __init__(self, tau=1e-3, M=200, opt_tol=1e-8, max_iters=100,
                 barrier_schedule=(1e-6, 1e-9, 0.0), steps=None,
                 solver=NEWTON, restarts=0, modulus=None):
        self.tau = float(tau)
        self.M = int(M)
        self.opt_tol = float(opt_tol)
        self.max_iters = int(max_iters)
        self.barrier_schedule = tuple(float(b) for b in barrier_schedule)
        self.steps = None if steps is None else tuple(float(s) for s in steps)
        self.solver = solver
        self.restarts = int(restarts)
        self.modulus = modulus
        self.validate()

    def validate(self):
        """Raise DomainError for inconsistent settings."""
        if not self.tau > 0:
            raise DomainError("time step must be positive, got %r" % self.tau)
        if self.M < 1:
            raise DomainError("need at least one quantile, got %d" % self.M)
        if not self.opt_tol > 0 or self.max_iters < 1:
            raise DomainError("tolerance and iteration cap must be positive")
        schedule = self.barrier_schedule
        if (not schedule or min(schedule) < 0 or
                any(b < a for a, b in zip(schedule[1:], schedule))):
            raise DomainError("barrier schedule must be a nonempty, "
                              "nonincreasing list of weights >= 0")
        if self.steps is not None and (not self.steps or
                                       min(self.steps) <= 0):
            raise DomainError("explicit time steps must be positive")
        if self.solver not in SOLVERS:
            raise DomainError("unknown solver %r" % (self.solver,))
        if self.restarts < 0:
            raise DomainError("restarts must be >= 0")
        if self.modulus is not None and self.modulus < 0:
            longest = max(self.steps or (self.tau,))
            if longest * -self.modulus >= 1:
                raise DomainError("time step %g is not below 1/%g" %
                                  (longest, -self.modulus))

    def replace(self, **kwds):
        """Return a copy with some settings replaced."""
        args = dict(tau=self.tau, M=self.M, opt_tol=self.opt_tol,
                    max_iters=self.max_iters,
                    barrier_schedule=self.barrier_schedule, steps=self.steps,
                    solver=self.solver, restarts=self.restarts,
                    modulus=self.modulus)
        args.update(kwds)
        return JkoConfig(**args)

    def partition(self, horizon):
        """Return the time steps covering [0, horizon]."""
        horizon = float(horizon)
        if not horizon > 0:
            raise DomainError("horizon must be positive, got %r" % horizon)
        if self.steps is not None:
            if abs(sum(self.steps) - horizon) > 1e-9 * horizon:
                raise DomainError("time steps sum to %.17g, not %.17g" %
                                  (sum(self.steps), horizon))
            return np.array(self.steps)
        count = int(round(horizon / self.tau))
        if count >= 1 and abs(count * self.tau - horizon) <= 1e-9 * horizon:
            return np.full(count, self.tau)
        count = int(horizon // self.tau)
        return np.append(np.full(count, self.tau), horizon - count * self.tau)


class MoreauYosida(object):
    """The objective Phi of one step from prev, as a function of
    x = (q_1, ..., q_M, r).

    value() returns inf outside the admissible set.  barrier adds
    -barrier * sum(log(gaps)) with gaps q_1, q_i+1 - q_i and r - q_M.
    """

    def __init__(self, prev, tau, f, cfg):
        if not tau > 0:
            raise DomainError("time step must be positive, got %r" % tau)
        self.prev = prev
        self.tau = float(tau)
        self.f = f
        self.cfg = cfg
        self.M = prev.M
        self.n = cfg.dim.n
        self.omega = cfg.dim.omega
        self.masses = cell_masses(self.M)
        self.q_prev = np.array(prev.q)
        self.iota_prev = radius_iota(prev.r, cfg.dim, cfg.variant)
        self.weight = 1.0 / (self.M * cfg.kappa * self.tau)

    @staticmethod
    def gaps(x):
        """Distances between consecutive coordinates, starting at 0."""
        return np.diff(np.concatenate([[0.0], x]))

    def _cells(self, x):
        S = self.omega * x ** self.n
        widths = np.diff(np.concatenate([[0.0], S]))
        return widths, self.masses / widths

    def _iota(self, r, order=0):
        dim, variant = self.cfg.dim, self.cfg.variant
        if order == 0:
            return radius_iota(r, dim, variant)
        return radius_iota_derivative(r, dim, variant, order)

    def value(self, x, barrier=0.0):
        gaps = self.gaps(x)
        if not np.all(gaps > 0):
            return np.inf
        widths, z = self._cells(x)
        if not np.all(widths > 0):
            return np.inf
        r = x[-1]
        result = (perimeter(r, self.cfg.dim) +
                  np.sum(widths * self.f.f(z)) +
                  (self._iota(r) - self.iota_prev) ** 2 / (2 * self.tau) +
                  0.5 * self.weight * np.sum((x[:-1] - self.q_prev) ** 2))
        if barrier:
            result -= barrier * np.sum(np.log(gaps))
        return float(result)

    def _energy_gradient(self, z):
        p = self.f.f_hat(z)
        g = np.empty(self.M + 1)
        g[:-1] = p[1:] - p[:-1]
        g[-1] = -p[-1]
        return g

    def gradient(self, x, barrier=0.0):
        _widths, z = self._cells(x)
        r = x[-1]
        grad = perimeter(x, self.cfg.dim) * self._energy_gradient(z)
        grad[-1] += (perimeter_derivative(r, self.cfg.dim) +
                     (self._iota(r) - self.iota_prev) * self._iota(r, 1) /
                     self.tau)
        grad[:-1] += self.weight * (x[:-1] - self.q_prev)
        if barrier:
            w = barrier / self.gaps(x)
            grad -= w
            grad[:-1] += w[1:]
        return grad

    def hessian_bands(self, x, barrier=0.0):
        """Return (diagonal, superdiagonal) of the Hessian of Phi."""
        _widths, z = self._cells(x)
        n, r = self.n, x[-1]
        c = self.f.f_hat_prime(z) * z ** 2 / self.masses
        diag = np.empty(self.M + 1)
        diag[:-1] = c[:-1] + c[1:]
        diag[-1] = c[-1]
        jac = perimeter(x, self.cfg.dim)
        diag = (jac ** 2 * diag +
                perimeter_derivative(x, self.cfg.dim) *
                self._energy_gradient(z))
        off = -jac[:-1] * jac[1:] * c[1:]
        diag[:-1] += self.weight
        diag[-1] += (n * (n - 1) * (n - 2) * self.omega * r ** (n - 3) +
                     (self._iota(r, 1) ** 2 +
                      (self._iota(r) - self.iota_prev) * self._iota(r, 2)) /
                     self.tau)
        if barrier:
            w2 = barrier / self.gaps(x) ** 2
            diag += w2
            diag[:-1] += w2[1:]
            off -= w2[1:]
        return diag, off

    def residual(self, x, grad=None, barrier=0.0):
        """Norm of the gradient measured in the state metric."""
        if grad is None:
            grad = self.gradient(x, barrier)
        return float(np.sqrt((grad[-1] / self._iota(x[-1], 1)) ** 2 +
                             self.cfg.kappa * self.M *
                             np.sum(grad[:-1] ** 2)))


class StepResult(object):
    """Outcome of minimize_step()."""

    def __init__(self, state, objective, energy, iterations, residual):
        self.state = state
        self.objective = objective
        self.energy = energy
        self.iterations = iterations
        self.residual = residual


def _newton_direction(diag, off, grad):
    bands = np.zeros((2, len(diag)))
    bands[0, 1:] = off
    shift = 0.0
    for _attempt in range(30):
        bands[1] = diag + shift
        try:
            step = solveh_banded(bands, -grad)
        except LinAlgError:
            shift = max(10 * shift, 1e-10 * max(1.0, np.max(np.abs(diag))))
            continue
        if np.all(np.isfinite(step)) and np.dot(step, grad) < 0:
            return step
        shift = max(10 * shift, 1e-10 * max(1.0, np.max(np.abs(diag))))
    return -grad


def _boundary_fraction(x, step):
    gaps = MoreauYosida.gaps(x)
    change = MoreauYosida.gaps(step)
    shrinking = change < 0
    if not np.any(shrinking):
        return 1.0
    return min(1.0, 0.99 * float(np.min(-gaps[shrinking] /
                                        change[shrinking])))


def _newton(problem, x, barrier, tol, max_iters):
    """Damped Newton iterations; return (x, iterations, residual)."""
    for iteration in range(max_iters):
        grad = problem.gradient(x, barrier)
        res = problem.residual(x, grad)
        if res <= tol:
            return x, iteration, res
        step = _newton_direction(*problem.hessian_bands(x, barrier),
                                 grad=grad)
        alpha = _boundary_fraction(x, step)
        start = problem.value(x, barrier)
        slope = float(np.dot(grad, step))
        while alpha > 1e-16:
            trial = x + alpha * step
            value = problem.value(trial, barrier)
            if value <= start + ARMIJO * alpha * slope:
                break
            # at round-off level only the gradient can still improve
            if (value - start <= 1e-14 * (1 + abs(start)) and
                    problem.residual(trial, barrier=barrier) < res):
                break
            alpha *= 0.5
        else:
            if res <= 100 * tol:
                logging.debug("line search stalled at residual %g", res)
                return x, iteration, res
            raise ConvergenceError("line search failed at residual %g" % res,
                                   res, iteration)
        x = trial
    grad = problem.gradient(x, barrier)
    res = problem.residual(x, grad)
    if res <= tol:
        return x, max_iters, res
    raise ConvergenceError("no convergence in %d iterations (residual %g)" %
                           (max_iters, res), res, max_iters)


def _lbfgs(problem, x, barrier, tol, max_iters):
    """L-BFGS-B on the logarithms of the gaps."""
    def objective(logs):
        gaps = np.exp(logs)
        point = np.cumsum(gaps)
        grad = problem.gradient(point, barrier)
        return (problem.value(point, barrier),
                gaps * np.cumsum(grad[::-1])[::-1])

    result = minimize(objective, np.log(problem.gaps(x)), jac=True,
                      method='L-BFGS-B',
                      options={'maxiter': 50 * max_iters, 'maxcor': 20,
                               'ftol': 1e-16, 'gtol': 1e-3 * tol})
    x = np.cumsum(np.exp(result.x))
    res = problem.residual(x, barrier=barrier)
    if res > tol:
        raise ConvergenceError("L-BFGS-B stopped at residual %g: %s" %
                               (res, result.message), res, result.nit)
    return x, int(result.nit), res


def _interior(x):
    gaps = MoreauYosida.gaps(x)
    floor = 1e-6 * x[-1] / len(x)
    if np.all(gaps > floor):
        return np.array(x)
    return np.cumsum(np.maximum(gaps, floor))


def _project(x):
    x = np.array(x)
    q = np.maximum.accumulate(np.maximum(x[:-1], 0.0))
    x[:-1] = np.minimum(q, x[-1])
    return x


def _solve(problem, x, opt):
    solve = _newton if opt.solver == NEWTON else _lbfgs
    iterations = 0
    schedule = opt.barrier_schedule
    for stage, barrier in enumerate(schedule):
        tol = opt.opt_tol
        if barrier > 0 and stage < len(schedule) - 1:
            tol = max(tol, np.sqrt(barrier))
        x, its, res = solve(problem, x, barrier, tol, opt.max_iters)
        iterations += its
    return x, iterations, res


def minimize_step(prev, tau, f, cfg, opt=None):
    """Compute one minimizing movement step and return a StepResult."""
    opt = opt or JkoConfig(tau=tau, M=prev.M)
    problem = MoreauYosida(prev, tau, f, cfg)
    origin = prev.as_vector()
    starts = [_interior(origin)]
    for k in range(1, opt.restarts + 1):
        factor = 1.0 + 0.05 * ((k + 1) // 2) * (-1) ** k
        starts.append(_interior(origin * factor))
    best, failure = None, None
    for x0 in starts:
        try:
            x, iterations, res = _solve(problem, x0, opt)
        except ConvergenceError as error:
            failure = error
            continue
        x = _project(x)
        value = problem.value(x)
        if best is None or value < best[1]:
            best = (x, value, iterations, res)
    if best is None:
        raise failure
    x, value, iterations, res = best
    previous = problem.value(origin)
    if value > previous + 1e-12 * max(1.0, abs(previous)):
        logging.debug("step did not improve on its start (%.17g > %.17g)",
                      value, previous)
        x, value = origin, previous
    res = problem.residual(x)
    try:
        state = RadialState.from_vector(x, cfg.dim)
    except (ProfileError, SupportError) as error:
        raise SolverError("constraint violation after projection: %s" %
                          error)
    return StepResult(state, value, total_energy(state, f, cfg), iterations,
                      res)


def jko_step(prev, tau, f, cfg, opt=None):
    """Return the state reached by one minimizing movement step."""
    return minimize_step(prev, tau, f, cfg, opt).state


def moreau_yosida_objective(prev, candidate, tau, f, cfg):
    """Phi(candidate) for a step of size tau from prev."""
    return (total_energy(candidate, f, cfg).total +
            rho_dist(prev, candidate, cfg) ** 2 / (2.0 * tau))


def objective_gradient(prev, candidate, tau, f, cfg):
    """Gradient of Phi in (q_1, ..., q_M, r) at candidate."""
    return MoreauYosida(prev, tau, f, cfg).gradient(candidate.as_vector())


class StepRecord(object):
    """Per node data of a trajectory: the energy and, for the step ending
    at the node, its length, solver iterations and residual."""

    def __init__(self, energy, step_dist=0.0, iterations=0, residual=0.0):
        self.energy = energy
        self.step_dist = step_dist
        self.iterations = iterations
        self.residual = residual


class Trajectory(object):
    """A sampled curve of states with per node records."""

    def __init__(self, cfg, f=None, method="jko"):
        self.cfg = cfg
        self.f = f
        self.method = method
        self.times = []
        self.states = []
        self.records = []

    def append(self, t, state, record):
        if self.times and not t > self.times[-1]:
            raise RangeError("time %r does not follow %r" %
                             (t, self.times[-1]))
        self.times.append(float(t))
        self.states.append(state)
        self.records.append(record)

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k):
        return self.times[k], self.states[k]

    @property
    def final(self):
        """The last state."""
        return self.states[-1]

    def energies(self):
        """Total energies at the nodes."""
        return np.array([rec.energy.total for rec in self.records])

    def radii(self):
        """Radii at the nodes."""
        return np.array([s.r for s in self.states])

    def nearest_node(self, t, interior=True):
        """Index of the node closest to t."""
        times = np.asarray(self.times)
        if not times[0] <= t <= times[-1]:
            raise RangeError("time %r outside [%r, %r]" %
                             (t, times[0], times[-1]))
        k = int(np.argmin(np.abs(times - t)))
        if interior:
            if len(times) < 3:
                raise RangeError("no interior nodes")
            k = min(max(k, 1), len(times) - 2)
        return k

    def state_at(self, t):
        """State at time t, interpolating r and q linearly."""
        times = np.asarray(self.times)
        if not times[0] <= t <= times[-1]:
            raise RangeError("time %r outside [%r, %r]" %
                             (t, times[0], times[-1]))
        k = min(int(np.searchsorted(times, t, side='right')) - 1,
                len(times) - 2)
        if k < 0 or len(times) == 1:
            return self.states[0]
        theta = (t - times[k]) / (times[k + 1] - times[k])
        a, b = self.states[k].as_vector(), self.states[k + 1].as_vector()
        if a.shape != b.shape:
            raise RangeError("nodes %d and %d have different resolutions" %
                             (k, k + 1))
        return RadialState.from_vector((1 - theta) * a + theta * b,
                                       self.cfg.dim)


def run_flow(initial, horizon, f, cfg, opt=None, progress=None):
    """Run the minimizing movement scheme from initial up to horizon.

    Every step is checked for energy decrease, and the total dissipation
    sum(rho**2 / (2 tau)) for the bound E(initial) - E(final).  Failures
    raise FlowError carrying the trajectory computed so far.
    """
    opt = opt or JkoConfig()
    progress = progress or base.OpProgress()
    if initial.M != opt.M:
        logging.info("resampling initial state to %d quantiles", opt.M)
        initial = RadialState(initial.r, resample(initial.u, opt.M))
    energy = total_energy(initial, f, cfg)
    traj = Trajectory(cfg, f, "jko")
    if not np.isfinite(energy.total):
        raise FlowError("initial energy is not finite", traj, 0)
    traj.append(0.0, initial, StepRecord(energy))
    steps = opt.partition(horizon)
    times = np.cumsum(steps)
    start = current = energy.total
    dissipated = 0.0
    state = initial
    progress.op = "Running minimizing movements"
    progress.update(0)
    for k, tau in enumerate(steps):
        try:
            result = minimize_step(state, tau, f, cfg, opt)
        except SolverError as error:
            raise FlowError("step %d failed: %s" % (k + 1, error), traj, k + 1)
        dist = rho_dist(state, result.state, cfg)
        total = result.energy.total
        if total > current + 1e-10 * max(1.0, abs(current)):
            raise FlowError("energy increased from %.17g to %.17g in step %d"
                            % (current, total, k + 1), traj, k + 1)
        dissipated += dist ** 2 / (2 * tau)
        state, current = result.state, total
        traj.append(times[k], state,
                    StepRecord(result.energy, dist, result.iterations,
                               result.residual))
        logging.debug("step %d t=%.6g r=%.12g E=%.12g iterations=%d "
                      "residual=%.3g", k + 1, times[k], state.r, total,
                      result.iterations, result.residual)
        progress.update(100.0 * (k + 1) / len(steps))
    progress.done()
    if dissipated > start - current + 1e-10 * len(steps) * max(1.0,
                                                                abs(start)):
        raise FlowError("dissipation %.17g exceeds the energy drop %.17g" %
                        (dissipated, start - current), traj, len(steps))
    return traj


class RefinementReport(object):
    """Final states of flows with halved time steps and the distances
    between consecutive ones."""

    def __init__(self, taus, finals, differences):
        self.taus = taus
        self.finals = finals
        self.differences = differences


def refinement_study(initial, horizon, f, cfg, opt=None, levels=3):
    """Run the flow with tau, tau/2, ... and compare the final states."""
    opt = opt or JkoConfig()
    taus, finals = [], []
    for level in range(levels):
        tau = opt.tau / 2 ** level
        traj = run_flow(initial, horizon, f, cfg, opt.replace(tau=tau))
        taus.append(tau)
        finals.append(traj.final)
    differences = [rho_dist(a, b, cfg) for a, b in zip(finals, finals[1:])]
    return RefinementReport(taus, finals, differences)
