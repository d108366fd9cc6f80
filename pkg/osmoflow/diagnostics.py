# diagnostics.py - slopes, dissipation and convexity checks
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
"""Diagnostics of discrete flows.

A curve of maximal slope satisfies the energy dissipation identity

    dE/dt + |dE|**2 / 2 + |x'|**2 / 2 = 0

with the local slope

    |dE|**2 = w(r) ((n - 1) / r - f_hat(u(r)))**2
              + kappa * integral of |grad f_hat(u)|**2 / u

where w = P_n(r) for surface tension and w = 1 for permeability.  The
functions here evaluate the slope of states, the residual of the identity
along trajectories, the evolution variational inequality against a probe
state and three point convexity defects along geodesics.

Time derivatives are central differences at interior nodes; requested
times are snapped to the nearest interior node.
"""
import numpy as np

from osmoflow.energy import cell_densities, total_energy
from osmoflow.geometry import (PERMEABILITY, perimeter, perimeter_modulus)
from osmoflow.state import (RangeError, coupled_geodesic, metric_derivative,
                            rho_dist, state_velocity)

__all__ = ['RangeError', 'SlopeReport', 'DissipationSample',
           'ConvexityReport', 'ContractionReport', 'boundary_density',
           'quantile_gradient', 'local_slope', 'lyapunov_rate',
           'energy_rate', 'dissipation_residual', 'dissipation_series',
           'max_dissipation_ratio', 'slope_series', 'evi_residual',
           'evi_series', 'convexity_probe', 'contraction_report',
           'trajectory_table', 'diagnostics_table']

RATE_FLOOR = 1e-8


def _pressures(state, f):
    _widths, _masses, densities = cell_densities(state.u, state.r)
    return densities, f.f_hat(densities)


def boundary_density(state):
    """Density at the membrane.

    Extrapolates linearly from the centers of the last dual cell and the
    outer cell to the radius, clamped at zero.
    """
    widths, _masses, densities = cell_densities(state.u, state.r)
    q = state.q
    inner_edge = q[-2] if state.M > 1 else 0.0
    center_a = 0.5 * (inner_edge + q[-1])
    center_b = 0.5 * (q[-1] + state.r)
    za, zb = densities[-2], densities[-1]
    value = zb + (zb - za) * (state.r - center_b) / (center_b - center_a)
    return max(float(value), 0.0)


def quantile_gradient(state, f):
    """Gradient of the internal energy with respect to the quantile
    function: M * P_n(q_i) * (p_i+1/2 - p_i-1/2)."""
    _densities, p = _pressures(state, f)
    return state.M * perimeter(state.q, state.dim) * np.diff(p)


class SlopeReport(object):
    """The boundary and interior parts of the squared local slope."""

    def __init__(self, boundary_term, interior_term, boundary_force):
        self.boundary_term = float(boundary_term)
        self.interior_term = float(interior_term)
        self.boundary_force = float(boundary_force)

    @property
    def slope(self):
        """The local slope."""
        return float(np.sqrt(self.boundary_term + self.interior_term))

    def __repr__(self):
        return "<SlopeReport slope=%.17g boundary=%.17g interior=%.17g>" % (
            self.slope, self.boundary_term, self.interior_term)


def _boundary_force(state, f):
    """(n - 1) / r - f_hat(u(r))"""
    u_b = boundary_density(state)
    return (state.dim.n - 1) / state.r - float(f.f_hat(u_b))


def local_slope(s, f, cfg):
    """Return the SlopeReport of the state s."""
    force = _boundary_force(s, f)
    if cfg.variant == PERMEABILITY:
        weight = 1.0
    else:
        weight = perimeter(s.r, s.dim)
    grad = quantile_gradient(s, f)
    interior = cfg.kappa * np.mean(grad ** 2)
    return SlopeReport(weight * force ** 2, interior, force)


def lyapunov_rate(s, f, cfg):
    """Energy rate of the strong solution through s,
    -w (boundary force)**2 - kappa * integral |grad f_hat|**2 / u."""
    report = local_slope(s, f, cfg)
    return -(report.boundary_term + report.interior_term)


def _node(traj, t):
    return traj.nearest_node(t, interior=True)


def energy_rate(traj, t, f, cfg):
    """dE/dt at the interior node nearest t by the chain rule."""
    k = _node(traj, t)
    state = traj.states[k]
    rdot, qdot = state_velocity(traj, k)
    boundary = _boundary_force(state, f) * perimeter(state.r, state.dim)
    return float(boundary * rdot +
                 np.mean(quantile_gradient(state, f) * qdot))


class DissipationSample(object):
    """Terms of the dissipation identity at one node."""

    def __init__(self, t, rate, slope, speed):
        self.t = t
        self.rate = rate
        self.slope = slope
        self.speed = speed

    @property
    def residual(self):
        """dE/dt + slope**2 / 2 + speed**2 / 2"""
        return self.rate + 0.5 * self.slope ** 2 + 0.5 * self.speed ** 2

    @property
    def ratio(self):
        """|residual| / |dE/dt|"""
        if self.rate == 0:
            return 0.0 if self.residual == 0 else np.inf
        return abs(self.residual) / abs(self.rate)


def _sample(traj, k, f, cfg):
    times = traj.times
    energies = traj.energies()
    dt = times[k + 1] - times[k - 1]
    rate = (energies[k + 1] - energies[k - 1]) / dt
    slope = local_slope(traj.states[k], f, cfg).slope
    speed = metric_derivative(traj, times[k], cfg)
    return DissipationSample(times[k], rate, slope, speed)


def dissipation_residual(traj, t, f, cfg):
    """The DissipationSample at the interior node nearest t."""
    return _sample(traj, _node(traj, t), f, cfg)


def dissipation_series(traj, f, cfg):
    """DissipationSamples at all interior nodes."""
    return [_sample(traj, k, f, cfg) for k in range(1, len(traj) - 1)]


def max_dissipation_ratio(samples, t_min=0.0, t_max=np.inf):
    """Largest ratio over samples in [t_min, t_max].

    Samples with |dE/dt| below RATE_FLOOR times the largest rate are
    dominated by round-off and skipped.
    """
    chosen = [s for s in samples if t_min <= s.t <= t_max]
    if not chosen:
        return 0.0
    top = max(abs(s.rate) for s in chosen)
    ratios = [s.ratio for s in chosen if abs(s.rate) >= RATE_FLOOR * top]
    return max(ratios) if ratios and top > 0 else 0.0


def slope_series(traj, f, cfg):
    """Local slopes at all nodes."""
    return np.array([local_slope(s, f, cfg).slope for s in traj.states])


def _evi(traj, k, probe, lam, probe_energy, cfg):
    times = traj.times
    before = rho_dist(traj.states[k - 1], probe, cfg) ** 2
    after = rho_dist(traj.states[k + 1], probe, cfg) ** 2
    here = rho_dist(traj.states[k], probe, cfg) ** 2
    derivative = (after - before) / (times[k + 1] - times[k - 1])
    return (0.5 * derivative + 0.5 * lam * here +
            traj.records[k].energy.total - probe_energy)


def evi_residual(traj, t, probe, lam, f, cfg):
    """Evolution variational inequality residual against probe.

    Returns d/dt rho(x, probe)**2 / 2 + lam rho(x, probe)**2 / 2
    + E(x) - E(probe) at the interior node nearest t; a lam-convex flow
    keeps it <= 0 up to discretization error.
    """
    probe_energy = total_energy(probe, f, cfg).total
    return float(_evi(traj, _node(traj, t), probe, lam, probe_energy, cfg))


def evi_series(traj, probe, lam, f, cfg):
    """evi_residual() at all interior nodes."""
    probe_energy = total_energy(probe, f, cfg).total
    return np.array([_evi(traj, k, probe, lam, probe_energy, cfg)
                     for k in range(1, len(traj) - 1)])


class ConvexityReport(object):
    """Three point defects along a coupled geodesic.

    A defect is the worst value of
    (1 - t) g(0) + t g(1) - lam t (1 - t) d**2 / 2 - g(t), which is >= 0 when
    g is lam-convex along the curve.  dist_defect is for rho(w, .)**2 / 2
    with lam = 1, energy_defect for E with energy_lambda and moreau_defect
    for E + rho(w, .)**2 / (2 h) with energy_lambda + 1 / h.
    energy_modulus is the largest lam for which E passes.
    """

    def __init__(self, dist_defect, energy_defect, energy_modulus,
                 modulus_bound, moreau_defect, energy_lambda):
        self.dist_defect = dist_defect
        self.energy_defect = energy_defect
        self.energy_modulus = energy_modulus
        self.modulus_bound = modulus_bound
        self.moreau_defect = moreau_defect
        self.energy_lambda = energy_lambda

    def passed(self, tol=1e-8):
        """True if all defects are >= -tol."""
        return min(self.dist_defect, self.energy_defect,
                   self.moreau_defect) >= -tol


def _defect(values, taus, lam, d2):
    start, end = values[0], values[-1]
    inner = taus[1:-1]
    chords = (1 - inner) * start + inner * end
    return float(np.min(chords - 0.5 * lam * inner * (1 - inner) * d2 -
                        values[1:-1]))


def convexity_probe(a, b, w, tau_samples, h, f, cfg, lam=None):
    """Probe convexity along the coupled geodesic from a to b.

    tau_samples is the number of interior parameters.  lam is the assumed
    modulus of the energy; by default 0 for n >= 3 and the perimeter
    modulus over the radii of the geodesic for n = 2.
    """
    taus = np.linspace(0.0, 1.0, int(tau_samples) + 2)
    curve = [coupled_geodesic(a, b, t, cfg) for t in taus]
    d2 = rho_dist(a, b, cfg) ** 2
    dist = np.array([0.5 * rho_dist(w, s, cfg) ** 2 for s in curve])
    energy = np.array([total_energy(s, f, cfg).total for s in curve])
    r_lo, r_hi = min(a.r, b.r), max(a.r, b.r)
    bound = perimeter_modulus(r_lo, r_hi, cfg.dim, cfg.variant)
    if lam is None:
        lam = 0.0 if cfg.dim.n >= 3 else min(bound, 0.0)
    if d2 == 0:
        return ConvexityReport(0.0, 0.0, np.inf, bound, 0.0, lam)
    inner = taus[1:-1]
    chords = (1 - inner) * energy[0] + inner * energy[-1]
    modulus = float(np.min(2 * (chords - energy[1:-1]) /
                           (inner * (1 - inner) * d2)))
    moreau = energy + dist / h
    return ConvexityReport(_defect(dist, taus, 1.0, d2),
                           _defect(energy, taus, lam, d2), modulus, bound,
                           _defect(moreau, taus, lam + 1.0 / h, d2), lam)


class ContractionReport(object):
    """Distances of two flows against the bound exp(-lam t) rho(0)."""

    def __init__(self, times, distances, bounds):
        self.times = np.asarray(times)
        self.distances = np.asarray(distances)
        self.bounds = np.asarray(bounds)

    @property
    def max_ratio(self):
        """Largest distance / bound; at most 1 for a contraction."""
        if self.bounds[0] == 0:
            return 0.0 if np.all(self.distances == 0) else np.inf
        return float(np.max(self.distances / self.bounds))

    @property
    def max_excess(self):
        """Largest distance - bound."""
        return float(np.max(self.distances - self.bounds))


def contraction_report(traj_a, traj_b, lam, cfg):
    """Compare two flows on the same time grid."""
    if len(traj_a) != len(traj_b) or not np.allclose(
            traj_a.times, traj_b.times, rtol=1e-12, atol=0):
        raise RangeError("trajectories are sampled at different times")
    times = np.asarray(traj_a.times)
    distances = [rho_dist(a, b, cfg)
                 for a, b in zip(traj_a.states, traj_b.states)]
    bounds = np.exp(-lam * (times - times[0])) * distances[0]
    return ContractionReport(times, distances, bounds)


TRAJECTORY_HEADER = ('t', 'r', 'energy_total', 'energy_perimeter',
                     'energy_internal', 'step_dist', 'iterations',
                     'residual', 'slope', 'dissipation_residual')

DIAGNOSTICS_HEADER = ('t', 'slope', 'boundary_term', 'interior_term',
                      'energy_rate', 'energy_rate_chain', 'metric_speed',
                      'dissipation_residual', 'dissipation_ratio',
                      'evi_residual')


def trajectory_table(traj, f, cfg):
    """Return (header, rows) describing every node of traj."""
    residuals = [np.nan] + [s.residual for s in
                            dissipation_series(traj, f, cfg)]
    if len(traj) > 1:
        residuals.append(np.nan)
    slopes = slope_series(traj, f, cfg)
    rows = []
    for k, (t, state) in enumerate(zip(traj.times, traj.states)):
        rec = traj.records[k]
        rows.append((t, state.r, rec.energy.total, rec.energy.perimeter_term,
                     rec.energy.internal_term, rec.step_dist,
                     rec.iterations, rec.residual, slopes[k],
                     residuals[k]))
    return TRAJECTORY_HEADER, rows


def diagnostics_table(traj, f, cfg, probe=None, lam=0.0):
    """Return (header, rows) of the dissipation and EVI diagnostics."""
    rows = []
    evi = evi_series(traj, probe, lam, f, cfg) if probe is not None else None
    for k, sample in enumerate(dissipation_series(traj, f, cfg)):
        report = local_slope(traj.states[k + 1], f, cfg)
        rows.append((sample.t, report.slope, report.boundary_term,
                     report.interior_term, sample.rate,
                     energy_rate(traj, sample.t, f, cfg), sample.speed,
                     sample.residual, sample.ratio,
                     evi[k] if evi is not None else np.nan))
    return DIAGNOSTICS_HEADER, rows
