# cli.py - the osmoflow command line driver
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
"""Command line driver.

    osmoflow --config desk.conf --mode compare --out results/

runs flows and strong solutions, writes trajectory.csv, diagnostics.csv,
profile_<k>.csv and summary.json to the output directory and exits with

    0  success
    1  invalid configuration or integrand
    2  solver failure (partial outputs are kept)
    3  I/O failure
"""
from __future__ import print_function

import argparse
import concurrent.futures
import logging
import os
import sys

import numpy as np

from osmoflow import datafile, diagnostics
from osmoflow.config import (ConfigError, Configuration, RunConfig,
                             read_config_file, sweep_configuration)
from osmoflow.energy import (IntegrandError, SolverError, energy_floor,
                             equilibrium_radius, equilibrium_state,
                             require_valid)
from osmoflow.geometry import SURFACE_TENSION, perimeter_modulus
from osmoflow.jko import FlowError, run_flow
from osmoflow.pde_oracle import OracleError, compare, solve_strong
from osmoflow.profile import gaussian_profile, uniform_profile
from osmoflow.progress import base, text
from osmoflow.state import RadialState, random_state

__all__ = ['main', 'build_parser', 'execute']


def build_parser():
    parser = argparse.ArgumentParser(
        prog="osmoflow",
        description="Gradient flows of osmotically swelling cells.")
    parser.add_argument("--config", metavar="PATH",
                        help="configuration file of key=value lines")
    parser.add_argument("--mode", help="override the mode")
    parser.add_argument("--out", dest="output", metavar="DIR",
                        help="output directory")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="override a setting")
    parser.add_argument("--seed", type=int, help="seed for random probes")
    parser.add_argument("--jobs", type=int, help="worker threads of sweeps")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress information")
    return parser


class _Run(object):
    """The objects of one configured run."""

    def __init__(self, run, progress):
        self.run = run
        self.progress = progress
        self.f = run.integrand_function()
        self.cfg = run.metric_config()
        self.report = require_valid(self.f, self.cfg.dim)
        self.factors = run.physical_params().factors()
        self.horizon = run.horizon * self.factors.time
        self.out = datafile.ensure_dir(run.output)
        self.tables = {}

    def initial_state(self):
        run, dim = self.run, self.cfg.dim
        radius = run.initial_radius * self.factors.length
        kind, _sep, width = run.initial_profile.partition(":")
        if kind == "equilibrium":
            return equilibrium_state(self.f, dim, run.quantiles)
        if kind == "gaussian":
            profile = gaussian_profile(float(width) * self.factors.length,
                                       radius, dim, run.quantiles)
        else:
            profile = uniform_profile(radius, dim, run.quantiles)
        return RadialState(radius, profile)

    def summary(self, method, status="ok"):
        return {'mode': self.run.mode, 'method': method, 'status': status,
                'config': self.run.as_dict(),
                'integrand': self.report.as_dict(),
                'scale_factors': self.factors.as_dict()}

    def write_trajectory(self, traj, name="trajectory.csv", profiles=True):
        header, rows = diagnostics.trajectory_table(traj, self.f, self.cfg)
        datafile.write_table(os.path.join(self.out, name), header, rows)
        self.tables[name] = traj.method
        if not profiles:
            return
        for k, state in enumerate(traj.states):
            if k % self.run.snapshot_stride == 0 or k == len(traj) - 1:
                datafile.write_profile(
                    os.path.join(self.out, "profile_%d.csv" % k), state.u)

    def describe(self, traj, summary):
        energies = traj.energies()
        increases = np.diff(energies)
        samples = diagnostics.dissipation_series(traj, self.f, self.cfg)
        summary['final'] = {'t': traj.times[-1], 'r': traj.final.r,
                            'energy': energies[-1]}
        summary['margins'] = {
            'max_energy_increase': (float(np.max(increases))
                                    if len(increases) else 0.0),
            'max_dissipation_ratio': diagnostics.max_dissipation_ratio(
                samples, t_min=traj.times[min(1, len(traj) - 1)]),
            'max_step_residual': max(rec.residual for rec in traj.records)}
        return summary

    def flow(self, summary):
        try:
            return run_flow(self.initial_state(), self.horizon, self.f,
                            self.cfg, self.run.jko_config(), self.progress)
        except FlowError as error:
            self.write_trajectory(error.trajectory)
            summary['status'] = 'solver-failure'
            summary['error'] = str(error)
            self.describe(error.trajectory, summary)
            self.save(summary)
            raise

    def oracle(self, summary, name="trajectory.csv", section=None):
        """Solve the strong problem; with section its description goes
        to summary[section]."""
        try:
            return solve_strong(self.initial_state(), self.horizon, self.f,
                                self.cfg, self.run.oracle_grid(),
                                progress=self.progress)
        except OracleError as error:
            if error.trajectory is not None and len(error.trajectory):
                self.write_trajectory(error.trajectory, name, False)
                target = summary
                if section is not None:
                    target = summary.setdefault(
                        section, {'method': error.trajectory.method})
                self.describe(error.trajectory, target)
            summary['status'] = 'solver-failure'
            summary['error'] = str(error)
            self.save(summary)
            raise

    def save(self, summary):
        summary['trajectories'] = dict(self.tables)
        datafile.write_summary(os.path.join(self.out, "summary.json"),
                               summary)


def _simulate(job):
    summary = job.summary("jko")
    traj = job.flow(summary)
    job.write_trajectory(traj)
    header, rows = diagnostics.diagnostics_table(traj, job.f, job.cfg)
    datafile.write_table(os.path.join(job.out, "diagnostics.csv"), header,
                         rows)
    job.save(job.describe(traj, summary))
    return summary


def _oracle(job):
    summary = job.summary("oracle")
    traj = job.oracle(summary)
    job.write_trajectory(traj)
    job.save(job.describe(traj, summary))
    return summary


def _compare(job):
    summary = job.summary("jko+oracle")
    traj = job.flow(summary)
    job.write_trajectory(traj)
    job.describe(traj, summary)
    strong = job.oracle(summary, "trajectory_oracle.csv", "oracle")
    job.write_trajectory(strong, "trajectory_oracle.csv", False)
    report = compare(traj, strong, job.cfg)
    summary['oracle'] = job.describe(strong, {'method': strong.method})
    summary['max_rho_distance'] = report.max_distance
    summary['final_rho_distance'] = report.final_distance
    job.save(summary)
    return summary


def _diagnose(job):
    run, f, cfg = job.run, job.f, job.cfg
    summary = job.summary("jko")
    traj = job.flow(summary)
    job.write_trajectory(traj)
    probe = equilibrium_state(f, cfg.dim, run.quantiles)
    radii = traj.radii()
    lam = 0.0
    if cfg.dim.n < 3 or cfg.variant != SURFACE_TENSION:
        lam = min(0.0, perimeter_modulus(min(radii.min(), probe.r),
                                         max(radii.max(), probe.r),
                                         cfg.dim, cfg.variant))
    header, rows = diagnostics.diagnostics_table(traj, f, cfg, probe, lam)
    datafile.write_table(os.path.join(job.out, "diagnostics.csv"), header,
                         rows)
    evi = [row[-1] for row in rows]
    rng = np.random.default_rng(run.seed)
    reports = []
    for _i in range(run.probe_triples):
        a, b, w = [random_state(rng, cfg.dim, min(run.quantiles, 50))
                   for _j in range(3)]
        reports.append(diagnostics.convexity_probe(a, b, w, 9, run.tau, f,
                                                   cfg))
    summary['evi'] = {'lambda': lam,
                      'max_residual': max(evi) if evi else 0.0}
    if reports:
        summary['convexity'] = {
            'triples': len(reports),
            'passed': sum(1 for r in reports if r.passed()),
            'worst_dist_defect': min(r.dist_defect for r in reports),
            'worst_energy_defect': min(r.energy_defect for r in reports),
            'worst_moreau_defect': min(r.moreau_defect for r in reports),
            'min_energy_modulus': min(r.energy_modulus for r in reports)}
    job.save(job.describe(traj, summary))
    return summary


def _equilibrium(job):
    summary = job.summary("analytic")
    r_star = equilibrium_radius(job.f, job.cfg.dim)
    summary['r_star'] = r_star
    summary['energy_star'] = energy_floor(r_star, job.f, job.cfg.dim)
    summary['r_star_physical'] = r_star / job.factors.length
    job.save(summary)
    return summary


def _sweep(job, base_cfg):
    run = job.run
    key, values = run.sweep_values()
    logging.info("sweeping %s over %s", key, ", ".join(values))

    def single(index, value):
        cfg = sweep_configuration(base_cfg, key, value,
                                  os.path.join(run.output, "run_%d" % index))
        try:
            summary = _simulate(_Run(RunConfig.from_configuration(cfg),
                                     base.OpProgress()))
        except (SolverError, ValueError) as error:
            logging.warning("sweep run %d (%s=%s) failed: %s", index, key,
                            value, error)
            return (value, np.nan, np.nan, 'failure')
        return (value, summary['final']['r'], summary['final']['energy'],
                summary['status'])

    with concurrent.futures.ThreadPoolExecutor(run.jobs) as pool:
        futures = [pool.submit(single, i, v) for i, v in enumerate(values)]
        rows = [future.result() for future in futures]
    datafile.write_table(os.path.join(run.output, "sweep.csv"),
                         ("value", "final_r", "final_energy", "status"), rows)
    summary = job.summary("jko")
    summary['sweep'] = {'key': key, 'runs': len(rows),
                        'failed': sum(1 for row in rows if row[3] != 'ok')}
    job.save(summary)
    if summary['sweep']['failed']:
        raise SolverError("%d sweep runs failed" % summary['sweep']['failed'])
    return summary


MODES = {'simulate': _simulate, 'oracle': _oracle, 'compare': _compare,
         'diagnose': _diagnose, 'equilibrium': _equilibrium}


def execute(run, cfg=None, progress=None):
    """Run the validated RunConfig run and return its summary."""
    job = _Run(run, progress or base.OpProgress())
    if run.mode == 'sweep':
        return _sweep(job, cfg)
    return MODES[run.mode](job)


def _configure(options):
    cfg = Configuration()
    if options.config:
        read_config_file(cfg, options.config)
    for item in options.override:
        cfg.override(item)
    for key in ('mode', 'output', 'seed', 'jobs'):
        value = getattr(options, key)
        if value is not None:
            cfg.set(key, value)
    return cfg


def main(argv=None):
    """Run the driver with the command line argv; return the exit code."""
    if argv is None:
        argv = sys.argv
    options = build_parser().parse_args(argv[1:])
    try:
        cfg = _configure(options)
        run = RunConfig.from_configuration(cfg)
    except ConfigError as error:
        print("E: %s" % error, file=sys.stderr)
        return 1
    except (IOError, OSError) as error:
        print("E: %s" % error, file=sys.stderr)
        return 3
    level = logging.INFO if options.verbose else run.log_level.upper()
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    progress = text.OpProgress() if options.verbose else base.OpProgress()
    try:
        execute(run, cfg, progress)
    except (ConfigError, IntegrandError) as error:
        print("E: %s" % error, file=sys.stderr)
        return 1
    except SolverError as error:
        print("E: solver failure: %s" % error, file=sys.stderr)
        return 2
    except (IOError, OSError) as error:
        print("E: %s" % error, file=sys.stderr)
        return 3
    return 0
