# config.py - run configuration files
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
"""Run configuration.

Configuration files hold one key=value pair per line.  Blank lines and
lines starting with '#' are ignored and '#' starts a comment after a value:

    # desk benchmark
    mode = compare
    tau = 1e-3      # time step
    quantiles = 200

Configuration is a flat store of the raw strings; RunConfig is the
validated, typed view used by the command line driver.
"""
import copy
import logging

from osmoflow.energy import IntegrandError, by_name
from osmoflow.geometry import VARIANTS, DomainError
from osmoflow.jko import SOLVERS, JkoConfig
from osmoflow.pde_oracle import SCHEMES, OracleGrid
from osmoflow.scaling import PhysicalParams
from osmoflow.state import MetricConfig

__all__ = ['ConfigError', 'ConfigEntry', 'Configuration', 'RunConfig',
           'MODES', 'DEFAULTS', 'read_config_file',
           'sweep_configuration']

MODES = ('simulate', 'oracle', 'compare', 'diagnose', 'equilibrium', 'sweep')

DEFAULTS = (
    ('mode', 'simulate'),
    ('integrand', 'zlogz'),
    ('dim', '2'),
    ('kappa', '1'),
    ('variant', 'surface-tension'),
    ('quantiles', '200'),
    ('tau', '1e-3'),
    ('steps', ''),
    ('horizon', '1'),
    ('initial_radius', '1'),
    ('initial_profile', 'uniform'),
    ('opt_tol', '1e-8'),
    ('max_iters', '100'),
    ('barrier_schedule', '1e-6,1e-9,0'),
    ('solver', 'newton'),
    ('restarts', '0'),
    ('oracle_cells', '400'),
    ('oracle_dt', '1e-3'),
    ('oracle_scheme', 'semi-implicit'),
    ('sigma', '1'),
    ('beta', '1'),
    ('theta', '1'),
    ('output', 'out'),
    ('snapshot_stride', '100'),
    ('seed', '0'),
    ('probe_triples', '20'),
    ('sweep', ''),
    ('jobs', '1'),
    ('log_level', 'WARNING'),
)


class ConfigError(ValueError):
    """An invalid configuration line, key or value."""


class ConfigEntry(object):
    """One line of a configuration file."""

    def __init__(self, line, file=None, lineno=0):
        self.invalid = False
        self.empty = False
        self.key = ""
        self.value = ""
        self.comment = ""
        self.line = line
        self.file = file
        self.lineno = lineno
        self.parse(line)

    def parse(self, line):
        """Split the line into key, value and comment."""
        line = line.strip()
        if not line or line.startswith("#"):
            self.empty = True
            self.comment = line[1:].strip()
            return
        i = line.find("#")
        if i > 0:
            self.comment = line[i + 1:].strip()
            line = line[:i]
        if "=" not in line:
            self.invalid = True
            return
        key, value = line.split("=", 1)
        self.key = key.strip()
        self.value = value.strip()
        if not self.key or any(c.isspace() for c in self.key):
            self.invalid = True

    def __str__(self):
        """Canonical form of the entry."""
        if self.empty:
            return "# %s" % self.comment if self.comment else ""
        line = "%s = %s" % (self.key, self.value)
        if self.comment:
            line += "  # %s" % self.comment
        return line


class Configuration(object):
    """Flat store of configuration strings."""

    def __init__(self):
        self._items = {}
        self._order = []

    def set(self, key, value):
        """Set key to the string form of value."""
        if key not in self._items:
            self._order.append(key)
        self._items[key] = str(value)

    def exists(self, key):
        return key in self._items

    def clear(self, key):
        """Remove key if it is set."""
        if key in self._items:
            del self._items[key]
            self._order.remove(key)

    def keys(self):
        return list(self._order)

    def find(self, key, default=""):
        return self._items.get(key, default)

    def _convert(self, key, default, kind, name):
        if key not in self._items:
            return default
        try:
            return kind(self._items[key])
        except ValueError:
            raise ConfigError("%s: expected %s, got %r" %
                              (key, name, self._items[key]))

    def find_i(self, key, default=0):
        return self._convert(key, default, int, "an integer")

    def find_f(self, key, default=0.0):
        return self._convert(key, default, float, "a number")

    def find_b(self, key, default=False):
        value = self._items.get(key)
        if value is None:
            return default
        value = value.lower()
        if value in ("1", "yes", "true", "on"):
            return True
        if value in ("0", "no", "false", "off"):
            return False
        raise ConfigError("%s: expected a boolean, got %r" % (key, value))

    def find_list(self, key, default=()):
        """Comma separated values of key, empty items dropped."""
        if not self._items.get(key):
            return list(default)
        return [item.strip() for item in self._items[key].split(",")
                if item.strip()]

    def override(self, assignment):
        """Apply a key=value string."""
        entry = ConfigEntry(assignment)
        if entry.invalid or entry.empty:
            raise ConfigError("bad override %r, expected key=value" %
                              assignment)
        self.set(entry.key, entry.value)

    def dump(self):
        """Text form of the store, one key = value line per key."""
        return "".join("%s = %s\n" % (key, self._items[key])
                       for key in self._order)


def _split(value):
    return [item.strip() for item in value.split(",") if item.strip()]


def sweep_configuration(cfg, key, value, output):
    """Copy of cfg for the single run of a sweep with key = value."""
    single = copy.deepcopy(cfg)
    single.set(key, value)
    single.set('mode', 'simulate')
    single.clear('sweep')
    single.set('output', output)
    return single


def read_config_file(cfg, path):
    """Read the file at path into the Configuration cfg."""
    with open(path) as fobj:
        for lineno, line in enumerate(fobj, 1):
            entry = ConfigEntry(line, path, lineno)
            if entry.empty:
                continue
            if entry.invalid:
                raise ConfigError("%s:%d: cannot parse %r" %
                                  (path, lineno, line.strip()))
            cfg.set(entry.key, entry.value)
    logging.debug("read %d keys from %s", len(cfg.keys()), path)
    return cfg


class RunConfig(object):
    """Validated settings of a run.

    Attributes carry the names of the configuration keys; from_configuration
    fills them in and checks every value before any computation starts.
    """

    KEYS = tuple(key for key, _default in DEFAULTS)

    def __init__(self, **values):
        for key, default in DEFAULTS:
            setattr(self, key, values.pop(key, default))
        if values:
            raise ConfigError("unknown keys: %s" % ", ".join(sorted(values)))

    @classmethod
    def from_configuration(cls, cfg):
        """Build and validate a RunConfig from a Configuration."""
        unknown = [key for key in cfg.keys() if key not in cls.KEYS]
        if unknown:
            raise ConfigError("unknown keys: %s" % ", ".join(sorted(unknown)))
        run = cls(**dict((key, cfg.find(key, default))
                         for key, default in DEFAULTS))
        run.validate(cfg)
        return run

    def validate(self, cfg):
        """Convert the values read from cfg to their types and check
        them."""
        if self.mode not in MODES:
            raise ConfigError("mode: expected one of %s, got %r" %
                              (", ".join(MODES), self.mode))
        defaults = dict(DEFAULTS)
        for key in ('dim', 'quantiles', 'max_iters', 'restarts',
                    'oracle_cells', 'snapshot_stride', 'seed',
                    'probe_triples', 'jobs'):
            setattr(self, key, cfg.find_i(key, int(defaults[key])))
        for key in ('kappa', 'tau', 'horizon', 'initial_radius', 'opt_tol',
                    'oracle_dt', 'sigma', 'beta', 'theta'):
            setattr(self, key, cfg.find_f(key, float(defaults[key])))
        try:
            self.barrier_schedule = [float(v) for v in cfg.find_list(
                'barrier_schedule', _split(defaults['barrier_schedule']))]
            self.steps = [float(v) for v in cfg.find_list(
                'steps', _split(defaults['steps']))] or None
        except ValueError as error:
            raise ConfigError("barrier_schedule/steps: %s" % error)
        if self.variant not in VARIANTS:
            raise ConfigError("variant: expected one of %s, got %r" %
                              (", ".join(VARIANTS), self.variant))
        if self.solver not in SOLVERS:
            raise ConfigError("solver: unknown solver %r" % self.solver)
        if self.oracle_scheme not in SCHEMES:
            raise ConfigError("oracle_scheme: unknown scheme %r" %
                              self.oracle_scheme)
        if self.snapshot_stride < 1 or self.jobs < 1 or self.probe_triples < 0:
            raise ConfigError("snapshot_stride and jobs must be positive, "
                              "probe_triples nonnegative")
        if self.log_level.upper() not in ('DEBUG', 'INFO', 'WARNING',
                                          'ERROR', 'CRITICAL'):
            raise ConfigError("log_level: unknown level %r" % self.log_level)
        self._check_initial_profile()
        if self.mode == 'sweep':
            self._check_sweep(cfg)
        for name, build in (('integrand', self.integrand_function),
                            ('metric', self.metric_config),
                            ('jko', self.jko_config),
                            ('oracle', self.oracle_grid),
                            ('physical', self.physical_params)):
            try:
                build()
            except (DomainError, IntegrandError) as error:
                raise ConfigError("%s settings: %s" % (name, error))
        if not self.horizon > 0 or not self.initial_radius > 0:
            raise ConfigError("horizon and initial_radius must be positive")

    def _check_initial_profile(self):
        kind, _sep, width = self.initial_profile.partition(":")
        if kind in ('uniform', 'equilibrium') and not width:
            return
        if kind == 'gaussian':
            try:
                if float(width) > 0:
                    return
            except ValueError:
                pass
        raise ConfigError("initial_profile: expected uniform, equilibrium "
                          "or gaussian:<width>, got %r" % self.initial_profile)

    def _check_sweep(self, cfg):
        """Validate the run of every sweep value."""
        key, values = self.sweep_values()
        for value in values:
            try:
                RunConfig.from_configuration(sweep_configuration(
                    cfg, key, value, self.output))
            except ConfigError as error:
                raise ConfigError("sweep %s=%s: %s" % (key, value, error))

    def sweep_values(self):
        """Return (key, [values]) of the sweep setting."""
        key, sep, values = self.sweep.partition("=")
        key = key.strip()
        values = [v.strip() for v in values.split(",") if v.strip()]
        if not sep or key not in self.KEYS or key in ('mode', 'sweep') or \
                not values:
            raise ConfigError("sweep: expected key=v1,v2,... got %r" %
                              self.sweep)
        return key, values

    def integrand_function(self):
        return by_name(self.integrand)

    def physical_params(self):
        return PhysicalParams(self.dim, self.kappa, self.sigma, self.beta,
                              self.theta)

    def metric_config(self):
        """Metric of the scaled problem."""
        return MetricConfig(self.dim, self.physical_params().factors().kappa,
                            self.variant)

    def jko_config(self):
        return JkoConfig(tau=self.tau, M=self.quantiles, opt_tol=self.opt_tol,
                         max_iters=self.max_iters,
                         barrier_schedule=self.barrier_schedule,
                         steps=self.steps, solver=self.solver,
                         restarts=self.restarts)

    def oracle_grid(self):
        return OracleGrid(cells=self.oracle_cells, dt=self.oracle_dt,
                          scheme=self.oracle_scheme,
                          quantiles=self.quantiles)

    def as_dict(self):
        """The settings, for run summaries."""
        return dict((key, getattr(self, key)) for key in self.KEYS)
