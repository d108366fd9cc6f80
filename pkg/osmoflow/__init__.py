# osmoflow/__init__.py - gradient flows of osmotically swelling cells
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
"""High-level interface of osmoflow.

The most used names of the submodules are available here; the submodules
hold the complete interface.
"""
from osmoflow.energy import (by_name, equilibrium_radius, equilibrium_state,
                             total_energy, validate_integrand)
from osmoflow.geometry import Dimension, PERMEABILITY, SURFACE_TENSION
from osmoflow.jko import JkoConfig, Trajectory, jko_step, run_flow
from osmoflow.pde_oracle import OracleGrid, compare, solve_strong
from osmoflow.profile import QuantileProfile, RadialDensity, uniform_profile
from osmoflow.scaling import PhysicalParams
from osmoflow.state import MetricConfig, RadialState, rho_dist

__version__ = "0.1"

__all__ = ['Dimension', 'SURFACE_TENSION', 'PERMEABILITY', 'QuantileProfile',
           'RadialDensity', 'uniform_profile', 'MetricConfig', 'RadialState',
           'rho_dist', 'by_name', 'validate_integrand', 'total_energy',
           'equilibrium_radius', 'equilibrium_state', 'JkoConfig',
           'Trajectory', 'jko_step', 'run_flow', 'OracleGrid',
           'solve_strong', 'compare', 'PhysicalParams']
