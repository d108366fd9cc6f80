# datafile.py - CSV and JSON run artifacts
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
"""Reading and writing run artifacts.

Tables are CSV files with a header row; numbers are written with 17
significant digits so that they read back exactly, missing values as nan.
Summaries are JSON documents with sorted keys.
"""
import csv
import json
import math
import os

import numpy as np

from osmoflow.profile import QuantileProfile, sigma_grid

__all__ = ['format_value', 'write_table', 'read_table', 'write_profile',
           'read_profile', 'write_summary', 'read_summary', 'ensure_dir']


def format_value(value):
    """Format a table cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return "%.17g" % value
    return str(value)


def ensure_dir(path):
    """Create the directory path if it does not exist."""
    if not os.path.isdir(path):
        os.makedirs(path)
    return path


def write_table(path, header, rows):
    """Write rows under header to the CSV file at path."""
    with open(path, "w") as fobj:
        writer = csv.writer(fobj, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError("row of %d cells under a header of %d" %
                                 (len(row), len(header)))
            writer.writerow([format_value(v) for v in row])


def read_table(path):
    """Return (header, columns) of a CSV file written by write_table().

    columns maps every header field to a float array.
    """
    with open(path) as fobj:
        reader = csv.reader(fobj)
        header = next(reader)
        rows = [[float(cell) for cell in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, dict((name, data[:, i]) for i, name in enumerate(header))


def write_profile(path, profile):
    """Write the quantiles of profile with their mass levels."""
    write_table(path, ("sigma", "quantile"), zip(profile.sigma, profile.q))


def read_profile(path, dim):
    """Read a QuantileProfile written by write_profile()."""
    _header, columns = read_table(path)
    q = columns["quantile"]
    if not np.allclose(columns["sigma"], sigma_grid(len(q)), rtol=0,
                       atol=1e-15):
        raise ValueError("%s: mass levels are not midpoints" % path)
    return QuantileProfile(q, dim)


def _plain(value):
    if isinstance(value, dict):
        return dict((str(k), _plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return repr(value)
        return value
    return value


def write_summary(path, summary):
    """Write the dictionary summary as JSON."""
    with open(path, "w") as fobj:
        json.dump(_plain(summary), fobj, indent=2, sort_keys=True)
        fobj.write("\n")


def read_summary(path):
    with open(path) as fobj:
        return json.load(fobj)
