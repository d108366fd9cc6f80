# osmoflow/progress/base.py - base class for progress reporting
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
"""Base class for progress reporting.

Custom progress classes should inherit from OpProgress.  It can also be
used as a dummy which does nothing.
"""

__all__ = ['OpProgress']


class OpProgress(object):
    """Monitor object for long computations such as a discrete flow.

    op names the running operation, percent its completion.  Updates
    which do not change the integral percentage are dropped, so update()
    may be called once per time step.
    """

    major_change, op, percent, subop = False, "", 0.0, ""

    def __init__(self):
        self._shown = None

    def update(self, percent=None):
        """Set percent and call changed() if its integral part moved.

        Returns True if the change was reported.
        """
        if percent is not None:
            self.percent = percent
        key = (self.op, int(self.percent))
        if key == self._shown:
            return False
        self.major_change = self._shown is None or key[0] != self._shown[0]
        self._shown = key
        self.changed()
        return True

    def changed(self):
        """Called when the displayed progress changes."""

    def done(self):
        """Called once an operation has been completed."""
        self._shown = None
