# osmoflow/progress/text.py - progress reporting for terminals
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
"""Progress reporting for text interfaces."""
import sys

from osmoflow.progress import base

__all__ = ['OpProgress']


class TextProgress(object):
    """Internal base class for text progress classes."""

    def __init__(self, outfile=None):
        self._file = outfile or sys.stderr
        self._width = 0

    def _write(self, msg, newline=True, maximize=False):
        """Write the message on the terminal, fill remaining space."""
        self._file.write("\r")
        self._file.write(msg)
        if self._width > len(msg):
            self._file.write((self._width - len(msg)) * ' ')
        elif maximize:
            self._width = max(self._width, len(msg))
        if newline:
            self._file.write("\n")
        else:
            self._file.flush()


class OpProgress(base.OpProgress, TextProgress):
    """Operation progress on a terminal: "<op>... <n>%"."""

    def __init__(self, outfile=None):
        TextProgress.__init__(self, outfile)
        base.OpProgress.__init__(self)
        self.old_op = ""

    def changed(self):
        if self.major_change and self.old_op and self.old_op != self.op:
            self._write(self.old_op)
        self._write("%s... %i%%" % (self.op, self.percent), False, True)
        self.old_op = self.op

    def done(self):
        base.OpProgress.done(self)
        if self.old_op:
            self._write("%s... Done" % self.old_op, True, True)
        self.old_op = ""
