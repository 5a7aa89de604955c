#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: entities.py
#
# Copyright 2024 Revertrisk Maintainers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to
#  deal in the Software without restriction, including without limitation the
#  rights to use, copy, modify, merge, publish, distribute, sublicense, and/or
#  sell copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in
#  all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
#  IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
#  FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
#  AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
#  LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
#  FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
#  DEALINGS IN THE SOFTWARE.
#

"""
Main code for entities.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import logging
from dataclasses import dataclass

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

# This is the main prefix used for logging
LOGGER_BASENAME = '''entities'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class StageEntry:
    """Models the record counts of one pipeline stage."""

    stage: str
    records_in: int
    records_out: int
    is_filter: bool = False

    @property
    def dropped(self):
        """Records removed by the stage."""
        return self.records_in - self.records_out


class StageLedger:
    """Models the ordered ledger of pipeline stage counts."""

    def __init__(self):
        self._data = []

    def add_entry(self, entry):
        """Adds a stage entry to the ledger.

        Args:
            entry: A StageEntry object.

        Returns:
            None

        """
        if not isinstance(entry, StageEntry):
            raise ValueError('Only StageEntry objects are allowed.')
        LOGGER.info(f'{entry.stage}: {entry.records_in} records in, {entry.records_out} records out.')
        self._data.append(entry)

    def record(self, stage, records_in, records_out, is_filter=False):
        """Creates and adds an entry, returning it."""
        entry = StageEntry(stage, int(records_in), int(records_out), is_filter)
        self.add_entry(entry)
        return entry

    @property
    def entries(self):
        """The entries in insertion order."""
        return list(self._data)

    @property
    def data(self):
        """The ledger as a dictionary of stage name to its in and out counts."""
        return {entry.stage: {'in': entry.records_in, 'out': entry.records_out} for entry in self._data}

    @property
    def report_table(self):
        """Rows of stage, records in, records out and dropped for an interactive report."""
        return [[entry.stage, entry.records_in, entry.records_out, entry.dropped] for entry in self._data]

    @property
    def is_monotone(self):
        """Whether the filter stages never increase the record count."""
        filters = [entry for entry in self._data if entry.is_filter]
        return all(entry.records_out <= entry.records_in for entry in filters) and all(
            later.records_in <= earlier.records_out for earlier, later in zip(filters, filters[1:]))
