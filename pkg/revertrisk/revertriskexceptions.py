#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: revertriskexceptions.py
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
Custom exception code for revertrisk.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".


class RevertRiskError(Exception):
    """Base for every error raised by revertrisk."""


class MutuallyExclusiveArguments(Exception):
    """Mutually exclusive variables are set."""


class MissingRequiredArguments(Exception):
    """Missing a required argument."""


class ConfigurationError(RevertRiskError):
    """The pipeline configuration is invalid."""


class DataError(RevertRiskError):
    """Input data cannot be used as provided."""


class RecordParseError(DataError):
    """A corpus line is not a well formed record."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        prefix = f'line {line_number}: ' if line_number is not None else ''
        super().__init__(f'{prefix}{message}')


class SchemaViolation(DataError):
    """A corpus record misses a required field or carries an invalid value."""

    def __init__(self, field, message=None, line_number=None):
        self.field = field
        self.line_number = line_number
        self.message = message or 'missing required field'
        prefix = f'line {line_number}: ' if line_number is not None else ''
        super().__init__(f'{prefix}{self.message} "{field}"')


class EmptyCorpus(DataError):
    """No usable records remain."""


class AnnotationError(DataError):
    """Revert annotation cannot run on the provided page history."""


class PreconditionError(DataError):
    """An operation was called on data missing a required preparation step."""


class BalanceError(DataError):
    """A labeled set cannot be balanced because a class is absent."""


class WeightingError(DataError):
    """Class weights cannot be computed because a class is absent."""


class TrainingError(DataError):
    """A model cannot be trained on the provided data."""


class MetricError(DataError):
    """A metric is undefined on the provided data."""

    def __init__(self, message, group=None):
        self.group = group
        super().__init__(message)


class UpstreamError(RevertRiskError):
    """The MediaWiki api did not deliver the requested revision."""


class TransportError(UpstreamError):
    """The MediaWiki api answered with an http failure."""

    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)


class UpstreamTimeout(UpstreamError):
    """The MediaWiki api did not answer in time."""


class RevisionNotFound(UpstreamError):
    """The revision does not exist or its content is hidden."""


class UnsupportedRevision(UpstreamError):
    """The revision cannot be scored, as for page creations."""


class ModelError(RevertRiskError):
    """A trained artifact cannot be used."""


class ScoringError(ModelError):
    """A text scorer failed to score its units."""


class PredictionError(ModelError):
    """An input vector does not fit the ensemble."""


class EnsembleLoadError(ModelError):
    """A serialized ensemble cannot be loaded."""


class BundleLoadError(ModelError):
    """A model bundle cannot be loaded."""


class AssemblyError(ModelError):
    """A feature vector does not match the expected layout."""


class StageError(RevertRiskError):
    """A pipeline stage failed."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f'stage "{stage}" failed: {cause}')
