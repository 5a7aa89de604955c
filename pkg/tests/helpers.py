#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: helpers.py
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
helpers
----------------------------------
Shared fixtures and utilities of the test suite.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import atexit
import contextlib
import functools
import io
import shutil
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import betamax

from revertrisk import load_configuration
from revertrisk.entities import StageLedger
from revertrisk.pipeline import prepare_splits, run_fairness, train_bundles
from revertrisk.revisions import RevisionRecord, UserKind
from revertrisk.synthetic import SyntheticSpec, write_synthetic

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

FIXTURES = Path(__file__).parent / 'fixtures'
CASSETTES = FIXTURES / 'cassettes'

with betamax.Betamax.configure() as config:
    config.cassette_library_dir = str(CASSETTES)
    config.default_cassette_options['record_mode'] = 'none'
    config.default_cassette_options['match_requests_on'] = ['method', 'uri']

SMALL_SPEC = SyntheticSpec(languages=('dewiki', 'eswiki', 'frwiki'),
                           n_revisions=3000,
                           seed=7,
                           train_days=30,
                           test_days=10,
                           revisions_per_page=(6, 20),
                           mean_gap_hours=12.0)

FAIRNESS_SPEC = SyntheticSpec(languages=('dewiki', 'eswiki', 'frwiki'),
                              n_revisions=8000,
                              seed=11,
                              train_days=30,
                              test_days=15,
                              revisions_per_page=(6, 20),
                              mean_gap_hours=12.0)

FAST_SETTINGS = {'scorers': {'hash_bits': 12, 'epochs': 5, 'title_min_revisions': 3},
                 'classifier': {'n_trees': 60, 'max_depth': 4, 'learning_rate': 0.2, 'n_bins': 32},
                 'evaluation': {'min_language_samples': 10}}


@contextlib.contextmanager
def captured_output():
    new_out, new_err = io.StringIO(), io.StringIO()
    old_out, old_err = sys.stdout, sys.stderr
    try:
        sys.stdout, sys.stderr = new_out, new_err
        yield sys.stdout, sys.stderr
    finally:
        sys.stdout, sys.stderr = old_out, old_err


def get_parsing_error_message(method_name, arguments):
    with captured_output() as (out, err):
        try:
            method_name(arguments)
        except SystemExit:
            pass
    err.seek(0)
    return err.read().split('error:')[1].strip()


def make_record(**overrides):
    """A valid registered revision, fields can be overridden."""
    values = {'wiki_db': 'enwiki',
              'revision_id': 2,
              'revision_parent_id': 1,
              'page_title': 'Example',
              'event_timestamp': datetime(2022, 3, 1, 10, 0, tzinfo=timezone.utc),
              'user_kind': UserKind.REGISTERED,
              'seconds_since_previous_revision': 60}
    values.update(overrides)
    if 'revision_text_bytes_diff' not in values and values.get('current_text') is not None \
            and values.get('parent_text') is not None:
        values['revision_text_bytes_diff'] = (len(values['current_text'].encode('utf-8')) -
                                              len(values['parent_text'].encode('utf-8')))
    return RevisionRecord(**values)


def temporary_directory():
    """A directory removed when the test process exits."""
    directory = tempfile.mkdtemp(prefix='revertrisk-tests-')
    atexit.register(shutil.rmtree, directory, True)
    return Path(directory)


def synthetic_configuration(spec=SMALL_SPEC, **overrides):
    """Writes a synthetic corpus and returns the validated configuration training on it."""
    directory = temporary_directory()
    corpus_path, _ = write_synthetic(spec, directory)
    settings = dict(spec.configuration(corpus_path), output=str(directory / 'output'), **FAST_SETTINGS)
    settings.update(overrides)
    return load_configuration(overrides=settings, environment={})


@functools.lru_cache(maxsize=None)
def trained_run():
    """Trains the basic, text only and full bundles once on the small synthetic corpus.

    Returns:
        A tuple of the configuration, the corpus splits, the bundles and the stage ledger.

    """
    configuration = synthetic_configuration()
    ledger = StageLedger()
    splits = prepare_splits(configuration, ledger)
    bundles = train_bundles(configuration, ['basic', 'mlm', 'full'], ledger, splits=splits)
    return configuration, splits, bundles, ledger


@functools.lru_cache(maxsize=None)
def fairness_audit():
    """Audits the text only and the full model trained on the larger synthetic corpus."""
    configuration = synthetic_configuration(FAIRNESS_SPEC)
    splits = prepare_splits(configuration)
    bundles = train_bundles(configuration, ['mlm', 'full'], splits=splits)
    return run_fairness(bundles, splits.test, configuration)
