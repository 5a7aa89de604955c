#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: __init__.py
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
revertrisk package.

Import all parts from revertrisk here

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html
"""
from ._version import __version__
from .bundle import ModelBundle, ScoreResult, load_bundle, save_bundle
from .configuration import load_configuration
from .features import FeatureConfig, featurize_records
from .gbdt import TrainConfig, TreeEnsemble, train
from .mediawiki import MediaWikiClient
from .metrics import EvalReport, FairnessReport, evaluate, fairness_report
from .pipeline import prepare_splits, run_evaluate, run_fairness, run_train, train_bundles
from .revertriskcli import (COMMANDS,
                            CommandReport,
                            configuration_overrides,
                            exit_code_for,
                            get_arguments,
                            get_parser,
                            run_with_spinner,
                            setup_logging)
from .revisions import Corpus, RevisionRecord, annotate_corpus, load_corpus
from .service import create_app
from .synthetic import SyntheticSpec, generate_corpus
from .textdiff import compute_action_counts, extract_delta

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

# This is to 'use' the module(s), so lint doesn't complain
assert __version__

assert ModelBundle
assert ScoreResult
assert load_bundle
assert save_bundle
assert load_configuration
assert FeatureConfig
assert featurize_records
assert TrainConfig
assert TreeEnsemble
assert train
assert MediaWikiClient
assert EvalReport
assert FairnessReport
assert evaluate
assert fairness_report
assert prepare_splits
assert run_evaluate
assert run_fairness
assert run_train
assert train_bundles
assert COMMANDS
assert CommandReport
assert configuration_overrides
assert exit_code_for
assert get_arguments
assert get_parser
assert run_with_spinner
assert setup_logging
assert Corpus
assert RevisionRecord
assert annotate_corpus
assert load_corpus
assert create_app
assert SyntheticSpec
assert generate_corpus
assert compute_action_counts
assert extract_delta
