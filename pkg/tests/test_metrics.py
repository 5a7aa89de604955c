#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: test_metrics.py
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
test_metrics
----------------------------------
Tests for `metrics` module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""


import math
import unittest

import numpy as np
import pandas as pd

from revertrisk.metrics import (INFINITE_DIR,
                                auc,
                                auc_difference,
                                balanced_downsample_per_language,
                                base_disparate_impact_ratio,
                                classification_metrics,
                                disparate_impact_ratio,
                                evaluate,
                                fairness_report,
                                pr_curve,
                                precision_at_recall,
                                report_table,
                                rule_based_baseline,
                                write_report_tables)
from revertrisk.revertriskexceptions import MetricError
from revertrisk.revisions import UserKind

from .helpers import make_record, temporary_directory

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

SCORES = [0.9, 0.2, 0.3, 0.1, 0.8, 0.4, 0.6, 0.7, 0.2]
LABELS = [1, 0, 0, 0, 1, 1, 0, 0, 0]
LANGUAGES = ['enwiki'] * 4 + ['dewiki'] * 3 + ['frwiki'] * 2
ANONYMOUS = [True, False, False, False, True, False, True, False, False]


def pair_counting_auc(scores, labels):
    positives = [score for score, label in zip(scores, labels) if label]
    negatives = [score for score, label in zip(scores, labels) if not label]
    wins = sum(1.0 if positive > negative else 0.5 if positive == negative else 0.0
               for positive in positives for negative in negatives)
    return wins / (len(positives) * len(negatives))


class TestRankingMetrics(unittest.TestCase):

    def test_auc(self):
        self.assertAlmostEqual(auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]), 0.75)
        self.assertTrue(auc([0.1, 0.9], [0, 1]) == 1.0)
        self.assertTrue(auc([0.1, 0.9], [1, 0]) == 0.0)

    def test_auc_ties_count_half(self):
        self.assertTrue(auc([0.5, 0.5], [1, 0]) == 0.5)
        self.assertAlmostEqual(auc([0.2, 0.5, 0.5, 0.9], [0, 1, 0, 1]), 0.875)

    def test_auc_matches_pair_counting(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            size = int(rng.integers(2, 200))
            scores = rng.integers(0, 20, size=size) / 20
            labels = rng.random(size) < 0.4
            labels[0], labels[1] = True, False
            self.assertAlmostEqual(auc(scores, labels), pair_counting_auc(scores.tolist(), labels.tolist()), places=9)

    def test_auc_needs_both_classes(self):
        self.assertRaises(MetricError, auc, [0.1, 0.2], [1, 1])
        self.assertRaises(MetricError, auc, [0.1, 0.2], [0, 0])
        self.assertRaises(MetricError, auc, [0.1, 0.2], [0, 1, 1])

    def test_precision_at_recall(self):
        self.assertAlmostEqual(precision_at_recall([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]), 2 / 3)
        self.assertAlmostEqual(precision_at_recall([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1], target_recall=0.5), 1.0)
        self.assertRaises(MetricError, precision_at_recall, [0.1, 0.2], [0, 0])

    def test_pr_curve_is_ordered(self):
        curve = pr_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        thresholds = [threshold for threshold, _, _ in curve]
        self.assertTrue(thresholds == sorted(thresholds))
        self.assertTrue(curve[0][2] == 1.0)


class TestClassificationMetrics(unittest.TestCase):

    def test_thresholded_metrics(self):
        metrics = classification_metrics([0.9, 0.2, 0.6, 0.4], [1, 0, 0, 1])
        self.assertTrue(metrics == {'f1': 0.5, 'accuracy': 0.5, 'macro_f1': 0.5, 'f1_undefined': False})

    def test_threshold_is_inclusive(self):
        self.assertTrue(classification_metrics([0.5], [1])['f1'] == 1.0)
        self.assertTrue(classification_metrics([0.5], [1], threshold=0.6)['f1'] == 0.0)

    def test_f1_without_any_positive(self):
        metrics = classification_metrics([0.1, 0.2], [0, 0])
        self.assertTrue(metrics['f1'] == 0.0)
        self.assertTrue(metrics['f1_undefined'])
        self.assertTrue(metrics['accuracy'] == 1.0)


class TestFairness(unittest.TestCase):

    def test_disparate_impact_ratio(self):
        scores = [0.9, 0.1, 0.9, 0.9, 0.9, 0.1]
        privileged = [True, True, False, False, False, False]
        self.assertAlmostEqual(disparate_impact_ratio(scores, privileged), 1.5)

    def test_infinite_ratio(self):
        self.assertTrue(disparate_impact_ratio([0.1, 0.9], [True, False]) == INFINITE_DIR)
        self.assertTrue(math.isinf(base_disparate_impact_ratio([0, 1], [True, False])))

    def test_base_ratio(self):
        self.assertAlmostEqual(base_disparate_impact_ratio([1, 0, 1, 1, 0, 0], [True, True, False, False, False, False]),
                               1.0)

    def test_groups_must_be_present(self):
        self.assertRaises(MetricError, disparate_impact_ratio, [0.1, 0.9], [True, True])
        self.assertRaises(MetricError, disparate_impact_ratio, [0.1, 0.9], [False, False])

    def test_auc_difference(self):
        scores = [0.9, 0.1, 0.2, 0.8, 0.6, 0.7]
        labels = [1, 0, 0, 1, 1, 0]
        privileged = [True, True, False, False, False, False]
        self.assertAlmostEqual(auc_difference(scores, labels, privileged), 0.75 - 1.0)

    def test_auc_difference_names_the_group(self):
        with self.assertRaises(MetricError) as context:
            auc_difference([0.9, 0.1, 0.2, 0.8], [1, 0, 1, 1], [True, True, False, False])
        self.assertTrue(context.exception.group == 'unprivileged')

    def test_fairness_report_records_errors(self):
        report = fairness_report([0.1, 0.2, 0.9, 0.8], [1, 0, 1, 1], [True, True, False, False])
        self.assertIsNone(report.auc_unprivileged)
        self.assertTrue(report.auc_privileged == 0.0)
        self.assertIsNone(report.auc_difference)
        self.assertTrue(len(report.errors) == 1 and report.errors[0].startswith('unprivileged'))
        self.assertTrue(report.group_counts == {'unprivileged': 2, 'privileged': 2})
        data = report.to_dict()
        self.assertTrue(data['dir'] == 'inf')
        self.assertTrue(data['dir_base'] == 2.0)


class TestEvaluation(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.report = evaluate(SCORES, LABELS, LANGUAGES, anonymous=ANONYMOUS, min_language_samples=3)

    def test_overall_metrics(self):
        self.assertTrue(self.report.n_samples == 9)
        self.assertAlmostEqual(self.report.positive_rate, 3 / 9)
        self.assertAlmostEqual(self.report.anonymous_rate, 3 / 9)
        self.assertTrue(0.0 <= self.report.auc <= 1.0)
        self.assertTrue(self.report.pr_curve)

    def test_per_language_metrics(self):
        self.assertTrue(sorted(self.report.per_language) == ['dewiki', 'enwiki'])
        self.assertTrue(self.report.skipped_languages == ['frwiki'])
        self.assertTrue(self.report.per_language['enwiki'].auc == 1.0)
        self.assertTrue(self.report.per_language['enwiki'].f1_at_half == 1.0)
        self.assertTrue(self.report.per_language['dewiki'].f1_at_half == 0.5)
        self.assertAlmostEqual(self.report.language_macro_f1, 0.75)

    def test_single_class_language_has_no_auc(self):
        report = evaluate([0.9, 0.1, 0.8, 0.7], [1, 0, 1, 1], ['enwiki', 'enwiki', 'dewiki', 'dewiki'])
        self.assertIsNone(report.per_language['dewiki'].auc)
        self.assertTrue(report.per_language['enwiki'].auc == 1.0)

    def test_report_dict(self):
        data = self.report.to_dict(with_curve=False)
        self.assertFalse('pr_curve' in data)
        self.assertFalse('pr_curve' in data['per_language']['enwiki'])
        self.assertTrue(list(data['per_language']) == ['dewiki', 'enwiki'])

    def test_empty_prediction_set(self):
        self.assertRaises(MetricError, evaluate, [], [], [])

    def test_tables(self):
        baseline = evaluate([1.0 if flag else 0.0 for flag in ANONYMOUS], LABELS, LANGUAGES, min_language_samples=3)
        reports = {('full', 'all'): self.report, ('rule_based', 'all'): baseline}
        table = report_table(reports)
        self.assertTrue(len(table) == 6)
        self.assertTrue(list(table['model'].unique()) == ['full', 'rule_based'])
        directory = temporary_directory() / 'tables'
        written = write_report_tables(reports, directory)
        self.assertTrue(sorted(path.name for path in written) ==
                        ['metrics.csv', 'pr_curve_full_all.csv', 'pr_curve_rule_based_all.csv'])
        self.assertTrue(len(pd.read_csv(directory / 'metrics.csv')) == 6)
        self.assertTrue(list(pd.read_csv(directory / 'pr_curve_full_all.csv').columns) ==
                        ['threshold', 'precision', 'recall'])


class TestBaselineAndBalancing(unittest.TestCase):

    def test_rule_based_baseline(self):
        records = [make_record(user_kind=UserKind.ANONYMOUS),
                   make_record(user_kind=UserKind.REGISTERED),
                   make_record(user_kind=UserKind.BOT)]
        self.assertTrue(rule_based_baseline(records) == [1.0, 0.0, 0.0])

    def test_balanced_downsample_per_language(self):
        languages = ['enwiki'] * 4 + ['dewiki'] * 3 + ['frwiki'] * 2
        labels = [1, 0, 0, 0, 1, 1, 0, 0, 0]
        kept = balanced_downsample_per_language(languages, labels, seed=0)
        self.assertTrue(kept == sorted(kept))
        self.assertTrue(len(kept) == 4)
        self.assertTrue(0 in kept and 6 in kept)
        self.assertFalse(7 in kept or 8 in kept)
        self.assertTrue(kept == balanced_downsample_per_language(languages, labels, seed=0))


if __name__ == '__main__':
    unittest.main()
