#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: test_pipeline.py
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
test_pipeline
----------------------------------
Tests for `pipeline` module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""


import json
import unittest

from revertrisk.entities import StageLedger
from revertrisk.pipeline import (BASELINE_MODEL,
                                 corpus_summary,
                                 evaluate_channel_scorers,
                                 ingest,
                                 prepare_splits,
                                 run_evaluate,
                                 stage,
                                 train_bundles,
                                 write_evaluation)
from revertrisk.revertriskexceptions import ConfigurationError, EmptyCorpus, StageError
from revertrisk.revisions import annotate_corpus, load_corpus

from .helpers import FIXTURES, fairness_audit, temporary_directory, trained_run

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".


def page_keys(corpus):
    return {record.page_key for record in corpus}


class TestStages(unittest.TestCase):

    def test_domain_errors_are_wrapped(self):
        with self.assertRaises(StageError) as context:
            with stage('ingest'):
                raise EmptyCorpus('nothing here')
        self.assertTrue(context.exception.stage == 'ingest')
        self.assertTrue(isinstance(context.exception.cause, EmptyCorpus))

    def test_stage_errors_pass_through(self):
        original = StageError('inner', EmptyCorpus('x'))
        with self.assertRaises(StageError) as context:
            with stage('outer'):
                raise original
        self.assertTrue(context.exception is original)

    def test_other_errors_are_not_wrapped(self):
        with self.assertRaises(KeyError):
            with stage('ingest'):
                raise KeyError('bug')

    def test_ingest_without_corpus(self):
        configuration, _, _, _ = trained_run()
        configuration = dict(configuration, corpus=dict(configuration['corpus'], train_path=None))
        with self.assertRaises(StageError) as context:
            ingest(configuration, StageLedger())
        self.assertTrue(isinstance(context.exception.cause, EmptyCorpus))

    def test_unknown_preset(self):
        configuration, splits, _, _ = trained_run()
        self.assertRaises(ConfigurationError, train_bundles, configuration, ['huge'], splits=splits)

    def test_corpus_summary(self):
        corpus = annotate_corpus(load_corpus(FIXTURES / 'small_corpus.jsonl'))
        summary = {row['language']: row for row in corpus_summary(corpus)}
        self.assertTrue(summary['enwiki']['records'] == 7)
        self.assertAlmostEqual(summary['enwiki']['anonymous_rate'], 2 / 7)
        self.assertAlmostEqual(summary['enwiki']['revert_rate'], 1 / 7)
        self.assertTrue(summary['dewiki']['revert_rate'] == 0.0)


class TestTrainingRun(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.configuration, self.splits, self.bundles, self.ledger = trained_run()

    def test_splits_are_page_disjoint(self):
        scorer_pages = page_keys(self.splits.scorer_train)
        classifier_pages = page_keys(self.splits.classifier_train)
        test_pages = page_keys(self.splits.test)
        self.assertFalse(scorer_pages & classifier_pages)
        self.assertFalse((scorer_pages | classifier_pages) & test_pages)

    def test_splits_follow_the_time_windows(self):
        split = self.configuration['split']
        for corpus in (self.splits.scorer_train, self.splits.classifier_train):
            self.assertTrue(all(split['train_start'] <= record.event_timestamp < split['train_end']
                                for record in corpus))
        self.assertTrue(all(split['train_end'] <= record.event_timestamp < split['test_end']
                            for record in self.splits.test))

    def test_evaluation_input_is_clean(self):
        self.assertFalse(any(record.is_bot for record in self.splits.test))
        self.assertFalse(any(record.revision_parent_id == 0 for record in self.splits.test))
        self.assertTrue(all(record.is_reverted is not None for record in self.splits.test))

    def test_ledger(self):
        stages = [entry.stage for entry in self.ledger.entries]
        self.assertTrue(stages[:5] == ['ingest', 'annotate_reverts', 'filter_content', 'filter_users',
                                       'filter_edit_wars'])
        self.assertTrue('train_classifier_basic' in stages and 'train_classifier_full' in stages)
        self.assertTrue(self.ledger.is_monotone)
        self.assertTrue(self.ledger.data['ingest']['out'] == 3000)

    def test_bundles_carry_provenance(self):
        provenance = self.bundles['full'].provenance
        self.assertTrue(provenance['seed'] == 7)
        self.assertTrue(provenance['training_population'] == 'all')
        self.assertTrue(len(provenance['corpus_hashes']) == 1)
        self.assertTrue(provenance['class_weights']['negative'] == 1.0)
        self.assertTrue(provenance['class_weights']['positive'] > 1.0)

    def test_channel_scorers_are_evaluated(self):
        results = evaluate_channel_scorers(self.bundles['full'].scorers, self.splits.test, self.configuration)
        self.assertTrue(sorted(results) == ['change', 'insert', 'remove'])
        self.assertTrue(all(value is None or 0.0 <= value <= 1.0 for value in results.values()))

    def test_anonymous_training_population(self):
        configuration = dict(self.configuration,
                             filters=dict(self.configuration['filters'], user_mode='anonymous_only'))
        splits = prepare_splits(configuration)
        self.assertTrue(all(record.is_anonymous for record in splits.scorer_train))
        self.assertTrue(all(record.is_anonymous for record in splits.classifier_train))
        self.assertFalse(all(record.is_anonymous for record in splits.test))


class TestEvaluationRun(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.configuration, self.splits, self.bundles, _ = trained_run()
        self.run = run_evaluate(self.bundles, self.splits.test, self.configuration)

    def test_every_model_and_view(self):
        for model in ('basic', 'full', BASELINE_MODEL):
            self.assertTrue((model, 'all') in self.run.reports)
            self.assertTrue(model in self.run.fairness)

    def test_full_model_beats_the_baseline(self):
        full = self.run.reports[('full', 'all')]
        baseline = self.run.reports[(BASELINE_MODEL, 'all')]
        self.assertTrue(full.auc - baseline.auc >= 0.10)
        self.assertTrue(full.auc > 0.8)

    def test_text_only_model_on_anonymous_edits(self):
        self.assertTrue(self.run.reports[('mlm', 'anonymous')].auc >= 0.70)

    def test_balanced_views(self):
        report = self.run.reports[('full', 'all')]
        self.assertAlmostEqual(report.positive_rate, 0.5)

    def test_written_evaluation(self):
        directory = temporary_directory() / 'evaluation'
        written = write_evaluation(self.run, directory)
        self.assertTrue(written[0].name == 'report.json')
        report = json.loads((directory / 'report.json').read_text(encoding='utf-8'))
        self.assertTrue('full/all' in report['reports'])
        self.assertTrue('pr_curve' not in report['reports']['full/all'])
        self.assertTrue((directory / 'metrics.csv').exists())
        self.assertTrue((directory / f'pr_curve_{BASELINE_MODEL}_all.csv').exists())


class TestFairnessAudit(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.audit = fairness_audit()

    def test_every_model_is_audited(self):
        self.assertFalse(self.audit.errors)
        self.assertTrue(sorted(self.audit.fairness) == sorted(['mlm', 'full', BASELINE_MODEL]))

    def test_text_only_model_stays_closer_to_the_base_ratio(self):
        text_only, full = self.audit.fairness['mlm'], self.audit.fairness['full']
        self.assertTrue(text_only.dir_base == full.dir_base)
        self.assertTrue(full.dir_base > 1.0)
        self.assertTrue(abs(text_only.dir - text_only.dir_base) < abs(full.dir - full.dir_base))


if __name__ == '__main__':
    unittest.main()
