#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: test_features.py
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
test_features
----------------------------------
Tests for `features` module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""


import unittest

import numpy as np

from revertrisk.features import (MISSING_SENTINEL,
                                 FeatureConfig,
                                 assemble_features,
                                 check_layout,
                                 featurize_records,
                                 pooled_batch,
                                 record_actions,
                                 record_delta)
from revertrisk.revertriskexceptions import AssemblyError, ConfigurationError
from revertrisk.revisions import load_corpus
from revertrisk.textdiff import ACTION_KEYS, TextDelta
from revertrisk.textscore import MISSING_VALUE, ChannelScore, TextChannel, TextScorer

from .helpers import FIXTURES, make_record

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".


class ConstantScorer(TextScorer):
    """Scores every unit the same."""

    kind = 'constant'

    def __init__(self, channel, probability=0.7):
        super().__init__(channel)
        self.probability = probability
        self.calls = 0

    def score(self, units):
        self.calls += 1
        return [ChannelScore(raw=1.0, probability=self.probability) for _ in units]


def constant_scorers():
    return {channel: ConstantScorer(channel) for channel in TextChannel}


def load_record(name):
    return load_corpus(FIXTURES / name).records[0]


class TestFeatureConfig(unittest.TestCase):

    def test_presets(self):
        self.assertTrue(FeatureConfig.from_preset('basic', []).use_text_scores is False)
        self.assertTrue(FeatureConfig.from_preset('mlm', []).use_text_scores is True)
        self.assertTrue(FeatureConfig.from_preset('user', []).use_user_features is True)
        full = FeatureConfig.from_preset('full', ['enwiki', 'dewiki', 'enwiki'])
        self.assertTrue(full.preset == 'full')
        self.assertTrue(full.languages == ('dewiki', 'enwiki'))
        self.assertRaises(ConfigurationError, FeatureConfig.from_preset, 'huge', [])

    def test_layout_order(self):
        names = FeatureConfig.from_preset('full', ['enwiki', 'dewiki']).feature_names()
        self.assertTrue(names[:2] == ['revision_text_bytes_diff', 'seconds_since_previous_revision'])
        self.assertTrue(names[9] == 'comment_length')
        self.assertTrue(names[10:10 + len(ACTION_KEYS)] == list(ACTION_KEYS))
        offset = 10 + len(ACTION_KEYS)
        self.assertTrue(names[offset:offset + 3] == ['lang_dewiki', 'lang_enwiki', 'lang_unknown'])
        self.assertTrue(names[offset + 3] == 'change_mean_raw')
        self.assertTrue(names[-3:] == ['is_anonymous', 'group_sysop', 'group_autoconfirmed'])
        self.assertTrue(len(names) == len(set(names)))

    def test_blocks_are_optional(self):
        basic = FeatureConfig.from_preset('basic', ['enwiki'], use_comment_length=False).feature_names()
        self.assertTrue(len(basic) == 9 + len(ACTION_KEYS) + 2)
        self.assertFalse('title_score' in basic or 'is_anonymous' in basic)

    def test_dict_round_trip(self):
        config = FeatureConfig.from_preset('user', ['frwiki'], user_groups=['rollbacker'])
        self.assertTrue(FeatureConfig.from_dict(config.to_dict()) == config)

    def test_check_layout(self):
        config = FeatureConfig.from_preset('basic', ['enwiki'])
        names = config.feature_names()
        check_layout(config, names)
        swapped = [names[1], names[0]] + names[2:]
        with self.assertRaises(AssemblyError) as context:
            check_layout(config, swapped)
        self.assertTrue('Feature 0' in str(context.exception))
        self.assertRaises(AssemblyError, check_layout, config, names[:-1])


class TestAssembly(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.record = load_record('abusive_insert_record.jsonl')
        self.delta = record_delta(self.record)

    def named(self, config, vector):
        return dict(zip(config.feature_names(), vector))

    def test_abusive_insert_basic_vector(self):
        config = FeatureConfig.from_preset('basic', ['enwiki', 'dewiki'])
        vector = assemble_features(self.record, self.delta, None, config)
        self.assertTrue(vector.shape == (len(config.feature_names()),))
        values = self.named(config, vector)
        self.assertTrue(values['revision_text_bytes_diff'] == 45.0)
        self.assertTrue(values['seconds_since_previous_revision'] == 120.0)
        self.assertTrue(values['comment_length'] == 0.0)
        self.assertTrue(values['insert_Word'] == 9.0)
        self.assertTrue(values['insert_Punctuation'] == 3.0)
        self.assertTrue(values['lang_enwiki'] == 1.0 and values['lang_unknown'] == 0.0)

    def test_full_vector_carries_pooled_scores_and_user_block(self):
        config = FeatureConfig.from_preset('full', ['enwiki'])
        pooled = pooled_batch(constant_scorers(), [self.delta], [self.record.page_title])[0]
        values = self.named(config, assemble_features(self.record, self.delta, pooled, config))
        self.assertTrue(values['insert_mean_prob'] == 0.7)
        self.assertTrue(values['insert_unit_count'] == 1.0)
        self.assertTrue(values['change_mean_raw'] == MISSING_VALUE)
        self.assertTrue(values['remove_present'] == 0.0)
        self.assertTrue(values['title_score'] == 0.7)
        self.assertTrue(values['is_anonymous'] == 1.0)
        self.assertTrue(values['group_sysop'] == 0.0)

    def test_pooled_scores_must_match_the_configuration(self):
        basic = FeatureConfig.from_preset('basic', ['enwiki'])
        full = FeatureConfig.from_preset('full', ['enwiki'])
        pooled = pooled_batch(constant_scorers(), [self.delta], ['Example'])[0]
        self.assertRaises(AssemblyError, assemble_features, self.record, self.delta, pooled, basic)
        self.assertRaises(AssemblyError, assemble_features, self.record, self.delta, None, full)

    def test_missing_seconds_and_unknown_language(self):
        record = make_record(wiki_db='svwiki', seconds_since_previous_revision=None,
                             user_groups=('sysop',), event_comment='fix')
        config = FeatureConfig.from_preset('user', ['enwiki'])
        values = self.named(config, assemble_features(record, TextDelta(), None, config))
        self.assertTrue(values['seconds_since_previous_revision'] == MISSING_SENTINEL)
        self.assertTrue(values['lang_unknown'] == 1.0 and values['lang_enwiki'] == 0.0)
        self.assertTrue(values['group_sysop'] == 1.0)
        self.assertTrue(values['comment_length'] == 3.0)

    def test_precomputed_record(self):
        record = load_record('precomputed_record.jsonl')
        delta = record_delta(record)
        self.assertTrue(delta.inserts == ('Tu es nul.',))
        self.assertTrue(record_actions(record)['insert_Word'] == 3)
        config = FeatureConfig.from_preset('basic', ['frwiki'])
        values = self.named(config, assemble_features(record, delta, None, config))
        self.assertTrue(values['change_Word'] == 1.0)
        self.assertTrue(values['move_Word'] == 0.0)
        self.assertTrue(values['lang_frwiki'] == 1.0)


class TestBatchFeaturization(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.records = [load_record('abusive_insert_record.jsonl'), load_record('precomputed_record.jsonl')]

    def test_matrix_rows_match_single_assembly(self):
        config = FeatureConfig.from_preset('full', ['enwiki', 'frwiki'])
        matrix = featurize_records(self.records, config, scorers=constant_scorers())
        self.assertTrue(matrix.shape == (2, len(config.feature_names())))
        for row, record in zip(matrix, self.records):
            delta = record_delta(record)
            pooled = pooled_batch(constant_scorers(), [delta], [record.page_title])[0]
            self.assertTrue(np.array_equal(row, assemble_features(record, delta, pooled, config)))

    def test_channels_are_scored_in_batches(self):
        scorers = constant_scorers()
        featurize_records(self.records, FeatureConfig.from_preset('mlm', []), scorers=scorers)
        self.assertTrue(all(scorer.calls == 1 for scorer in scorers.values()))

    def test_parallel_extraction_keeps_order(self):
        config = FeatureConfig.from_preset('basic', ['enwiki', 'frwiki'])
        self.assertTrue(np.array_equal(featurize_records(self.records, config, n_jobs=2),
                                       featurize_records(self.records, config)))

    def test_edge_cases(self):
        config = FeatureConfig.from_preset('full', [])
        self.assertTrue(featurize_records([], config).shape == (0, len(config.feature_names())))
        self.assertRaises(AssemblyError, featurize_records, self.records, config)


if __name__ == '__main__':
    unittest.main()
