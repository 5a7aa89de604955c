#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: test_synthetic.py
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
test_synthetic
----------------------------------
Tests for `synthetic` module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""


import unittest
from datetime import timedelta

from revertrisk import load_configuration
from revertrisk.revisions import UserKind, annotate_corpus, load_corpus, serialize_revision_record
from revertrisk.synthetic import EDIT_COMMENTS, VANDAL_WORDS, SyntheticSpec, generate_corpus, write_synthetic
from revertrisk.textdiff import extract_delta

from .helpers import temporary_directory

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

TINY_SPEC = SyntheticSpec(languages=('dewiki', 'frwiki', 'svwiki'), n_revisions=400, seed=5, train_days=20,
                          test_days=5, revisions_per_page=(4, 10), mean_gap_hours=6.0)


class TestGeneration(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        self.corpus = generate_corpus(TINY_SPEC)

    def test_exact_size_and_languages(self):
        self.assertTrue(len(self.corpus) == 400)
        self.assertTrue(set(self.corpus.languages) <= {'dewiki', 'frwiki', 'svwiki'})

    def test_generation_is_seeded(self):
        again = generate_corpus(TINY_SPEC)
        self.assertTrue([serialize_revision_record(record) for record in again] ==
                        [serialize_revision_record(record) for record in self.corpus])

    def test_records_are_consistent(self):
        for record in self.corpus:
            self.assertTrue(record.event_timestamp >= TINY_SPEC.start)
            self.assertTrue(record.revision_text_bytes_diff ==
                            len(record.current_text.encode('utf-8')) - len(record.parent_text.encode('utf-8')))
        creations = [record for record in self.corpus if record.revision_parent_id == 0]
        self.assertTrue(all(record.seconds_since_previous_revision is None for record in creations))

    def test_vandal_edits_are_reverted(self):
        annotated = annotate_corpus(self.corpus)
        patrols = 0
        for history in annotated.pages().values():
            for previous, record in zip(history, history[1:]):
                if record.event_comment.startswith('Reverted'):
                    patrols += 1
                    self.assertTrue(record.is_revert)
                    self.assertTrue(previous.is_reverted)
        self.assertTrue(patrols > 0)

    def test_comments_do_not_reveal_vandalism(self):
        annotated = annotate_corpus(self.corpus)
        edits = [record for record in annotated
                 if record.revision_parent_id and not record.event_comment.startswith('Reverted')]
        self.assertTrue({record.event_comment for record in edits if record.is_reverted} <= set(EDIT_COMMENTS))
        self.assertTrue(any(record.event_comment == '' and not record.is_reverted for record in edits))

    def test_user_kinds(self):
        kinds = {record.user_kind for record in self.corpus}
        self.assertTrue(UserKind.ANONYMOUS in kinds and UserKind.REGISTERED in kinds)

    def test_spec_windows(self):
        self.assertTrue(TINY_SPEC.train_end - TINY_SPEC.start == timedelta(days=20))
        self.assertTrue(TINY_SPEC.test_end - TINY_SPEC.train_end == timedelta(days=5))


class TestCorpusShape(unittest.TestCase):

    def setUp(self):
        """
        Test set up

        This is where you can setup things that you use throughout the tests. This method is called before every test.
        """
        spec = SyntheticSpec(languages=('dewiki', 'eswiki', 'frwiki'), n_revisions=12000, seed=13)
        self.records = [record for record in annotate_corpus(generate_corpus(spec))
                        if record.revision_parent_id and record.user_kind is not UserKind.BOT]

    def test_anonymous_editors_are_reverted_three_times_as_often(self):
        anonymous = [record.is_reverted for record in self.records if record.is_anonymous]
        registered = [record.is_reverted for record in self.records if record.user_kind is UserKind.REGISTERED]
        anonymous_rate = sum(anonymous) / len(anonymous)
        registered_rate = sum(registered) / len(registered)
        self.assertTrue(abs(anonymous_rate - 0.3) < 0.04)
        self.assertTrue(2.5 < anonymous_rate / registered_rate < 3.5)

    def test_vandal_vocabulary_share_of_reverted_inserts_and_changes(self):
        with_vocabulary = []
        for record in self.records:
            if not record.is_reverted:
                continue
            delta = extract_delta(record.parent_text, record.current_text)
            if not (delta.inserts or delta.changes):
                continue
            with_vocabulary.append(any(word in record.current_text for word in VANDAL_WORDS[record.wiki_db]))
        self.assertTrue(len(with_vocabulary) > 500)
        self.assertTrue(0.74 < sum(with_vocabulary) / len(with_vocabulary) < 0.86)


class TestWriting(unittest.TestCase):

    def test_written_corpus_and_configuration_load(self):
        corpus_path, configuration_path = write_synthetic(TINY_SPEC, temporary_directory())
        self.assertTrue(len(load_corpus(corpus_path)) == 400)
        configuration = load_configuration(configuration_path, environment={})
        self.assertTrue(configuration['split']['train_end'] == TINY_SPEC.train_end)
        self.assertTrue(configuration['features']['languages'] == ['dewiki', 'frwiki', 'svwiki'])
        self.assertTrue(configuration['seed'] == 5)


if __name__ == '__main__':
    unittest.main()
