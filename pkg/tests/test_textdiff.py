#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: test_textdiff.py
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
test_textdiff
----------------------------------
Tests for `textdiff` module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import random
import unittest
from collections import Counter

from revertrisk.revertriskexceptions import ConfigurationError
from revertrisk.textdiff import (ACTION_KEYS,
                                 ActionCounts,
                                 DiffConfig,
                                 TextDelta,
                                 TokenCategory,
                                 compute_action_counts,
                                 extract_delta,
                                 extract_plain_paragraphs,
                                 levenshtein,
                                 similarity,
                                 split_sentences,
                                 tokenize_wikitext)

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

ABUSIVE_TEXT = '"So, people don\'t have to see your ugly face"'


WORDS = ('river', 'stone', 'market', 'winter', 'harbor', 'castle', 'forest', 'bridge', 'garden', 'valley',
         'tower', 'meadow', 'island', 'village', 'mountain', 'church', 'station', 'library')


def random_sentence(rng, serial):
    words = [rng.choice(WORDS) for _ in range(rng.randint(4, 8))]
    return f'{" ".join(words).capitalize()} number{serial}.'


def random_article(rng):
    serials = iter(range(10 ** 6))
    return [[random_sentence(rng, next(serials)) for _ in range(rng.randint(1, 4))]
            for _ in range(rng.randint(1, 4))], serials


def mutate_article(paragraphs, serials, rng):
    mutated = []
    for paragraph in paragraphs:
        if rng.random() < 0.1:
            continue
        sentences = []
        for sentence in paragraph:
            roll = rng.random()
            if roll < 0.15:
                continue
            if roll < 0.4:
                words = sentence.split(' ')
                words[rng.randrange(len(words) - 1)] = rng.choice(WORDS)
                sentence = ' '.join(words)
            sentences.append(sentence)
            if rng.random() < 0.1:
                sentences.append(random_sentence(rng, next(serials)))
        mutated.append(sentences or [random_sentence(rng, next(serials))])
    if rng.random() < 0.3:
        mutated.append([random_sentence(rng, next(serials))])
    return mutated


def render(paragraphs):
    return '\n\n'.join(' '.join(paragraph) for paragraph in paragraphs)


def dynamic_programming_distance(first, second):
    previous = list(range(len(second) + 1))
    for row, left in enumerate(first, 1):
        current = [row]
        for column, right in enumerate(second, 1):
            current.append(min(previous[column] + 1, current[column - 1] + 1, previous[column - 1] + (left != right)))
        previous = current
    return previous[-1]


def categories(text):
    return Counter(category for _, category in tokenize_wikitext(text))


class TestTokenizer(unittest.TestCase):

    def test_abusive_sentence_counts(self):
        counts = categories(ABUSIVE_TEXT)
        self.assertTrue(counts[TokenCategory.WORD] == 9)
        self.assertTrue(counts[TokenCategory.PUNCTUATION] == 3)
        self.assertTrue(counts[TokenCategory.WHITESPACE] == 8)

    def test_tokens_cover_the_text(self):
        text = ("== History ==\nThe [[Main Page|page]] cites<ref name=\"a\">Smith, 2001</ref> "
                "{{cite|{{nested}}}} and [[File:Map.png|thumb]] at https://example.org/x.\n{| class=x\n| a\n|}")
        self.assertTrue(''.join(token for token, _ in tokenize_wikitext(text)) == text)

    def test_markup_categories(self):
        tokens = dict((token, category) for token, category in
                      tokenize_wikitext('== H ==\n[[A|b]] {{t|{{x}}}} <ref>r</ref> [[Image:a.jpg]] http://e.org'))
        self.assertTrue(tokens['== H =='] is TokenCategory.HEADING)
        self.assertTrue(tokens['[[A|b]]'] is TokenCategory.WIKILINK)
        self.assertTrue(tokens['{{t|{{x}}}}'] is TokenCategory.TEMPLATE)
        self.assertTrue(tokens['<ref>r</ref>'] is TokenCategory.REFERENCE)
        self.assertTrue(tokens['[[Image:a.jpg]]'] is TokenCategory.MEDIA)
        self.assertTrue(tokens['http://e.org'] is TokenCategory.EXTERNAL_LINK)

    def test_unclosed_opener_is_other(self):
        tokens = tokenize_wikitext('{{broken')
        self.assertTrue(tokens[0] == ('{{', TokenCategory.OTHER))

    def test_non_latin_words(self):
        counts = categories('Москва — столица России.')
        self.assertTrue(counts[TokenCategory.WORD] == 3)


class TestSimilarity(unittest.TestCase):

    def test_levenshtein(self):
        self.assertTrue(levenshtein('kitten', 'sitting') == 3)
        self.assertTrue(levenshtein('', 'abc') == 3)

    def test_levenshtein_matches_dynamic_programming(self):
        rng = random.Random(11)
        for _ in range(300):
            first = ''.join(rng.choice('abcé ') for _ in range(rng.randint(0, 12)))
            second = ''.join(rng.choice('abcé ') for _ in range(rng.randint(0, 12)))
            self.assertTrue(levenshtein(first, second) == dynamic_programming_distance(first, second))

    def test_similarity(self):
        self.assertTrue(similarity('', '') == 1.0)
        self.assertTrue(similarity('abcd', 'abcd') == 1.0)
        self.assertTrue(similarity('abcd', 'wxyz') == 0.0)
        self.assertAlmostEqual(similarity('abcd', 'abce'), 0.75)

    def test_similarity_truncation(self):
        self.assertTrue(similarity('abcdX', 'abcdY', max_length=4) == 1.0)


class TestPlainText(unittest.TestCase):

    def test_markup_is_removed_and_labels_kept(self):
        text = 'The [[Main Page|page]] is {{big}}nice<ref>x</ref>.\n\n\n== Head ==\n[[Link]] here.'
        self.assertTrue(extract_plain_paragraphs(text) == ['The page is nice.', 'Link here.'])

    def test_sentences(self):
        self.assertTrue(split_sentences('One. Two! Three? Four') == ['One.', 'Two!', 'Three?', 'Four'])
        self.assertTrue(split_sentences('Version 2.5 is out.') == ['Version 2.5 is out.'])
        self.assertTrue(split_sentences('') == [])


class TestDelta(unittest.TestCase):

    def test_page_creation_is_an_insert(self):
        delta = extract_delta('', ABUSIVE_TEXT)
        self.assertTrue(delta.inserts == (ABUSIVE_TEXT,))
        self.assertFalse(delta.removes)
        self.assertFalse(delta.changes)

    def test_identical_texts(self):
        self.assertTrue(extract_delta('Same text. Here.', 'Same text. Here.').is_empty)

    def test_sentence_change_insert_and_remove(self):
        parent = 'The cat sat on the mat. It was warm. Birds sang loudly.'
        current = 'The cat sat on the red mat. It was warm. Dogs are great friends indeed.'
        delta = extract_delta(parent, current)
        self.assertTrue(delta.changes == (('The cat sat on the mat.', 'The cat sat on the red mat.'),))
        self.assertTrue(delta.inserts == ('Dogs are great friends indeed.',))
        self.assertTrue(delta.removes == ('Birds sang loudly.',))

    def test_new_paragraph(self):
        delta = extract_delta('First paragraph here.', 'First paragraph here.\n\nA new one. With two sentences.')
        self.assertTrue(delta.inserts == ('A new one.', 'With two sentences.'))
        self.assertFalse(delta.removes)

    def test_swapping_sides_swaps_the_delta(self):
        parent = 'Alpha beta gamma. Delta epsilon.\n\nZeta eta theta.'
        current = 'Alpha beta gamma! Delta epsilon.\n\nIota kappa lambda mu.'
        self.assertTrue(extract_delta(current, parent) == extract_delta(parent, current).swapped())

    def test_crossing_changes_swap_cleanly(self):
        parent = 'The zebra runs fast. The apple is red.\n\nOld harbor town by the sea.\n\nA quiet mountain village.'
        current = ('The zebra runs very fast. The apple is very red.\n\nA quiet mountain village nearby.\n\n'
                   'Old harbor town by the grey sea.')
        delta = extract_delta(parent, current)
        self.assertTrue(len(delta.changes) == 4)
        self.assertFalse(delta.inserts or delta.removes)
        self.assertTrue(extract_delta(current, parent) == delta.swapped())

    def test_random_revisions_keep_the_delta_invariants(self):
        rng = random.Random(11)
        threshold = DiffConfig().sentence_match_threshold
        for _ in range(60):
            paragraphs, serials = random_article(rng)
            parent, current = render(paragraphs), render(mutate_article(paragraphs, serials, rng))
            self.assertTrue(extract_delta(parent, parent).is_empty)
            delta = extract_delta(parent, current)
            self.assertTrue(extract_delta(current, parent) == delta.swapped())
            for old, new in delta.changes:
                self.assertTrue(threshold <= similarity(old, new) < 1)

    def test_thresholds_are_validated(self):
        self.assertRaises(ConfigurationError, DiffConfig, sentence_match_threshold=0.3,
                          paragraph_match_threshold=0.4)
        self.assertRaises(ConfigurationError, DiffConfig, max_sentence_length=0)

    def test_delta_dict_uses_corpus_names(self):
        data = TextDelta(inserts=['a'], changes=[('b', 'c')]).to_dict()
        self.assertTrue(data == {'texts_insert': ['a'], 'texts_removed': [], 'texts_change': [['b', 'c']]})


class TestActionCounts(unittest.TestCase):

    def test_abusive_insert(self):
        counts = compute_action_counts('', ABUSIVE_TEXT)
        self.assertTrue(counts['insert_Word'] == 9)
        self.assertTrue(counts['insert_Punctuation'] == 3)
        self.assertTrue(counts['insert_Whitespace'] == 8)
        self.assertTrue(counts['remove_Word'] == 0)
        self.assertTrue(all(counts[f'move_{category.value}'] == 0 for category in TokenCategory))

    def test_change_counts_differing_pairs(self):
        counts = compute_action_counts('The cat sat on the mat. It was warm.',
                                       'The cat sat on the red mat. It was warm.')
        self.assertTrue(counts['change_Word'] == 1)
        self.assertTrue(counts['change_Whitespace'] == 1)
        self.assertTrue(counts['change_Punctuation'] == 0)
        self.assertTrue(counts['insert_Word'] == 1)

    def test_removed_markup(self):
        counts = compute_action_counts('Text {{citation needed}} here.', 'Text here.')
        self.assertTrue(counts['remove_Template'] == 1)
        self.assertTrue(counts['insert_Template'] == 0)

    def test_flat_key_order(self):
        self.assertTrue(ACTION_KEYS[:4] == ('change_Media', 'insert_Media', 'move_Media', 'remove_Media'))
        self.assertTrue(ACTION_KEYS[-1] == 'remove_Word')
        self.assertTrue(len(ActionCounts().as_vector()) == len(ACTION_KEYS))

    def test_unknown_and_move_keys_are_ignored(self):
        counts = ActionCounts.from_flat_dict({'insert_Word': 2, 'move_Word': 5, 'bogus': 1})
        self.assertTrue(counts['insert_Word'] == 2)
        self.assertTrue(counts['move_Word'] == 0)
        self.assertFalse(counts.is_zero)
        self.assertTrue(ActionCounts().is_zero)


if __name__ == '__main__':
    unittest.main()
