#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: textdiff.py
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
Main code for textdiff.

Extracts sentence level inserts, removes and changes out of a pair of wikitext revisions and counts the
edit actions per token category.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import Levenshtein
import regex

from .revertriskexceptions import ConfigurationError

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
LOGGER_BASENAME = '''textdiff'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())


class TokenCategory(Enum):
    """The categories a wikitext token can belong to."""

    WORD = 'Word'
    PUNCTUATION = 'Punctuation'
    WHITESPACE = 'Whitespace'
    MEDIA = 'Media'
    REFERENCE = 'Reference'
    TEMPLATE = 'Template'
    WIKILINK = 'Wikilink'
    EXTERNAL_LINK = 'ExternalLink'
    HEADING = 'Heading'
    TABLE = 'Table'
    OTHER = 'Other'


EDIT_ACTIONS = ('change', 'insert', 'move', 'remove')

# Media and Punctuation lead, Whitespace and Word close the flat key listing.
CATEGORY_KEY_ORDER = (TokenCategory.MEDIA,
                      TokenCategory.PUNCTUATION,
                      TokenCategory.REFERENCE,
                      TokenCategory.TABLE,
                      TokenCategory.TEMPLATE,
                      TokenCategory.HEADING,
                      TokenCategory.WIKILINK,
                      TokenCategory.EXTERNAL_LINK,
                      TokenCategory.OTHER,
                      TokenCategory.WHITESPACE,
                      TokenCategory.WORD)

ACTION_KEYS = tuple(f'{action}_{category.value}' for category in CATEGORY_KEY_ORDER for action in EDIT_ACTIONS)

MARKUP_CATEGORIES = frozenset({TokenCategory.REFERENCE,
                               TokenCategory.TEMPLATE,
                               TokenCategory.MEDIA,
                               TokenCategory.TABLE,
                               TokenCategory.HEADING})

SENTENCE_TERMINALS = '.!?。؟।።'

_REFERENCE = regex.compile(r'<ref\b[^>]*?/>|<ref\b[^>]*>.*?</ref\s*>', regex.IGNORECASE | regex.DOTALL)
_HEADING = regex.compile(r'(?P<marks>={1,6})[^\n]+?(?P=marks)[ \t]*(?=\n|$)')
_MEDIA_OPENER = regex.compile(r'\[\[\s*(?:file|image)\s*:', regex.IGNORECASE)
_EXTERNAL_LINK = regex.compile(r'https?://[^\s\[\]<>"{}|]+', regex.IGNORECASE)
_WORD = regex.compile(r"[\p{L}\p{N}][\p{L}\p{M}\p{N}]*(?:['’][\p{L}\p{N}][\p{L}\p{M}\p{N}]*)*")
_PUNCTUATION = regex.compile(r"\p{P}")
_WHITESPACE = regex.compile(r'\s+')
_BLANK_LINES = regex.compile(r'\n[ \t\r\f\v]*\n\s*')
_SENTENCE_BOUNDARY = regex.compile(rf'(?<=[{regex.escape(SENTENCE_TERMINALS)}])(?:\s+|$)')


@dataclass(frozen=True)
class DiffConfig:
    """Thresholds steering paragraph and sentence alignment."""

    sentence_match_threshold: float = 0.5
    paragraph_match_threshold: float = 0.4
    max_sentence_length: int = 2000

    def __post_init__(self):
        if not 0 < self.paragraph_match_threshold <= self.sentence_match_threshold < 1:
            raise ConfigurationError('diff thresholds must satisfy 0 < paragraph <= sentence < 1, got '
                                     f'paragraph={self.paragraph_match_threshold} '
                                     f'sentence={self.sentence_match_threshold}')
        if self.max_sentence_length <= 0:
            raise ConfigurationError(f'max_sentence_length must be positive, got {self.max_sentence_length}')

    def to_dict(self):
        """Plain representation for manifests."""
        return {'sentence_match_threshold': self.sentence_match_threshold,
                'paragraph_match_threshold': self.paragraph_match_threshold,
                'max_sentence_length': self.max_sentence_length}


@dataclass(frozen=True)
class TextDelta:
    """The text units a revision inserted, removed and changed."""

    inserts: tuple = field(default_factory=tuple)
    removes: tuple = field(default_factory=tuple)
    changes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'inserts', tuple(self.inserts))
        object.__setattr__(self, 'removes', tuple(self.removes))
        object.__setattr__(self, 'changes', tuple((old, new) for old, new in self.changes))

    @property
    def is_empty(self):
        """True when the revision touched no plain text."""
        return not any([self.inserts, self.removes, self.changes])

    def swapped(self):
        """The delta of the inverse edit."""
        return TextDelta(inserts=self.removes,
                         removes=self.inserts,
                         changes=tuple((new, old) for old, new in self.changes))

    def to_dict(self):
        """Plain representation with the corpus field names."""
        return {'texts_insert': list(self.inserts),
                'texts_removed': list(self.removes),
                'texts_change': [list(pair) for pair in self.changes]}


class ActionCounts:
    """Counts of edit actions per token category, keyed in the flat "<action>_<Category>" format."""

    def __init__(self, counts=None):
        self._counts = dict.fromkeys(ACTION_KEYS, 0)
        for key, value in (counts or {}).items():
            if key not in self._counts:
                LOGGER.debug(f'Ignoring unknown action key "{key}".')
                continue
            if key.startswith('move_'):
                continue
            self._counts[key] = int(value)

    def __getitem__(self, key):
        return self._counts[key]

    def __eq__(self, other):
        if not isinstance(other, ActionCounts):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self):
        return hash(tuple(self._counts.items()))

    def __repr__(self):
        non_zero = {key: value for key, value in self._counts.items() if value}
        return f'ActionCounts({non_zero})'

    @classmethod
    def from_flat_dict(cls, mapping):
        """Builds counts from a flat mapping, missing keys count as zero."""
        return cls(mapping)

    def as_flat_dict(self):
        """The counts in flat key order."""
        return dict(self._counts)

    def as_vector(self):
        """The counts as a list following ACTION_KEYS."""
        return [self._counts[key] for key in ACTION_KEYS]

    @property
    def is_zero(self):
        """True when no action was counted."""
        return not any(self._counts.values())


def levenshtein(a, b):
    """Edit distance over unicode code points.

    Args:
        a: The first string.
        b: The second string.

    Returns:
        The minimal number of insertions, deletions and substitutions turning a into b.

    """
    return Levenshtein.distance(a, b)


def similarity(a, b, max_length=None):
    """Normalized levenshtein similarity, 1 for equal strings and 0 for complete substitutions.

    Args:
        a: The first string.
        b: The second string.
        max_length: If set both strings are truncated to this many characters first.

    Returns:
        1 - distance / max(len(a), len(b)), 1.0 when both are empty.

    """
    if max_length:
        a, b = a[:max_length], b[:max_length]
    longest = max(len(a), len(b))
    if not longest:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _balanced_end(text, start, opener, closer, skip=()):
    depth = 0
    position = start
    while position < len(text):
        nested = next(((nested_opener, nested_closer) for nested_opener, nested_closer in skip
                       if text.startswith(nested_opener, position)), None)
        if nested and depth:
            end = _balanced_end(text, position, *nested)
            if end is not None:
                position = end
                continue
        if text.startswith(opener, position):
            depth += 1
            position += len(opener)
        elif text.startswith(closer, position):
            depth -= 1
            position += len(closer)
            if not depth:
                return position
        else:
            position += 1
    return None


def _balanced_token(text, position, opener, closer, category, skip=()):
    end = _balanced_end(text, position, opener, closer, skip)
    if end is None:
        return opener, TokenCategory.OTHER
    return text[position:end], category


def _match_token(text, position):  # noqa: MC0001
    character = text[position]
    if character == '<':
        match = _REFERENCE.match(text, position)
        if match:
            return match.group(0), TokenCategory.REFERENCE
    if text.startswith('{{', position):
        return _balanced_token(text, position, '{{', '}}', TokenCategory.TEMPLATE)
    if text.startswith('[[', position) and _MEDIA_OPENER.match(text, position):
        return _balanced_token(text, position, '[[', ']]', TokenCategory.MEDIA)
    if text.startswith('{|', position):
        return _balanced_token(text, position, '{|', '|}', TokenCategory.TABLE, skip=(('{{', '}}'),))
    if character == '=' and (position == 0 or text[position - 1] == '\n'):
        match = _HEADING.match(text, position)
        if match:
            return match.group(0), TokenCategory.HEADING
    if text.startswith('[[', position):
        return _balanced_token(text, position, '[[', ']]', TokenCategory.WIKILINK)
    if character in 'hH':
        match = _EXTERNAL_LINK.match(text, position)
        if match:
            return match.group(0), TokenCategory.EXTERNAL_LINK
    match = _WORD.match(text, position)
    if match:
        return match.group(0), TokenCategory.WORD
    if _PUNCTUATION.match(character):
        return character, TokenCategory.PUNCTUATION
    match = _WHITESPACE.match(text, position)
    if match:
        return match.group(0), TokenCategory.WHITESPACE
    return character, TokenCategory.OTHER


def tokenize_wikitext(text):
    """Splits wikitext into categorized tokens covering every character exactly once.

    Precedence at a position is Reference, Template, Media, Table, Heading, Wikilink, ExternalLink, Word,
    Punctuation, Whitespace and finally Other. An opener without its closer becomes an Other token.

    Args:
        text: The wikitext to tokenize.

    Returns:
        A list of (token, TokenCategory) tuples.

    """
    tokens = []
    position = 0
    while position < len(text):
        token, category = _match_token(text, position)
        tokens.append((token, category))
        position += len(token)
    return tokens


def _wikilink_label(token):
    target, _, label = token[2:-2].rpartition('|')
    return (label.strip() or target.strip()) if target else label


def extract_plain_paragraphs(text):
    """Plain text paragraphs of a wikitext with markup removed and link labels kept.

    Args:
        text: The wikitext.

    Returns:
        A list of non empty paragraphs with whitespace collapsed.

    """
    pieces = []
    for token, category in tokenize_wikitext(text or ''):
        if category in MARKUP_CATEGORIES:
            continue
        pieces.append(_wikilink_label(token) if category is TokenCategory.WIKILINK else token)
    paragraphs = []
    for block in _BLANK_LINES.split(''.join(pieces)):
        collapsed = _WHITESPACE.sub(' ', block).strip()
        if collapsed:
            paragraphs.append(collapsed)
    return paragraphs


def split_sentences(paragraph, max_sentence_length=DiffConfig.max_sentence_length):
    """Splits a paragraph after terminal marks that are followed by whitespace or the end.

    Args:
        paragraph: The plain text paragraph.
        max_sentence_length: Sentences are truncated to this many characters.

    Returns:
        The list of trimmed non empty sentences.

    """
    sentences = (part.strip() for part in _SENTENCE_BOUNDARY.split(paragraph or ''))
    return [sentence[:max_sentence_length] for sentence in sentences if sentence]


def _without_common(left, right):
    common = Counter(left) & Counter(right)
    left_seen, right_seen = Counter(), Counter()
    left_rest, right_rest = [], []
    for item in left:
        left_seen[item] += 1
        if left_seen[item] > common[item]:
            left_rest.append(item)
    for item in right:
        right_seen[item] += 1
        if right_seen[item] > common[item]:
            right_rest.append(item)
    return left_rest, right_rest


def _greedy_pairs(left, right, threshold, max_length=None):
    # selection and order of the pairs depend on content only, never on which side is left
    candidates = []
    for left_index, left_text in enumerate(left):
        for right_index, right_text in enumerate(right):
            score = similarity(left_text, right_text, max_length)
            if score >= threshold:
                candidates.append((-score,
                                   min(left_text, right_text),
                                   max(left_text, right_text),
                                   left_index,
                                   right_index))
    candidates.sort()
    used_left, used_right, pairs = set(), set(), []
    for *_, left_index, right_index in candidates:
        if left_index in used_left or right_index in used_right:
            continue
        used_left.add(left_index)
        used_right.add(right_index)
        pairs.append((left_index, right_index))
    return sorted(pairs, key=lambda pair: sorted((left[pair[0]], right[pair[1]])))


def extract_delta(parent_text, current_text, config=None):
    """Extracts the text delta between two revisions.

    Paragraphs present on both sides are dropped, the rest are paired greedily by similarity. Paired
    paragraphs are compared sentence by sentence, unpaired ones count as whole inserts or removes.

    Args:
        parent_text: The wikitext of the parent revision.
        current_text: The wikitext of the revision.
        config: A DiffConfig, defaults apply if not set.

    Returns:
        The TextDelta.

    """
    config = config or DiffConfig()
    max_length = config.max_sentence_length
    parent_rest, current_rest = _without_common(extract_plain_paragraphs(parent_text),
                                                extract_plain_paragraphs(current_text))
    paragraph_pairs = _greedy_pairs(parent_rest, current_rest, config.paragraph_match_threshold, max_length)
    inserts, removes, changes = [], [], []
    for parent_index, current_index in paragraph_pairs:
        old_rest, new_rest = _without_common(split_sentences(parent_rest[parent_index], max_length),
                                             split_sentences(current_rest[current_index], max_length))
        sentence_pairs = _greedy_pairs(old_rest, new_rest, config.sentence_match_threshold)
        changes.extend((old_rest[old_index], new_rest[new_index]) for old_index, new_index in sentence_pairs)
        paired_old = {old_index for old_index, _ in sentence_pairs}
        paired_new = {new_index for _, new_index in sentence_pairs}
        removes.extend(sentence for index, sentence in enumerate(old_rest) if index not in paired_old)
        inserts.extend(sentence for index, sentence in enumerate(new_rest) if index not in paired_new)
    paired_parents = {parent_index for parent_index, _ in paragraph_pairs}
    paired_currents = {current_index for _, current_index in paragraph_pairs}
    for index, paragraph in enumerate(parent_rest):
        if index not in paired_parents:
            removes.extend(split_sentences(paragraph, max_length))
    for index, paragraph in enumerate(current_rest):
        if index not in paired_currents:
            inserts.extend(split_sentences(paragraph, max_length))
    return TextDelta(inserts=inserts, removes=removes, changes=changes)


def _category_counts(text):
    return Counter(category for _, category in tokenize_wikitext(text or ''))


def compute_action_counts(parent_text, current_text, config=None, delta=None):
    """Counts inserted, removed and changed tokens per category.

    Args:
        parent_text: The wikitext of the parent revision.
        current_text: The wikitext of the revision.
        config: A DiffConfig used when the delta has to be extracted.
        delta: An already extracted TextDelta for the same pair, extracted if not provided.

    Returns:
        The ActionCounts, move counts are always zero.

    """
    parent_counts = _category_counts(parent_text)
    current_counts = _category_counts(current_text)
    counts = {}
    for category in TokenCategory:
        counts[f'insert_{category.value}'] = max(0, current_counts[category] - parent_counts[category])
        counts[f'remove_{category.value}'] = max(0, parent_counts[category] - current_counts[category])
    if delta is None:
        delta = extract_delta(parent_text, current_text, config)
    changed = Counter()
    for old, new in delta.changes:
        old_tokens, new_tokens = Counter(tokenize_wikitext(old)), Counter(tokenize_wikitext(new))
        differing = (old_tokens - new_tokens) + (new_tokens - old_tokens)
        changed.update({category for _, category in differing})
    for category, value in changed.items():
        counts[f'change_{category.value}'] = value
    return ActionCounts(counts)
