#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: synthetic.py
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
Main code for synthetic.

Generates multilingual page histories with vandalism and identity reverts by patrollers. Anonymous
editors vandalize more often than registered ones and most vandal edits carry words from a per language
vandal vocabulary.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .revisions import Corpus, InterfaceFlags, RevisionRecord, UserKind, write_corpus

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
LOGGER_BASENAME = '''synthetic'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

DEFAULT_LANGUAGES = ('dewiki', 'eswiki', 'frwiki', 'itwiki', 'ruwiki')

SYLLABLES = {'dewiki': ('ber', 'gen', 'sch', 'lan', 'der', 'hau', 'sen', 'wal', 'ung', 'kei', 'tra', 'men'),
             'eswiki': ('ca', 'mi', 'no', 'ra', 'ción', 'de', 'lo', 'ta', 'ble', 'gui', 'sa', 'pe'),
             'frwiki': ('eau', 'mon', 'tre', 'vil', 'ière', 'pon', 'cha', 'lé', 'gne', 'rou', 'bes', 'que'),
             'itwiki': ('zio', 'ne', 'gli', 'ca', 'to', 'ri', 'mon', 'ter', 'pia', 'vel', 'lu', 'sco'),
             'ruwiki': ('ско', 'ва', 'ро', 'ния', 'ост', 'ли', 'мо', 'гра', 'пет', 'ду', 'ка', 'зем')}
FALLBACK_SYLLABLES = ('ka', 'lo', 'mi', 'ren', 'sot', 'va', 'dur', 'pel', 'tis', 'no', 'gar', 'bu')
VANDAL_WORDS = {'dewiki': ('doofkopf', 'quatschbirne', 'bloedmannx'),
                'eswiki': ('tontazo', 'bobaliconx', 'pendejadaz'),
                'frwiki': ('crétinus', 'nullardos', 'boufonnex'),
                'itwiki': ('stupidonex', 'cretinata', 'babbeoz'),
                'ruwiki': ('дурачина', 'балбесище', 'ерундень')}
PATROLLERS = ('Patrol-A', 'Patrol-B', 'Patrol-C')
EDIT_COMMENTS = ('', '', 'edit', 'copyedit', 'fix typo', 'expand')


@dataclass(frozen=True)
class SyntheticSpec:  # pylint: disable=too-many-instance-attributes
    """Shape of a synthetic corpus."""

    languages: tuple = DEFAULT_LANGUAGES
    n_revisions: int = 50000
    seed: int = 0
    anonymous_rate: float = 0.3
    anonymous_vandal_rate: float = 0.3
    # with patrol reverts counted registered editors are reverted a third as often as anonymous ones
    registered_vandal_rate: float = 0.125
    vocabulary_rate: float = 0.8
    blanking_rate: float = 0.05
    bot_rate: float = 0.02
    non_content_rate: float = 0.03
    start: datetime = datetime(2022, 1, 1, tzinfo=timezone.utc)
    train_days: int = 181
    test_days: int = 7
    revisions_per_page: tuple = (6, 30)
    mean_gap_hours: float = 20.0
    interface_rates: dict = field(default_factory=lambda: {'is_mobile_edit': 0.25, 'is_visualeditor': 0.2,
                                                           'is_wikieditor': 0.5})

    @property
    def train_end(self):
        """End of the training window."""
        return self.start + timedelta(days=self.train_days)

    @property
    def test_end(self):
        """End of the test window."""
        return self.train_end + timedelta(days=self.test_days)

    def configuration(self, corpus_path):
        """A pipeline configuration matching the corpus windows."""
        return {'seed': self.seed,
                'corpus': {'train_path': str(corpus_path)},
                'split': {'train_start': self.start.strftime('%Y-%m-%d %H:%M:%S'),
                          'train_end': self.train_end.strftime('%Y-%m-%d %H:%M:%S'),
                          'test_end': self.test_end.strftime('%Y-%m-%d %H:%M:%S')},
                'features': {'languages': list(self.languages)}}


class _Language:
    """Lexicon and sentence generation for one synthetic language."""

    def __init__(self, wiki_db, rng):
        self.wiki_db = wiki_db
        self.rng = rng
        syllables = SYLLABLES.get(wiki_db, FALLBACK_SYLLABLES)
        self.words = sorted({''.join(rng.choice(syllables, size=int(rng.integers(1, 4))))
                             for _ in range(400)})
        self.vandal_words = VANDAL_WORDS.get(wiki_db) or tuple(
            f'{"".join(rng.choice(syllables, size=3))}xz' for _ in range(3))

    def word(self):
        return str(self.rng.choice(self.words))

    def sentence(self, vandal_word=None):
        words = [self.word() for _ in range(int(self.rng.integers(4, 12)))]
        if vandal_word:
            words.insert(int(self.rng.integers(0, len(words) + 1)), vandal_word)
        if self.rng.random() < 0.15:
            position = int(self.rng.integers(0, len(words)))
            words[position] = f'[[{words[position]}]]'
        return f'{" ".join(words).capitalize()}.'

    def paragraph(self):
        return [self.sentence() for _ in range(int(self.rng.integers(2, 5)))]

    def title(self):
        return ' '.join(self.word().capitalize() for _ in range(int(self.rng.integers(1, 3))))


def _render(paragraphs):
    return '\n\n'.join(' '.join(sentences) for sentences in paragraphs if sentences)


def _sentence_slot(paragraphs, rng):
    index = int(rng.integers(0, len(paragraphs)))
    return index, int(rng.integers(0, len(paragraphs[index]) + 1))


def _replace_word(paragraphs, language, rng):
    index = int(rng.integers(0, len(paragraphs)))
    if paragraphs[index]:
        slot = int(rng.integers(0, len(paragraphs[index])))
        words = paragraphs[index][slot].rstrip('.').split(' ')
        words[int(rng.integers(0, len(words)))] = language.word()
        paragraphs[index][slot] = f'{" ".join(words)}.'
    return paragraphs


def _good_edit(paragraphs, language, rng):
    paragraphs = [list(sentences) for sentences in paragraphs]
    action = rng.random()
    if action < 0.45:
        index, slot = _sentence_slot(paragraphs, rng)
        paragraphs[index].insert(slot, language.sentence())
    elif action < 0.7:
        paragraphs = _replace_word(paragraphs, language, rng)
    elif action < 0.85:
        paragraphs.append(language.paragraph())
    else:
        index = int(rng.integers(0, len(paragraphs)))
        if len(paragraphs[index]) > 1:
            paragraphs[index].pop(int(rng.integers(0, len(paragraphs[index]))))
        else:
            paragraphs[index].append(language.sentence())
    return paragraphs


def _vandal_edit(paragraphs, language, rng, vocabulary_rate, blanking_rate):
    """A vandal edit, either paragraph blanking or an insert or change of which vocabulary_rate use vandal words.

    Changes without vandal words replace a single word exactly like a good copy edit.
    """
    paragraphs = [list(sentences) for sentences in paragraphs]
    if rng.random() < blanking_rate and len(paragraphs) > 1:
        paragraphs.pop(max(range(len(paragraphs)), key=lambda position: len(paragraphs[position])))
        return paragraphs
    if rng.random() >= vocabulary_rate:
        return _replace_word(paragraphs, language, rng)
    vandal_word = str(rng.choice(language.vandal_words))
    index, slot = _sentence_slot(paragraphs, rng)
    if rng.random() < 0.5 or not paragraphs[index]:
        paragraphs[index].insert(slot, language.sentence(vandal_word=vandal_word))
    else:
        slot = min(slot, len(paragraphs[index]) - 1)
        words = paragraphs[index][slot].rstrip('.').split(' ')
        words.insert(int(rng.integers(0, len(words) + 1)), vandal_word)
        paragraphs[index][slot] = f'{" ".join(words)}.'
    return paragraphs


class SyntheticCorpusGenerator:  # pylint: disable=too-few-public-methods
    """Builds page histories until the requested number of revisions is reached."""

    def __init__(self, spec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.languages = {wiki_db: _Language(wiki_db, np.random.default_rng([spec.seed, index]))
                          for index, wiki_db in enumerate(spec.languages)}
        self._next_revision_id = 1000
        self._records = []
        self._titles = set()

    def _user(self, language):
        roll = self.rng.random()
        if roll < self.spec.bot_rate:
            return UserKind.BOT, f'{language.wiki_db}-bot', ('bot',)
        if roll < self.spec.bot_rate + self.spec.anonymous_rate:
            return UserKind.ANONYMOUS, f'192.0.2.{int(self.rng.integers(1, 255))}', ()
        groups = ('autoconfirmed',) if self.rng.random() < 0.8 else ()
        return UserKind.REGISTERED, f'Editor-{int(self.rng.integers(1, 500))}', groups

    def _flags(self):
        return InterfaceFlags(**{name: bool(self.rng.random() < rate)
                                 for name, rate in self.spec.interface_rates.items()})

    def _append(self, language, title, state, text, timestamp, user, comment):  # pylint: disable=too-many-arguments
        kind, user_text, groups = user
        previous_text, previous_id, previous_time = state
        revision_id = self._next_revision_id
        self._next_revision_id += 1
        self._records.append(RevisionRecord(
            wiki_db=language.wiki_db,
            revision_id=revision_id,
            revision_parent_id=previous_id,
            page_title=title,
            event_timestamp=timestamp,
            event_comment=comment,
            event_user_text=user_text,
            user_kind=kind,
            seconds_since_previous_revision=(None if previous_time is None
                                             else int((timestamp - previous_time).total_seconds())),
            revision_text_bytes_diff=len(text.encode('utf-8')) - len((previous_text or '').encode('utf-8')),
            interface_flags=self._flags(),
            parent_text=previous_text if previous_id else '',
            current_text=text,
            user_groups=groups))
        return text, revision_id, timestamp

    def _page(self, language):
        spec = self.spec
        title = language.title()
        if self.rng.random() < spec.non_content_rate:
            title = f'Talk:{title}'
        base_title, suffix = title, 1
        while (language.wiki_db, title) in self._titles:
            suffix += 1
            title = f'{base_title} {suffix}'
        self._titles.add((language.wiki_db, title))
        window = (spec.test_end - spec.start).total_seconds()
        timestamp = spec.start + timedelta(seconds=float(self.rng.uniform(0, window * 0.98)))
        paragraphs = [language.paragraph() for _ in range(int(self.rng.integers(2, 4)))]
        state = self._append(language, title, ('', 0, None), _render(paragraphs), timestamp,
                             (UserKind.REGISTERED, 'Creator', ('autoconfirmed',)), 'new page')
        for _ in range(int(self.rng.integers(*spec.revisions_per_page))):
            timestamp += timedelta(hours=float(self.rng.exponential(spec.mean_gap_hours)))
            if timestamp >= spec.test_end or len(self._records) >= spec.n_revisions:
                return
            user = self._user(language)
            vandal_rate = {UserKind.ANONYMOUS: spec.anonymous_vandal_rate,
                           UserKind.REGISTERED: spec.registered_vandal_rate}.get(user[0], 0.0)
            if self.rng.random() >= vandal_rate:
                paragraphs = _good_edit(paragraphs, language, self.rng)
                state = self._append(language, title, state, _render(paragraphs), timestamp, user,
                                     str(self.rng.choice(EDIT_COMMENTS)))
                continue
            restored_text = state[0]
            vandalized = _render(_vandal_edit(paragraphs, language, self.rng, spec.vocabulary_rate, spec.blanking_rate))
            if vandalized == restored_text:
                continue
            state = self._append(language, title, state, vandalized, timestamp, user,
                                 str(self.rng.choice(EDIT_COMMENTS)))
            timestamp += timedelta(minutes=float(self.rng.uniform(1, 60)))
            if len(self._records) >= spec.n_revisions:
                return
            patroller = (UserKind.REGISTERED, str(self.rng.choice(PATROLLERS)), ('sysop', 'autoconfirmed'))
            state = self._append(language, title, state, restored_text, timestamp, patroller,
                                 'Reverted edits to last revision')

    def generate(self):
        """Generates the corpus."""
        languages = list(self.languages.values())
        while len(self._records) < self.spec.n_revisions:
            self._page(languages[int(self.rng.integers(0, len(languages)))])
        LOGGER.info(f'Generated {len(self._records)} synthetic revisions over {len(languages)} languages.')
        return Corpus(self._records)


def generate_corpus(spec=None):
    """Generates a synthetic corpus for a SyntheticSpec, defaults apply if not set."""
    return SyntheticCorpusGenerator(spec or SyntheticSpec()).generate()


def write_synthetic(spec, directory):
    """Writes a synthetic corpus and a matching pipeline configuration.

    Returns:
        A tuple of the corpus and the configuration paths.

    """
    directory = Path(directory)
    corpus_path = write_corpus(generate_corpus(spec), directory / 'synthetic_corpus.jsonl')
    configuration_path = directory / 'synthetic_config.json'
    configuration_path.write_text(json.dumps(spec.configuration(corpus_path.resolve()), indent=2), encoding='utf-8')
    return corpus_path, configuration_path
