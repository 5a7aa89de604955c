#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: filters.py
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
Main code for filters.

Content, user and edit war filters over corpora plus the time and page level splits.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import hashlib
import logging
from dataclasses import dataclass
from datetime import datetime
from operator import attrgetter

import numpy as np

from .revertriskexceptions import BalanceError, ConfigurationError, PreconditionError
from .revisions import DEFAULT_REVERT_WINDOW, Corpus, content_digest
from .textscore import TextChannel, channel_units

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
LOGGER_BASENAME = '''filters'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

USER_MODES = ('all', 'anonymous_only')

# '*' applies to every wiki on top of its own localized prefixes.
DEFAULT_NAMESPACE_PREFIXES = {
    '*': ('Talk:', 'User:', 'User talk:', 'Wikipedia:', 'Wikipedia talk:', 'File:', 'File talk:', 'Template:',
          'Template talk:', 'Category:', 'Help:', 'Portal:', 'Draft:', 'Module:', 'MediaWiki:'),
    'dewiki': ('Diskussion:', 'Benutzer:', 'Benutzer Diskussion:', 'Datei:', 'Vorlage:', 'Kategorie:', 'Hilfe:'),
    'eswiki': ('Discusión:', 'Usuario:', 'Usuario discusión:', 'Archivo:', 'Plantilla:', 'Categoría:', 'Ayuda:'),
    'frwiki': ('Discussion:', 'Utilisateur:', 'Discussion utilisateur:', 'Wikipédia:', 'Fichier:', 'Modèle:',
               'Catégorie:', 'Aide:', 'Portail:'),
    'itwiki': ('Discussione:', 'Utente:', 'Discussioni utente:', 'Aiuto:', 'Categoria:', 'Portale:'),
    'ruwiki': ('Обсуждение:', 'Участник:', 'Обсуждение участника:', 'Википедия:', 'Файл:', 'Шаблон:',
               'Категория:', 'Справка:', 'Портал:'),
}


@dataclass(frozen=True)
class SplitSpec:
    """Time windows and page level proportions of the train/test split."""

    train_start: datetime
    train_end: datetime
    test_end: datetime
    scorer_fraction: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not self.train_start < self.train_end <= self.test_end:
            raise ConfigurationError('split windows must satisfy train_start < train_end <= test_end')
        if not 0 < self.scorer_fraction < 1:
            raise ConfigurationError(f'scorer_fraction must be in (0, 1), got {self.scorer_fraction}')

    @property
    def classifier_fraction(self):
        """The share of pages feeding the final classifier."""
        return 1 - self.scorer_fraction


@dataclass(frozen=True)
class LabeledDelta:
    """A revision with its extracted text delta."""

    record: object
    delta: object

    @property
    def label(self):
        """The revert label of the revision."""
        return bool(self.record.is_reverted)


def _log_counts(name, before, after):
    LOGGER.info(f'{name}: {len(before)} records in, {len(after)} records out.')
    return after


def _prefixes_for(wiki_db, namespace_prefixes):
    return tuple(namespace_prefixes.get('*', ())) + tuple(namespace_prefixes.get(wiki_db, ()))


def filter_content(corpus, namespace_prefixes=None):
    """Keeps revisions that edit existing encyclopedic pages.

    Args:
        corpus: The Corpus to filter.
        namespace_prefixes: A mapping of wiki to title prefixes of non content namespaces, the "*" entry
            applies to all wikis. Defaults to DEFAULT_NAMESPACE_PREFIXES.

    Returns:
        The filtered Corpus.

    """
    namespace_prefixes = DEFAULT_NAMESPACE_PREFIXES if namespace_prefixes is None else namespace_prefixes

    def is_content_edit(record):
        if record.revision_parent_id <= 0:
            return False
        return not record.page_title.startswith(_prefixes_for(record.wiki_db, namespace_prefixes))

    return _log_counts('filter_content', corpus, corpus.filter(is_content_edit))


def filter_users(corpus, mode='all'):
    """Removes bot revisions and, for anonymous_only, registered users revisions.

    Args:
        corpus: The Corpus to filter.
        mode: Either "all" or "anonymous_only".

    Returns:
        The filtered Corpus.

    """
    if mode not in USER_MODES:
        raise ConfigurationError(f'Unknown user filter mode "{mode}", expected one of {USER_MODES}.')
    if mode == 'anonymous_only':
        return _log_counts('filter_users', corpus, corpus.filter(attrgetter('is_anonymous')))
    return _log_counts('filter_users', corpus, corpus.filter(lambda record: not record.is_bot))


def _reverted_by_next(history, position, window):
    record, following = history[position], history[position + 1]
    if not following.is_revert:
        return False
    considered = history[max(0, position + 1 - window):position + 2]
    if all(item.current_text is not None for item in considered):
        restored = content_digest(following.current_text)
        if restored == content_digest(record.current_text):
            return False
        for earlier in range(position - 1, max(-1, position - window), -1):
            if content_digest(history[earlier].current_text) == restored:
                return True
        return False
    return bool(record.is_reverted)


def filter_edit_wars(corpus, window=DEFAULT_REVERT_WINDOW):
    """Drops reverting revisions that are themselves reverted by the next revision of their page.

    Args:
        corpus: An annotated Corpus.
        window: The revert window used for annotation.

    Returns:
        The filtered Corpus.

    Raises:
        PreconditionError: If revert annotations are missing.

    """
    if any(record.is_revert is None or record.is_reverted is None for record in corpus):
        raise PreconditionError('filter_edit_wars needs revert annotations, run annotate_reverts first.')
    kept = []
    for history in corpus.pages().values():
        for position, record in enumerate(history):
            if record.is_revert and position + 1 < len(history) and _reverted_by_next(history, position, window):
                LOGGER.debug(f'Dropping edit war revision {record.revision_id} of {record.page_key}.')
                continue
            kept.append(record)
    return _log_counts('filter_edit_wars', corpus, Corpus(kept))


def split_time(corpus, spec):
    """Splits a corpus on half open time windows, later records are discarded.

    Args:
        corpus: The Corpus to split.
        spec: The SplitSpec.

    Returns:
        A (train, test) tuple of Corpus objects.

    """
    train = corpus.filter(lambda record: spec.train_start <= record.event_timestamp < spec.train_end)
    test = corpus.filter(lambda record: spec.train_end <= record.event_timestamp < spec.test_end)
    LOGGER.info(f'split_time: {len(corpus)} records in, {len(train)} train, {len(test)} test, '
                f'{len(corpus) - len(train) - len(test)} discarded.')
    return train, test


def page_bucket(wiki_db, page_title, seed):
    """Seeded position of a page in [0, 1) derived from a 64 bit hash of its identity."""
    digest = hashlib.blake2b(f'{wiki_db}\x1f{page_title}'.encode('utf-8'),
                             digest_size=8,
                             key=str(seed).encode('utf-8'))
    return int.from_bytes(digest.digest(), 'big') / 2 ** 64


def split_articles(train_corpus, scorer_fraction=0.6, seed=0):
    """Splits a corpus by page into the text scorer and the classifier training sets.

    Args:
        train_corpus: The Corpus to split.
        scorer_fraction: The expected share of pages on the scorer side.
        seed: The hashing seed.

    Returns:
        A (scorer_train, classifier_train) tuple of Corpus objects sharing no page.

    """
    if not 0 < scorer_fraction < 1:
        raise ConfigurationError(f'scorer_fraction must be in (0, 1), got {scorer_fraction}')
    scorer_side = train_corpus.filter(lambda record: page_bucket(*record.page_key, seed) < scorer_fraction)
    classifier_side = train_corpus.filter(lambda record: page_bucket(*record.page_key, seed) >= scorer_fraction)
    LOGGER.info(f'split_articles: {len(train_corpus)} records in, {len(scorer_side)} scorer, '
                f'{len(classifier_side)} classifier.')
    return scorer_side, classifier_side


def single_modification_filter(samples, channel):
    """Keeps samples whose delta holds exactly one unit of the channel.

    Args:
        samples: An iterable of LabeledDelta.
        channel: The TextChannel, or its value, among change, insert and remove.

    Returns:
        The list of retained samples in input order.

    """
    channel = TextChannel(channel)
    kept = [sample for sample in samples if len(channel_units(sample.delta, channel)) == 1]
    LOGGER.debug(f'single_modification_filter({channel.value}) kept {len(kept)} samples.')
    return kept


def undersample_balance(samples, seed, label_of=attrgetter('label')):
    """Downsamples the majority class uniformly to the size of the minority class.

    Args:
        samples: A sequence of labeled items.
        seed: The sampling seed.
        label_of: Callable returning the boolean label of an item.

    Returns:
        The balanced list in input order.

    Raises:
        BalanceError: If a class is absent.

    """
    samples = list(samples)
    positives = [index for index, sample in enumerate(samples) if label_of(sample)]
    negatives = [index for index, sample in enumerate(samples) if not label_of(sample)]
    if not positives or not negatives:
        raise BalanceError(f'Cannot balance {len(positives)} positive and {len(negatives)} negative samples.')
    minority, majority = sorted((positives, negatives), key=len)
    generator = np.random.default_rng(seed)
    sampled = generator.choice(np.asarray(majority), size=len(minority), replace=False)
    kept = sorted(minority + sampled.tolist())
    return [samples[index] for index in kept]
