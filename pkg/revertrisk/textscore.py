#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: textscore.py
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
Main code for textscore.

Per channel text scorers: a hashed character n-gram logistic scorer, the page title revert rate
regressor, an adapter for remote scoring services and the mean/max pooling of their outputs.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import json
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import requests
from scipy import sparse
from scipy.special import expit
from sklearn.exceptions import ConvergenceWarning
from sklearn.feature_extraction.text import HashingVectorizer
from sklearn.linear_model import SGDClassifier, SGDRegressor
from sklearn.preprocessing import normalize

from .revertriskexceptions import BundleLoadError, PreconditionError, ScoringError, TrainingError

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
LOGGER_BASENAME = '''textscore'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

SCORER_FORMAT_VERSION = 1
MISSING_VALUE = -1.0
POOLED_STATISTICS = ('mean_raw', 'max_raw', 'mean_prob', 'max_prob', 'unit_count', 'present')
TRAINING_POPULATIONS = ('all', 'anonymous')


class TextChannel(Enum):
    """The text signals scored separately."""

    CHANGE = 'change'
    INSERT = 'insert'
    REMOVE = 'remove'
    TITLE = 'title'


POOLED_CHANNELS = (TextChannel.CHANGE, TextChannel.INSERT, TextChannel.REMOVE)


@dataclass(frozen=True)
class ScorerHyperparameters:
    """Training knobs of the n-gram scorers."""

    hash_bits: int = 18
    ngram_range: tuple = (1, 3)
    epochs: int = 5
    learning_rate: float = 0.1
    power_t: float = 0.5


@dataclass(frozen=True)
class ChannelScore:
    """The margin and the probability a scorer assigned to one unit."""

    raw: float
    probability: float


@dataclass(frozen=True)
class PooledChannel:
    """Mean and max pooled scores of one channel."""

    mean_raw: float
    max_raw: float
    mean_prob: float
    max_prob: float
    count: int

    def as_list(self):
        """The pooled values followed by the count and the presence flag."""
        return [self.mean_raw, self.max_raw, self.mean_prob, self.max_prob, float(self.count), 1.0]


@dataclass(frozen=True)
class PooledTextFeatures:
    """The pooled text feature block of a revision."""

    change: Optional[PooledChannel]
    insert: Optional[PooledChannel]
    remove: Optional[PooledChannel]
    title_score: float

    @staticmethod
    def feature_names():
        """The names of the block in layout order."""
        names = [f'{channel.value}_{statistic}' for channel in POOLED_CHANNELS for statistic in POOLED_STATISTICS]
        return names + ['title_score']

    def as_list(self):
        """The block values in layout order, missing channels carry the sentinel and a zero flag."""
        values = []
        for channel in POOLED_CHANNELS:
            pooled = getattr(self, channel.value)
            values.extend(pooled.as_list() if pooled else [MISSING_VALUE] * 4 + [0.0, 0.0])
        return values + [self.title_score]


def channel_units(delta, channel):
    """The units of a TextDelta that belong to a pooled channel."""
    channel = TextChannel(channel)
    if channel is TextChannel.CHANGE:
        return list(delta.changes)
    if channel is TextChannel.INSERT:
        return list(delta.inserts)
    if channel is TextChannel.REMOVE:
        return list(delta.removes)
    raise ScoringError('The title channel has no units in a text delta.')


def labeled_units(samples, channel):
    """Pairs the single channel unit of each sample with its label.

    Args:
        samples: LabeledDelta items already passed through the single modification filter.
        channel: The TextChannel.

    Returns:
        A list of (unit, label) tuples.

    """
    pairs = []
    for sample in samples:
        units = channel_units(sample.delta, channel)
        if len(units) != 1:
            raise PreconditionError(f'Sample with {len(units)} {TextChannel(channel).value} units reached training, '
                                    'apply single_modification_filter first.')
        pairs.append((units[0], sample.label))
    return pairs


def _validate_units(channel, units):
    for unit in units:
        if channel is TextChannel.CHANGE:
            if not (isinstance(unit, (tuple, list)) and len(unit) == 2):
                raise ScoringError(f'change units must be (old, new) pairs, got {unit!r}')
        elif not isinstance(unit, str):
            raise ScoringError(f'{channel.value} units must be strings, got {unit!r}')


class NgramFeaturizer:
    """Hashes lowercased character n-grams into a signed, L2 normalized sparse vector."""

    def __init__(self, hash_bits=18, ngram_range=(1, 3)):
        self.hash_bits = hash_bits
        self.ngram_range = tuple(ngram_range)
        self._vectorizer = HashingVectorizer(analyzer='char',
                                             ngram_range=self.ngram_range,
                                             n_features=2 ** hash_bits,
                                             alternate_sign=True,
                                             lowercase=True,
                                             norm=None,
                                             dtype=np.float64)

    def dimension(self, channel):
        """Feature count for a channel, change pairs take two blocks."""
        blocks = 2 if TextChannel(channel) is TextChannel.CHANGE else 1
        return blocks * 2 ** self.hash_bits

    def transform(self, channel, units):
        """Featurizes a list of units of the channel.

        Args:
            channel: The TextChannel.
            units: Strings, or (old, new) pairs for the change channel.

        Returns:
            A csr matrix with one normalized row per unit.

        """
        channel = TextChannel(channel)
        units = list(units)
        if not units:
            return sparse.csr_matrix((0, self.dimension(channel)), dtype=np.float64)
        if channel is TextChannel.CHANGE:
            old = self._vectorizer.transform([pair[0] for pair in units])
            new = self._vectorizer.transform([pair[1] for pair in units])
            matrix = sparse.hstack([old, new], format='csr')
        else:
            matrix = self._vectorizer.transform(units)
        return normalize(matrix, norm='l2')


def featurize_text(channel, unit, hash_bits=18, ngram_range=(1, 3)):
    """The hashed n-gram vector of a single unit as a 1 x dimension csr matrix."""
    channel = TextChannel(channel)
    _validate_units(channel, [unit])
    return NgramFeaturizer(hash_bits, ngram_range).transform(channel, [unit])


class TextScorer:
    """The contract every scorer honours, whatever computes the scores."""

    kind = None

    def __init__(self, channel, population='all'):
        self.channel = TextChannel(channel)
        if population not in TRAINING_POPULATIONS:
            raise ScoringError(f'Unknown training population "{population}".')
        self.population = population

    def score(self, units):
        """Scores units, one ChannelScore per unit in input order."""
        raise NotImplementedError

    def describe(self):
        """A json compatible description of the scorer."""
        return {'kind': self.kind, 'channel': self.channel.value, 'population': self.population}


class NgramScorer(TextScorer):
    """Linear model over hashed character n-grams.

    Classification scorers report the margin and its logistic, the title regressor reports the clamped
    prediction for both.
    """

    kind = 'ngram'

    def __init__(self,  # pylint: disable=too-many-arguments
                 channel,
                 weights,
                 bias,
                 hash_bits=18,
                 ngram_range=(1, 3),
                 task='classification',
                 population='all'):
        super().__init__(channel, population)
        self.featurizer = NgramFeaturizer(hash_bits, ngram_range)
        self.weights = np.asarray(weights, dtype=np.float64).ravel()
        self.bias = float(bias)
        self.task = task
        if self.weights.shape[0] != self.featurizer.dimension(self.channel):
            raise ScoringError(f'Weight vector of size {self.weights.shape[0]} does not fit '
                               f'{self.featurizer.dimension(self.channel)} hashed features.')
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ScoringError('Scorer weights must be finite.')

    @property
    def hash_bits(self):
        """The number of hashing bits."""
        return self.featurizer.hash_bits

    @property
    def ngram_range(self):
        """The character n-gram range."""
        return self.featurizer.ngram_range

    def margins(self, units):
        """The raw linear outputs for units."""
        matrix = self.featurizer.transform(self.channel, units)
        return matrix.dot(self.weights) + self.bias

    def score(self, units):
        units = list(units)
        _validate_units(self.channel, units)
        if not units:
            return []
        raw = self.margins(units)
        if self.task == 'regression':
            clamped = np.clip(raw, 0.0, 1.0)
            return [ChannelScore(raw=float(value), probability=float(value)) for value in clamped]
        probabilities = expit(raw)
        return [ChannelScore(raw=float(margin), probability=float(probability))
                for margin, probability in zip(raw, probabilities)]

    def describe(self):
        description = super().describe()
        description.update({'hash_bits': self.hash_bits,
                            'ngram_range': list(self.ngram_range),
                            'task': self.task})
        return description


class RemoteScorer(TextScorer):
    """Delegates scoring to a service speaking the /score json protocol."""

    kind = 'remote'

    def __init__(self, channel, endpoint, timeout=10, population='all', session=None):
        super().__init__(channel, population)
        self.endpoint = endpoint.rstrip('/')
        self.timeout = timeout
        self.session = session or requests.Session()

    def score(self, units):
        units = list(units)
        _validate_units(self.channel, units)
        if not units:
            return []
        payload_units = [{'old': unit[0], 'new': unit[1]} if self.channel is TextChannel.CHANGE else unit
                         for unit in units]
        url = f'{self.endpoint}/score'
        try:
            response = self.session.post(url,
                                         json={'channel': self.channel.value, 'units': payload_units},
                                         timeout=self.timeout)
        except requests.RequestException as error:
            raise ScoringError(f'Remote scorer {url} unreachable: {error}') from error
        if response.status_code != 200:
            raise ScoringError(f'Remote scorer {url} answered with status {response.status_code}.')
        try:
            scores = [ChannelScore(raw=float(entry['raw']), probability=float(entry['probability']))
                      for entry in response.json()['scores']]
        except (ValueError, KeyError, TypeError) as error:
            raise ScoringError(f'Remote scorer {url} sent an invalid payload: {error}') from error
        if len(scores) != len(units):
            raise ScoringError(f'Remote scorer {url} returned {len(scores)} scores for {len(units)} units.')
        return scores

    def describe(self):
        description = super().describe()
        description.update({'endpoint': self.endpoint, 'timeout': self.timeout})
        return description


def score_channel(scorer, units):
    """Scores a list of channel units with a scorer of any kind."""
    return scorer.score(units)


def _checked_training_set(units, labels):
    if not units:
        raise TrainingError('Cannot train a scorer on an empty dataset.')
    if len(set(labels)) < 2:
        raise TrainingError('Cannot train a scorer on a single class dataset.')


def train_scorer(channel, samples, seed, hyperparameters=None, population='all'):
    """Fits a logistic n-gram scorer with seeded stochastic gradient descent.

    Args:
        channel: The TextChannel among change, insert and remove.
        samples: A sequence of (unit, label) pairs, already single unit filtered and balanced.
        seed: The random seed of the optimizer.
        hyperparameters: ScorerHyperparameters, defaults apply if not set.
        population: The users the training revisions came from, "all" or "anonymous".

    Returns:
        The trained NgramScorer.

    Raises:
        TrainingError: On empty or single class data.

    """
    channel = TextChannel(channel)
    if channel is TextChannel.TITLE:
        raise TrainingError('Use train_title_regressor for the title channel.')
    hyperparameters = hyperparameters or ScorerHyperparameters()
    units = [unit for unit, _ in samples]
    labels = [int(bool(label)) for _, label in samples]
    _checked_training_set(units, labels)
    _validate_units(channel, units)
    featurizer = NgramFeaturizer(hyperparameters.hash_bits, hyperparameters.ngram_range)
    model = SGDClassifier(loss='log_loss',
                          penalty=None,
                          learning_rate='invscaling',
                          eta0=hyperparameters.learning_rate,
                          power_t=hyperparameters.power_t,
                          max_iter=hyperparameters.epochs,
                          tol=None,
                          shuffle=True,
                          random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', ConvergenceWarning)
        model.fit(featurizer.transform(channel, units), np.asarray(labels))
    LOGGER.info(f'Trained {channel.value} scorer on {len(units)} units ({sum(labels)} reverted).')
    return NgramScorer(channel,
                       model.coef_.ravel(),
                       model.intercept_[0],
                       hash_bits=hyperparameters.hash_bits,
                       ngram_range=hyperparameters.ngram_range,
                       population=population)


def build_title_targets(corpus, min_revisions=5):
    """Revert rate of every page with enough revisions.

    Args:
        corpus: A labeled corpus.
        min_revisions: Pages with fewer revisions are left out.

    Returns:
        A dict of (wiki_db, page_title) to the share of its revisions that were reverted.

    """
    targets = {}
    for page_key, history in corpus.pages().items():
        if any(record.is_reverted is None for record in history):
            raise PreconditionError(f'Page {page_key} lacks revert labels.')
        if len(history) >= min_revisions:
            targets[page_key] = sum(bool(record.is_reverted) for record in history) / len(history)
    LOGGER.info(f'Built title targets for {len(targets)} pages.')
    return targets


def train_title_regressor(targets, seed, hyperparameters=None, population='all'):
    """Fits a squared loss n-gram regressor of page revert rates on page titles.

    Args:
        targets: The mapping produced by build_title_targets.
        seed: The random seed of the optimizer.
        hyperparameters: ScorerHyperparameters, defaults apply if not set.
        population: The users the training revisions came from.

    Returns:
        The trained title NgramScorer.

    Raises:
        TrainingError: On empty or constant targets.

    """
    hyperparameters = hyperparameters or ScorerHyperparameters()
    items = sorted(targets.items())
    if not items:
        raise TrainingError('Cannot train the title regressor without targets.')
    values = np.asarray([value for _, value in items], dtype=np.float64)
    if np.unique(values).size < 2:
        raise TrainingError('Cannot train the title regressor on constant targets.')
    featurizer = NgramFeaturizer(hyperparameters.hash_bits, hyperparameters.ngram_range)
    model = SGDRegressor(loss='squared_error',
                         penalty=None,
                         learning_rate='invscaling',
                         eta0=hyperparameters.learning_rate,
                         power_t=hyperparameters.power_t,
                         max_iter=hyperparameters.epochs,
                         tol=None,
                         shuffle=True,
                         random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', ConvergenceWarning)
        model.fit(featurizer.transform(TextChannel.TITLE, [title for (_, title), _ in items]), values)
    LOGGER.info(f'Trained title regressor on {len(items)} pages.')
    return NgramScorer(TextChannel.TITLE,
                       model.coef_.ravel(),
                       model.intercept_[0],
                       hash_bits=hyperparameters.hash_bits,
                       ngram_range=hyperparameters.ngram_range,
                       task='regression',
                       population=population)


def pool(scores):
    """Mean and max pooling of channel scores.

    Args:
        scores: A list of ChannelScore.

    Returns:
        A PooledChannel, or None for an empty list.

    """
    if not scores:
        return None
    raw = np.asarray([score.raw for score in scores], dtype=np.float64)
    probabilities = np.asarray([score.probability for score in scores], dtype=np.float64)
    return PooledChannel(mean_raw=float(raw.mean()),
                         max_raw=float(raw.max()),
                         mean_prob=float(probabilities.mean()),
                         max_prob=float(probabilities.max()),
                         count=len(scores))


def assemble_pooled(scorers, delta, page_title):
    """Scores every channel of a delta and the page title into the pooled feature block.

    Args:
        scorers: A mapping of TextChannel to TextScorer holding all four channels.
        delta: The TextDelta of the revision.
        page_title: The title of the page.

    Returns:
        The PooledTextFeatures.

    """
    missing = [channel.value for channel in TextChannel if channel not in scorers]
    if missing:
        raise ScoringError(f'Scorers missing for channels {missing}.')
    pooled = {channel.value: pool(score_channel(scorers[channel], channel_units(delta, channel)))
              for channel in POOLED_CHANNELS}
    title_score = score_channel(scorers[TextChannel.TITLE], [page_title])[0].probability
    return PooledTextFeatures(title_score=title_score, **pooled)


def evaluate_scorer(scorer, units, labels):
    """Area under the ROC curve of a scorer on held out units.

    Args:
        scorer: The TextScorer.
        units: The channel units.
        labels: Their revert labels.

    Returns:
        The AUC of the scorer probabilities.

    """
    from .metrics import auc  # pylint: disable=import-outside-toplevel
    scores = score_channel(scorer, units)
    return auc([score.probability for score in scores], [int(bool(label)) for label in labels])


def save_scorer(scorer, path):
    """Persists an n-gram scorer as a compressed npz archive.

    Args:
        scorer: The NgramScorer.
        path: The destination file.

    Returns:
        The path written.

    """
    if not isinstance(scorer, NgramScorer):
        raise ScoringError(f'Only n-gram scorers persist to archives, got {scorer.kind}.')
    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    with open(destination, 'wb') as ofile:
        np.savez_compressed(ofile,
                            format_version=np.asarray(SCORER_FORMAT_VERSION),
                            description=np.asarray(json.dumps(scorer.describe())),
                            weights=scorer.weights,
                            bias=np.asarray(scorer.bias))
    return destination


def load_scorer(path):
    """Loads an n-gram scorer archive written by save_scorer.

    Raises:
        BundleLoadError: If the archive is unreadable or of an unsupported version.

    """
    try:
        with np.load(path, allow_pickle=False) as archive:
            version = int(archive['format_version'])
            if version > SCORER_FORMAT_VERSION:
                raise BundleLoadError(f'Scorer archive {path} has format version {version}, '
                                      f'newest supported is {SCORER_FORMAT_VERSION}.')
            description = json.loads(str(archive['description']))
            weights = archive['weights']
            bias = float(archive['bias'])
    except (OSError, KeyError, ValueError) as error:
        raise BundleLoadError(f'Scorer archive {path} cannot be loaded: {error}') from error
    return NgramScorer(description['channel'],
                       weights,
                       bias,
                       hash_bits=description['hash_bits'],
                       ngram_range=tuple(description['ngram_range']),
                       task=description.get('task', 'classification'),
                       population=description.get('population', 'all'))


def scorer_from_description(description, session=None):
    """Rebuilds a remote scorer from its description."""
    if description.get('kind') != RemoteScorer.kind:
        raise BundleLoadError(f'Cannot rebuild a scorer of kind {description.get("kind")} from a description.')
    return RemoteScorer(description['channel'],
                        description['endpoint'],
                        timeout=description.get('timeout', 10),
                        population=description.get('population', 'all'),
                        session=session)
