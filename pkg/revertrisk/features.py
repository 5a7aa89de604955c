#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: features.py
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
Main code for features.

Feature layouts and the assembly of classifier input vectors from revisions.

Layout, in order: metadata, action counts, language one-hot, pooled text scores (optional) and the
user block (optional).

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .revertriskexceptions import AssemblyError, ConfigurationError
from .revisions import InterfaceFlags
from .textdiff import ACTION_KEYS, ActionCounts, DiffConfig, TextDelta, compute_action_counts, extract_delta
from .textscore import POOLED_CHANNELS, PooledTextFeatures, TextChannel, channel_units, pool, score_channel

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
LOGGER_BASENAME = '''features'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

MISSING_SENTINEL = -1.0
DEFAULT_USER_GROUPS = ('sysop', 'autoconfirmed')
FEATURE_PRESETS = {'basic': (False, False),
                   'mlm': (True, False),
                   'user': (False, True),
                   'full': (True, True)}


@dataclass(frozen=True)
class FeatureConfig:
    """Which optional feature blocks a classifier uses and how languages are encoded."""

    use_text_scores: bool = True
    use_user_features: bool = True
    languages: tuple = ()
    user_groups: tuple = DEFAULT_USER_GROUPS
    use_comment_length: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'languages', tuple(sorted(set(self.languages))))
        object.__setattr__(self, 'user_groups', tuple(self.user_groups))

    @classmethod
    def from_preset(cls, name, languages, user_groups=DEFAULT_USER_GROUPS, use_comment_length=True):
        """Builds one of the basic, mlm, user and full configurations."""
        try:
            use_text_scores, use_user_features = FEATURE_PRESETS[name]
        except KeyError:
            raise ConfigurationError(f'Unknown feature preset "{name}", '
                                     f'expected one of {sorted(FEATURE_PRESETS)}.') from None
        return cls(use_text_scores, use_user_features, tuple(languages), tuple(user_groups), use_comment_length)

    @property
    def preset(self):
        """The preset name matching the block switches."""
        return {value: key for key, value in FEATURE_PRESETS.items()}[(self.use_text_scores,
                                                                        self.use_user_features)]

    @property
    def metadata_names(self):
        """Names of the metadata block."""
        names = ['revision_text_bytes_diff', 'seconds_since_previous_revision', *InterfaceFlags.names()]
        return names + (['comment_length'] if self.use_comment_length else [])

    @property
    def language_names(self):
        """Names of the language one-hot block, unknown languages go to the last bucket."""
        return [f'lang_{language}' for language in self.languages] + ['lang_unknown']

    @property
    def user_names(self):
        """Names of the user block."""
        return ['is_anonymous'] + [f'group_{group}' for group in self.user_groups]

    def feature_names(self):
        """The full ordered layout."""
        names = self.metadata_names + list(ACTION_KEYS) + self.language_names
        if self.use_text_scores:
            names += PooledTextFeatures.feature_names()
        if self.use_user_features:
            names += self.user_names
        return names

    def to_dict(self):
        """The configuration as a json compatible dict."""
        return {'use_text_scores': self.use_text_scores,
                'use_user_features': self.use_user_features,
                'languages': list(self.languages),
                'user_groups': list(self.user_groups),
                'use_comment_length': self.use_comment_length}

    @classmethod
    def from_dict(cls, data):
        """Rebuilds a configuration written by to_dict."""
        return cls(use_text_scores=bool(data['use_text_scores']),
                   use_user_features=bool(data['use_user_features']),
                   languages=tuple(data.get('languages', ())),
                   user_groups=tuple(data.get('user_groups', DEFAULT_USER_GROUPS)),
                   use_comment_length=bool(data.get('use_comment_length', True)))


def check_layout(config, feature_names):
    """Verifies that feature names match the layout of a configuration.

    Raises:
        AssemblyError: Naming the first diverging position.

    """
    expected = config.feature_names()
    if list(feature_names) == expected:
        return
    for position, (found, wanted) in enumerate(zip(feature_names, expected)):
        if found != wanted:
            raise AssemblyError(f'Feature {position} is "{found}", the layout expects "{wanted}".')
    raise AssemblyError(f'{len(feature_names)} features found, the layout has {len(expected)}.')


def record_delta(record, diff_config=None):
    """The text delta of a revision, from its texts or its precomputed fields."""
    if record.has_texts:
        return extract_delta(record.parent_text, record.current_text, diff_config or DiffConfig())
    return record.precomputed_delta or TextDelta()


def record_actions(record, delta=None, diff_config=None):
    """The action counts of a revision, from its texts or its precomputed fields."""
    if record.has_texts:
        return compute_action_counts(record.parent_text, record.current_text, diff_config, delta=delta)
    return record.precomputed_actions or ActionCounts()


def assemble_features(record, delta, pooled, config, actions=None):
    """Assembles the classifier input vector of a revision.

    Args:
        record: The RevisionRecord.
        delta: Its TextDelta.
        pooled: PooledTextFeatures when the configuration uses text scores, None otherwise.
        config: The FeatureConfig.
        actions: Precomputed ActionCounts, derived from the record if not set.

    Returns:
        A float numpy vector following config.feature_names().

    Raises:
        AssemblyError: When pooled scores are given or missing against the configuration.

    """
    if config.use_text_scores != (pooled is not None):
        raise AssemblyError('Pooled text features must be given exactly when the configuration uses text scores.')
    actions = actions if actions is not None else record_actions(record, delta)
    seconds = record.seconds_since_previous_revision
    values = [float(record.revision_text_bytes_diff),
              MISSING_SENTINEL if seconds is None else float(seconds),
              *(float(flag) for flag in record.interface_flags.as_tuple())]
    if config.use_comment_length:
        values.append(float(len(record.event_comment or '')))
    values.extend(float(count) for count in actions.as_vector())
    one_hot = [0.0] * (len(config.languages) + 1)
    position = config.languages.index(record.wiki_db) if record.wiki_db in config.languages else -1
    one_hot[position] = 1.0
    values.extend(one_hot)
    if config.use_text_scores:
        values.extend(pooled.as_list())
    if config.use_user_features:
        groups = set(record.user_groups)
        values.append(float(record.is_anonymous))
        values.extend(float(group in groups) for group in config.user_groups)
    return np.asarray(values, dtype=np.float64)


def extract_deltas(records, diff_config=None, n_jobs=1):
    """Extracts the deltas of many revisions in parallel, in input order."""
    records = list(records)
    if n_jobs == 1 or len(records) < 2:
        return [record_delta(record, diff_config) for record in records]
    return Parallel(n_jobs=n_jobs)(delayed(record_delta)(record, diff_config) for record in records)


def pooled_batch(scorers, deltas, page_titles):
    """Pooled text features of many revisions, scoring every channel in a single batch.

    Args:
        scorers: A mapping of TextChannel to TextScorer.
        deltas: The TextDelta of every revision.
        page_titles: The page title of every revision.

    Returns:
        A list of PooledTextFeatures in input order.

    """
    per_channel = {}
    for channel in POOLED_CHANNELS:
        units_per_record = [channel_units(delta, channel) for delta in deltas]
        flat_scores = score_channel(scorers[channel], [unit for units in units_per_record for unit in units])
        pooled, offset = [], 0
        for units in units_per_record:
            pooled.append(pool(flat_scores[offset:offset + len(units)]))
            offset += len(units)
        per_channel[channel.value] = pooled
    titles = sorted(set(page_titles))
    title_scores = dict(zip(titles, (score.probability
                                     for score in score_channel(scorers[TextChannel.TITLE], titles))))
    return [PooledTextFeatures(change=per_channel['change'][index],
                               insert=per_channel['insert'][index],
                               remove=per_channel['remove'][index],
                               title_score=title_scores[title])
            for index, title in enumerate(page_titles)]


def featurize_records(records, config, scorers=None, diff_config=None, n_jobs=1):
    """Builds the feature matrix of a list of revisions.

    Args:
        records: RevisionRecord objects.
        config: The FeatureConfig.
        scorers: The channel scorers, required when the configuration uses text scores.
        diff_config: The DiffConfig of delta extraction.
        n_jobs: Parallel workers for delta extraction.

    Returns:
        A (records, features) float matrix.

    """
    records = list(records)
    if not records:
        return np.empty((0, len(config.feature_names())), dtype=np.float64)
    if config.use_text_scores and not scorers:
        raise AssemblyError('Text scorers are required by the feature configuration.')
    deltas = extract_deltas(records, diff_config, n_jobs)
    pooled = pooled_batch(scorers, deltas, [record.page_title for record in records]) if config.use_text_scores \
        else [None] * len(records)
    LOGGER.info(f'Featurizing {len(records)} records with the {config.preset} layout.')
    return np.vstack([assemble_features(record, delta, pooled_features, config,
                                        actions=record_actions(record, delta, diff_config))
                      for record, delta, pooled_features in zip(records, deltas, pooled)])
