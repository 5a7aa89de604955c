#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: configuration.py
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
Main code for configuration.

The pipeline configuration: defaults, the validation schema, file loading, environment overrides and the
conversion into the typed configuration objects of every module.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import copy
import json
import logging
import os
from datetime import datetime
from pathlib import Path

from schema import And, Or, Optional, Schema, SchemaError, Use

from .features import DEFAULT_USER_GROUPS, FEATURE_PRESETS, FeatureConfig
from .filters import USER_MODES, SplitSpec
from .gbdt import TrainConfig
from .revertriskexceptions import ConfigurationError
from .revisions import DEFAULT_REVERT_WINDOW, parse_timestamp
from .textdiff import DiffConfig
from .textscore import ScorerHyperparameters

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
LOGGER_BASENAME = '''configuration'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

ENVIRONMENT_PREFIX = 'REVERTRISK_'

DEFAULT_CONFIGURATION = {
    'seed': 0,
    'n_jobs': 1,
    'output': 'output',
    'corpus': {'train_path': None,
               'test_path': None,
               'train_cap_per_language': None,
               'test_cap_per_language': None,
               'strict': False},
    'annotation': {'window': DEFAULT_REVERT_WINDOW},
    'filters': {'user_mode': 'all',
                'namespace_prefixes': None},
    'split': {'train_start': '2022-01-01 00:00:00',
              'train_end': '2022-07-01 00:00:00',
              'test_end': '2022-07-08 00:00:00',
              'scorer_fraction': 0.6},
    'diff': {'sentence_match_threshold': 0.5,
             'paragraph_match_threshold': 0.4,
             'max_sentence_length': 2000},
    'scorers': {'hash_bits': 18,
                'ngram_range': [1, 3],
                'epochs': 5,
                'learning_rate': 0.1,
                'power_t': 0.5,
                'title_min_revisions': 5,
                'remote': {},
                'remote_timeout': 10},
    'classifier': {'learning_rate': 0.01,
                   'n_trees': 200,
                   'max_depth': 6,
                   'min_child_weight': 1.0,
                   'l2_lambda': 1.0,
                   'n_bins': 64},
    'features': {'preset': 'full',
                 'languages': [],
                 'user_groups': list(DEFAULT_USER_GROUPS),
                 'use_comment_length': True},
    'evaluation': {'threshold': 0.5,
                   'target_recall': 0.75,
                   'min_language_samples': 20,
                   'balance': True},
    'service': {'host': '0.0.0.0',
                'port': 8080,
                'bundle_path': None,
                'api_root': 'https://{lang}.wikipedia.org',
                'timeout': 10,
                'max_text_bytes': 2 * 1024 * 1024,
                'reload_secret': None},
}

# Environment variable name, configuration section, key and caster.
ENVIRONMENT_OVERRIDES = (('PORT', 'service', 'port', int),
                         ('BUNDLE_PATH', 'service', 'bundle_path', str),
                         ('API_ROOT', 'service', 'api_root', str),
                         ('TIMEOUT', 'service', 'timeout', float),
                         ('RELOAD_SECRET', 'service', 'reload_secret', str),
                         ('MAX_TEXT_BYTES', 'service', 'max_text_bytes', int))

fraction = And(Use(float), lambda value: 0 < value < 1)
positive_int = And(int, lambda value: value > 0)
optional_positive_int = Or(None, positive_int)
non_negative_number = And(Use(float), lambda value: value >= 0)
optional_string = Or(None, str)
timestamp = Or(datetime, And(str, Use(parse_timestamp)))

configuration_schema = Schema({
    'seed': int,
    'n_jobs': int,
    'output': str,
    'corpus': {'train_path': Or(None, str, [str]),
               'test_path': Or(None, str, [str]),
               'train_cap_per_language': optional_positive_int,
               'test_cap_per_language': optional_positive_int,
               'strict': bool},
    'annotation': {'window': positive_int},
    'filters': {'user_mode': And(str, lambda value: value in USER_MODES),
                'namespace_prefixes': Or(None, {str: [str]})},
    'split': {'train_start': timestamp,
              'train_end': timestamp,
              'test_end': timestamp,
              'scorer_fraction': fraction},
    'diff': {'sentence_match_threshold': fraction,
             'paragraph_match_threshold': fraction,
             'max_sentence_length': positive_int},
    'scorers': {'hash_bits': And(int, lambda value: 4 <= value <= 24),
                'ngram_range': And([positive_int], lambda value: len(value) == 2 and value[0] <= value[1]),
                'epochs': positive_int,
                'learning_rate': And(Use(float), lambda value: value > 0),
                'power_t': non_negative_number,
                'title_min_revisions': positive_int,
                'remote': {Optional(And(str, lambda value: value in ('change', 'insert', 'remove', 'title'))): str},
                'remote_timeout': And(Use(float), lambda value: value > 0)},
    'classifier': {'learning_rate': And(Use(float), lambda value: value > 0),
                   'n_trees': positive_int,
                   'max_depth': And(int, lambda value: value >= 0),
                   'min_child_weight': non_negative_number,
                   'l2_lambda': non_negative_number,
                   'n_bins': And(int, lambda value: value >= 2)},
    'features': {'preset': And(str, lambda value: value in FEATURE_PRESETS),
                 'languages': [str],
                 'user_groups': [str],
                 'use_comment_length': bool},
    'evaluation': {'threshold': And(Use(float), lambda value: 0 <= value <= 1),
                   'target_recall': fraction,
                   'min_language_samples': positive_int,
                   'balance': bool},
    'service': {'host': str,
                'port': And(int, lambda value: 0 < value < 65536),
                'bundle_path': optional_string,
                'api_root': And(str, lambda value: '{lang}' in value),
                'timeout': And(Use(float), lambda value: value > 0),
                'max_text_bytes': positive_int,
                'reload_secret': optional_string},
})


def deep_merge(base, overrides):
    """Merges nested dictionaries, values of overrides win."""
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key not in ('remote',
                                                                                        'namespace_prefixes'):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def environment_overrides(environment=None):
    """The configuration overrides carried by REVERTRISK_* environment variables."""
    environment = os.environ if environment is None else environment
    overrides = {}
    for name, section, key, caster in ENVIRONMENT_OVERRIDES:
        variable = f'{ENVIRONMENT_PREFIX}{name}'
        if variable not in environment:
            continue
        try:
            overrides.setdefault(section, {})[key] = caster(environment[variable])
        except ValueError:
            raise ConfigurationError(f'Environment variable {variable} holds an invalid value '
                                     f'"{environment[variable]}".') from None
    return overrides


def validate_configuration(configuration):
    """Validates a full configuration and casts its values.

    Raises:
        ConfigurationError: Naming the offending key.

    """
    try:
        validated = configuration_schema.validate(configuration)
    except SchemaError as error:
        raise ConfigurationError(f'Invalid configuration: {error.code}') from None
    split = validated['split']
    if not split['train_start'] < split['train_end'] <= split['test_end']:
        raise ConfigurationError('Invalid configuration: split windows must satisfy '
                                 'train_start < train_end <= test_end')
    diff = validated['diff']
    if diff['paragraph_match_threshold'] > diff['sentence_match_threshold']:
        raise ConfigurationError('Invalid configuration: diff.paragraph_match_threshold must not exceed '
                                 'diff.sentence_match_threshold')
    return validated


def load_configuration(path=None, overrides=None, environment=None):
    """Loads, merges and validates the pipeline configuration.

    Precedence from lowest to highest: defaults, the configuration file, environment variables and the
    explicit overrides.

    Args:
        path: An optional JSON configuration file.
        overrides: Optional nested overrides, as built from command line flags.
        environment: The environment mapping, os.environ if not set.

    Returns:
        The validated configuration dictionary.

    Raises:
        ConfigurationError: If the file cannot be read or does not validate.

    """
    configuration = copy.deepcopy(DEFAULT_CONFIGURATION)
    if path:
        try:
            file_configuration = json.loads(Path(path).read_text(encoding='utf-8'))
        except (OSError, ValueError) as error:
            raise ConfigurationError(f'Cannot read configuration file {path}: {error}') from None
        if not isinstance(file_configuration, dict):
            raise ConfigurationError(f'Configuration file {path} does not hold an object.')
        configuration = deep_merge(configuration, file_configuration)
    configuration = deep_merge(configuration, environment_overrides(environment))
    configuration = deep_merge(configuration, overrides or {})
    LOGGER.debug(f'Effective configuration: {configuration}')
    return validate_configuration(configuration)


def diff_config(configuration):
    """The DiffConfig of a validated configuration."""
    return DiffConfig(**configuration['diff'])


def split_spec(configuration):
    """The SplitSpec of a validated configuration."""
    split = configuration['split']
    return SplitSpec(train_start=split['train_start'],
                     train_end=split['train_end'],
                     test_end=split['test_end'],
                     scorer_fraction=split['scorer_fraction'],
                     seed=configuration['seed'])


def scorer_hyperparameters(configuration):
    """The ScorerHyperparameters of a validated configuration."""
    scorers = configuration['scorers']
    return ScorerHyperparameters(hash_bits=scorers['hash_bits'],
                                 ngram_range=tuple(scorers['ngram_range']),
                                 epochs=scorers['epochs'],
                                 learning_rate=scorers['learning_rate'],
                                 power_t=scorers['power_t'])


def train_config(configuration):
    """The gbdt TrainConfig of a validated configuration."""
    return TrainConfig(seed=configuration['seed'], **configuration['classifier'])


def feature_config(configuration, languages, preset=None):
    """The FeatureConfig of a validated configuration.

    Args:
        configuration: The validated configuration.
        languages: The languages of the one-hot block, the configured list wins when not empty.
        preset: A preset overriding the configured one.

    """
    features = configuration['features']
    return FeatureConfig.from_preset(preset or features['preset'],
                                     features['languages'] or languages,
                                     user_groups=features['user_groups'],
                                     use_comment_length=features['use_comment_length'])
