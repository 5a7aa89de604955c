#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: pipeline.py
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
Main code for pipeline.

End to end orchestration of training and evaluation. Every stage logs its record counts on a StageLedger
and failures surface as StageError naming the stage.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from ._version import __version__
from .bundle import ModelBundle
from .configuration import diff_config, feature_config, scorer_hyperparameters, split_spec, train_config
from .entities import StageLedger
from .features import FEATURE_PRESETS, extract_deltas, featurize_records
from .filters import (LabeledDelta,
                      filter_content,
                      filter_edit_wars,
                      filter_users,
                      single_modification_filter,
                      split_articles,
                      split_time,
                      undersample_balance)
from .gbdt import compute_class_weights, train
from .metrics import (balanced_downsample_per_language,
                      evaluate,
                      fairness_report,
                      rule_based_baseline,
                      write_report_tables)
from .revertriskexceptions import ConfigurationError, EmptyCorpus, MetricError, RevertRiskError, StageError
from .revisions import Corpus, annotate_corpus, calculate_file_hash, load_corpus
from .textscore import (POOLED_CHANNELS,
                        RemoteScorer,
                        TextChannel,
                        build_title_targets,
                        evaluate_scorer,
                        labeled_units,
                        train_scorer,
                        train_title_regressor)

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
LOGGER_BASENAME = '''pipeline'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

BASELINE_MODEL = 'rule_based'
EVALUATION_VIEWS = ('all', 'anonymous')


@dataclass
class CorpusSplits:
    """The three page disjoint corpora of a training run."""

    scorer_train: Corpus
    classifier_train: Corpus
    test: Corpus


@dataclass
class EvaluationRun:
    """Reports of every evaluated model and view."""

    reports: dict = field(default_factory=dict)
    fairness: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self):
        """The run as a json compatible dict."""
        return {'reports': {f'{model}/{view}': report.to_dict(with_curve=False)
                            for (model, view), report in sorted(self.reports.items())},
                'fairness': {model: report.to_dict() for model, report in sorted(self.fairness.items())},
                'errors': dict(sorted(self.errors.items()))}


@contextmanager
def stage(name):
    """Runs a block as a named pipeline stage, domain errors are wrapped in StageError."""
    LOGGER.debug(f'Stage {name} starting.')
    try:
        yield
    except StageError:
        raise
    except RevertRiskError as error:
        LOGGER.error(f'Stage {name} failed: {error}')
        raise StageError(name, error) from error


def _non_empty(corpus, name):
    if not len(corpus):
        raise EmptyCorpus(f'No records left after {name}.')
    return corpus


def _paths(value):
    if not value:
        return []
    return [value] if isinstance(value, str) else list(value)


def corpus_hashes(configuration):
    """The sha256 of every configured corpus file."""
    hashes = {}
    for path in _paths(configuration['corpus']['train_path']) + _paths(configuration['corpus']['test_path']):
        try:
            hashes[str(path)] = calculate_file_hash(Path(path).read_bytes())
        except OSError:
            LOGGER.warning(f'Cannot hash corpus file {path}.')
    return hashes


def ingest(configuration, ledger):
    """Loads the configured train and test corpus files into a single corpus.

    Records present in both files are kept once.
    """
    corpus_section = configuration['corpus']
    with stage('ingest'):
        if not corpus_section['train_path']:
            raise EmptyCorpus('No train corpus configured.')
        corpus = load_corpus(corpus_section['train_path'],
                             train_cap=corpus_section['train_cap_per_language'],
                             role='train',
                             strict=corpus_section['strict'])
        records, errors = list(corpus), list(corpus.errors)
        if corpus_section['test_path']:
            test_corpus = load_corpus(corpus_section['test_path'],
                                      test_cap=corpus_section['test_cap_per_language'],
                                      role='test',
                                      strict=corpus_section['strict'])
            known = {(record.wiki_db, record.revision_id) for record in records}
            records.extend(record for record in test_corpus if (record.wiki_db, record.revision_id) not in known)
            errors.extend(test_corpus.errors)
        corpus = Corpus(records, errors=errors)
        ledger.record('ingest', len(records) + len(errors), len(corpus))
    return corpus


def corpus_summary(corpus):
    """Per language record counts, anonymous rates and revert rates."""
    rows = []
    for language in corpus.languages:
        records = [record for record in corpus if record.wiki_db == language]
        labeled = [record for record in records if record.is_reverted is not None]
        rows.append({'language': language,
                     'records': len(records),
                     'anonymous_rate': sum(record.is_anonymous for record in records) / len(records),
                     'revert_rate': (sum(bool(record.is_reverted) for record in labeled) / len(labeled)
                                     if labeled else None)})
    return rows


def annotate(corpus, configuration, ledger):
    """Annotates reverts on every page."""
    with stage('annotate_reverts'):
        annotated = annotate_corpus(corpus, configuration['annotation']['window'])
        ledger.record('annotate_reverts', len(corpus), len(annotated))
    return annotated


def apply_filters(corpus, configuration, ledger):
    """Applies the content, bot and edit war filters."""
    with stage('filter_content'):
        filtered = _non_empty(filter_content(corpus, configuration['filters']['namespace_prefixes']),
                              'filter_content')
        ledger.record('filter_content', len(corpus), len(filtered), is_filter=True)
    with stage('filter_users'):
        users = _non_empty(filter_users(filtered, 'all'), 'filter_users')
        ledger.record('filter_users', len(filtered), len(users), is_filter=True)
    with stage('filter_edit_wars'):
        cleaned = _non_empty(filter_edit_wars(users, configuration['annotation']['window']), 'filter_edit_wars')
        ledger.record('filter_edit_wars', len(users), len(cleaned), is_filter=True)
    return cleaned


def split_corpus(corpus, configuration, ledger):
    """Splits a filtered corpus into page disjoint scorer, classifier and test corpora.

    Pages edited during the test window are held out of training, the configured user mode only
    restricts the training side.
    """
    spec = split_spec(configuration)
    with stage('split_time'):
        train_side, test = split_time(corpus, spec)
        _non_empty(train_side, 'split_time')
        _non_empty(test, 'split_time')
        test_pages = {record.page_key for record in test}
        train_side = _non_empty(train_side.filter(lambda record: record.page_key not in test_pages),
                                'test page hold out')
        ledger.record('split_time', len(corpus), len(train_side) + len(test))
    user_mode = configuration['filters']['user_mode']
    with stage('training_population'):
        population = _non_empty(filter_users(train_side, user_mode), 'training_population')
        ledger.record(f'training_population_{user_mode}', len(train_side), len(population))
    with stage('split_articles'):
        scorer_train, classifier_train = split_articles(population, spec.scorer_fraction, spec.seed)
        _non_empty(scorer_train, 'split_articles')
        _non_empty(classifier_train, 'split_articles')
        ledger.record('split_articles', len(population), len(scorer_train) + len(classifier_train))
    return CorpusSplits(scorer_train, classifier_train, test)


def prepare_splits(configuration, ledger=None):
    """Runs ingestion, annotation, filtering and splitting."""
    ledger = ledger if ledger is not None else StageLedger()
    corpus = ingest(configuration, ledger)
    corpus = annotate(corpus, configuration, ledger)
    corpus = apply_filters(corpus, configuration, ledger)
    return split_corpus(corpus, configuration, ledger)


def _training_population(configuration):
    return 'anonymous' if configuration['filters']['user_mode'] == 'anonymous_only' else 'all'


def _balanced_channel_units(samples, channel, seed):
    return labeled_units(undersample_balance(single_modification_filter(samples, channel), seed), channel)


def train_channel_scorers(scorer_corpus, configuration, ledger):
    """Trains the change, insert, remove and title scorers on the scorer split.

    Channels with a configured remote endpoint are not trained, a RemoteScorer is used instead.

    Returns:
        A dict of TextChannel to TextScorer.

    """
    seed = configuration['seed']
    population = _training_population(configuration)
    hyperparameters = scorer_hyperparameters(configuration)
    remote = configuration['scorers']['remote']
    scorers = {TextChannel(channel): RemoteScorer(channel, endpoint,
                                                  timeout=configuration['scorers']['remote_timeout'],
                                                  population=population)
               for channel, endpoint in remote.items()}
    with stage('train_scorers'):
        records = list(scorer_corpus)
        deltas = extract_deltas(records, diff_config(configuration), configuration['n_jobs'])
        samples = [LabeledDelta(record, delta) for record, delta in zip(records, deltas)]
        channels = [channel for channel in POOLED_CHANNELS if channel not in scorers]
        channel_units = [_balanced_channel_units(samples, channel, seed) for channel in channels]
        for channel, units in zip(channels, channel_units):
            ledger.record(f'scorer_samples_{channel.value}', len(samples), len(units))
        trained = Parallel(n_jobs=configuration['n_jobs'], prefer='threads')(
            delayed(train_scorer)(channel, units, seed, hyperparameters, population)
            for channel, units in zip(channels, channel_units))
        scorers.update(zip(channels, trained))
        if TextChannel.TITLE not in scorers:
            targets = build_title_targets(scorer_corpus, configuration['scorers']['title_min_revisions'])
            ledger.record('scorer_samples_title', len({record.page_key for record in records}), len(targets))
            scorers[TextChannel.TITLE] = train_title_regressor(targets, seed, hyperparameters, population)
    return scorers


def evaluate_channel_scorers(scorers, corpus, configuration):
    """AUC of every pooled channel scorer on the single unit samples of a held out corpus."""
    records = list(corpus)
    deltas = extract_deltas(records, diff_config(configuration), configuration['n_jobs'])
    samples = [LabeledDelta(record, delta) for record, delta in zip(records, deltas)]
    results = {}
    for channel in POOLED_CHANNELS:
        pairs = labeled_units(single_modification_filter(samples, channel), channel)
        try:
            results[channel.value] = evaluate_scorer(scorers[channel],
                                                     [unit for unit, _ in pairs],
                                                     [label for _, label in pairs])
        except MetricError as error:
            LOGGER.warning(f'Cannot evaluate the {channel.value} scorer: {error}')
            results[channel.value] = None
    return results


def _presets(presets, configuration):
    presets = list(presets or [configuration['features']['preset']])
    unknown = [preset for preset in presets if preset not in FEATURE_PRESETS]
    if unknown:
        raise ConfigurationError(f'Unknown feature presets {unknown}, expected some of {sorted(FEATURE_PRESETS)}.')
    return presets


def featurize_classifier_split(classifier_corpus, scorers, configuration, languages):
    """The full layout feature matrix and labels of the classifier split."""
    full = feature_config(configuration, languages, preset='full')
    with stage('featurize'):
        records = list(classifier_corpus)
        matrix = featurize_records(records, full, scorers, diff_config(configuration), configuration['n_jobs'])
        labels = np.asarray([bool(record.is_reverted) for record in records])
    return full, matrix, labels


def train_bundles(configuration, presets=None, ledger=None, splits=None):
    """Trains the channel scorers once and one classifier per feature preset.

    Args:
        configuration: The validated configuration.
        presets: Feature preset names, the configured preset if not set.
        ledger: A StageLedger collecting the stage counts.
        splits: Already prepared CorpusSplits, prepared from the configuration if not set.

    Returns:
        A dict of preset name to ModelBundle.

    Raises:
        StageError: Naming the failing stage and its cause.

    """
    ledger = ledger if ledger is not None else StageLedger()
    presets = _presets(presets, configuration)
    splits = splits or prepare_splits(configuration, ledger)
    languages = sorted(set(splits.scorer_train.languages) | set(splits.classifier_train.languages))
    scorers = train_channel_scorers(splits.scorer_train, configuration, ledger)
    full, matrix, labels = featurize_classifier_split(splits.classifier_train, scorers, configuration, languages)
    ledger.record('featurize', len(splits.classifier_train), matrix.shape[0])
    with stage('class_weights'):
        positive_weight, negative_weight = compute_class_weights(labels)
    weights = np.where(labels, positive_weight, negative_weight)
    provenance = {'corpus_hashes': corpus_hashes(configuration),
                  'seed': configuration['seed'],
                  'training_population': _training_population(configuration),
                  'class_weights': {'positive': positive_weight, 'negative': negative_weight},
                  'record_counts': {'scorer_train': len(splits.scorer_train),
                                    'classifier_train': len(splits.classifier_train),
                                    'test': len(splits.test)},
                  'package_version': __version__,
                  'created_at': datetime.now(timezone.utc).isoformat()}
    full_names = full.feature_names()
    bundles = {}
    for preset in presets:
        layout = feature_config(configuration, languages, preset=preset)
        columns = [full_names.index(name) for name in layout.feature_names()]
        with stage(f'train_classifier_{preset}'):
            ensemble = train(matrix[:, columns], labels, weights, train_config(configuration), layout.feature_names())
            ledger.record(f'train_classifier_{preset}', matrix.shape[0], matrix.shape[0])
        bundles[preset] = ModelBundle(scorers=scorers,
                                      ensemble=ensemble,
                                      feature_config=layout,
                                      diff_config=diff_config(configuration),
                                      provenance=dict(provenance, feature_preset=preset))
    return bundles


def run_train(configuration, preset=None, ledger=None):
    """Trains a single bundle for the configured, or the given, feature preset."""
    preset = preset or configuration['features']['preset']
    return train_bundles(configuration, [preset], ledger)[preset]


def _views(test_corpus, configuration):
    records = list(test_corpus)
    views = {'all': records, 'anonymous': [record for record in records if record.is_anonymous]}
    if not configuration['evaluation']['balance']:
        return views
    balanced = {}
    for name, view_records in views.items():
        kept = balanced_downsample_per_language([record.wiki_db for record in view_records],
                                                [bool(record.is_reverted) for record in view_records],
                                                configuration['seed'])
        balanced[name] = [view_records[index] for index in kept]
    return balanced


def _evaluate_cell(run, key, scores, records, configuration):
    evaluation = configuration['evaluation']
    try:
        run.reports[key] = evaluate(scores,
                                    [bool(record.is_reverted) for record in records],
                                    [record.wiki_db for record in records],
                                    anonymous=[record.is_anonymous for record in records],
                                    threshold=evaluation['threshold'],
                                    target_recall=evaluation['target_recall'],
                                    min_language_samples=evaluation['min_language_samples'])
    except MetricError as error:
        LOGGER.warning(f'Evaluation of {key[0]} on the {key[1]} view failed: {error}')
        run.errors[f'{key[0]}/{key[1]}'] = str(error)


def _fairness_cell(run, model, scores, records, threshold):
    try:
        run.fairness[model] = fairness_report(scores,
                                              [bool(record.is_reverted) for record in records],
                                              [not record.is_anonymous for record in records],
                                              threshold)
    except MetricError as error:
        LOGGER.warning(f'Fairness audit of {model} failed: {error}')
        run.errors[f'{model}/fairness'] = str(error)


def _models(bundles):
    models = {name: bundle.score_records for name, bundle in bundles.items()}
    models[BASELINE_MODEL] = lambda records, n_jobs=1: np.asarray(rule_based_baseline(records))
    return models


def run_evaluate(bundles, test_corpus, configuration):
    """Evaluates bundles and the rule based baseline on the all users and anonymous only views.

    Metric failures are recorded per cell and the run continues.

    Args:
        bundles: A dict of model name to ModelBundle.
        test_corpus: The labeled test Corpus.
        configuration: The validated configuration.

    Returns:
        The EvaluationRun.

    """
    with stage('evaluate'):
        _non_empty(test_corpus, 'evaluation input')
        run = EvaluationRun()
        views = _views(test_corpus, configuration)
        for model, scorer in _models(bundles).items():
            for view, records in views.items():
                if not records:
                    run.errors[f'{model}/{view}'] = 'empty view'
                    continue
                _evaluate_cell(run, (model, view), scorer(records, n_jobs=configuration['n_jobs']), records,
                               configuration)
    audit = run_fairness(bundles, test_corpus, configuration)
    run.fairness.update(audit.fairness)
    run.errors.update(audit.errors)
    return run


def run_fairness(bundles, test_corpus, configuration):
    """Audits bundles and the baseline for disparities between anonymous and registered editors.

    The audit runs on the unbalanced test corpus.
    """
    with stage('fairness'):
        records = list(_non_empty(test_corpus, 'fairness input'))
        run = EvaluationRun()
        for model, scorer in _models(bundles).items():
            _fairness_cell(run, model, scorer(records, n_jobs=configuration['n_jobs']), records,
                           configuration['evaluation']['threshold'])
    return run


def write_evaluation(run, directory):
    """Writes the evaluation report json, the flat metrics table and the precision recall curves."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / 'report.json').write_text(json.dumps(run.to_dict(), indent=2, sort_keys=True), encoding='utf-8')
    return [directory / 'report.json'] + write_report_tables(run.reports, directory)
