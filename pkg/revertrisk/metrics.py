#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: metrics.py
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
Main code for metrics.

Ranking and classification metrics, per language breakdowns and the fairness audit between anonymous
and registered editors. Predictions follow the score >= threshold convention everywhere.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from scipy.stats import rankdata
from sklearn.metrics import accuracy_score, f1_score, precision_recall_curve

from .filters import undersample_balance
from .revertriskexceptions import BalanceError, MetricError

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
LOGGER_BASENAME = '''metrics'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

INFINITE_DIR = math.inf
DEFAULT_THRESHOLD = 0.5
DEFAULT_TARGET_RECALL = 0.75


@dataclass
class EvalReport:  # pylint: disable=too-many-instance-attributes
    """Metric suite of one set of predictions."""

    auc: Optional[float]
    pr_at_r75: Optional[float]
    f1_at_half: float
    accuracy_at_half: float
    macro_f1: float
    n_samples: int
    positive_rate: float
    threshold: float = DEFAULT_THRESHOLD
    f1_undefined: bool = False
    anonymous_rate: Optional[float] = None
    pr_curve: list = field(default_factory=list)
    per_language: dict = field(default_factory=dict)
    skipped_languages: list = field(default_factory=list)
    language_macro_f1: Optional[float] = None

    def to_dict(self, with_curve=True):
        """The report as a json compatible dict."""
        data = asdict(self)
        data['per_language'] = {language: report.to_dict(with_curve)
                                for language, report in sorted(self.per_language.items())}
        if not with_curve:
            data.pop('pr_curve')
        return data


@dataclass
class FairnessReport:  # pylint: disable=too-many-instance-attributes
    """Disparities between anonymous (unprivileged) and registered (privileged) editors."""

    dir: float
    dir_base: float
    auc_unprivileged: Optional[float]
    auc_privileged: Optional[float]
    auc_difference: Optional[float]
    group_counts: dict
    threshold: float = DEFAULT_THRESHOLD
    errors: list = field(default_factory=list)

    def to_dict(self):
        """The report as a json compatible dict, infinite ratios are written as the string "inf"."""
        data = asdict(self)
        for key in ('dir', 'dir_base'):
            if math.isinf(data[key]):
                data[key] = 'inf'
        return data


def _as_arrays(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise MetricError(f'{scores.size} scores for {labels.size} labels.')
    return scores, labels


def auc(scores, labels):
    """Area under the ROC curve as the Mann Whitney statistic over average ranks.

    Tied scores count one half, as in pair counting.

    Raises:
        MetricError: If a class is absent.

    """
    scores, labels = _as_arrays(scores, labels)
    positives = int(labels.sum())
    negatives = labels.size - positives
    if not positives or not negatives:
        raise MetricError(f'AUC is undefined with {positives} positive and {negatives} negative labels.')
    ranks = rankdata(scores, method='average')
    statistic = ranks[labels].sum() - positives * (positives + 1) / 2
    return float(statistic / (positives * negatives))


def pr_curve(scores, labels):
    """Precision and recall at every distinct score threshold.

    Returns:
        A list of (threshold, precision, recall) tuples in increasing threshold order.

    """
    scores, labels = _as_arrays(scores, labels)
    if not labels.any():
        raise MetricError('A precision recall curve needs at least one positive label.')
    precision, recall, thresholds = precision_recall_curve(labels, scores)
    return [(float(threshold), float(precision_value), float(recall_value))
            for threshold, precision_value, recall_value in zip(thresholds, precision, recall)]


def precision_at_recall(scores, labels, target_recall=DEFAULT_TARGET_RECALL):
    """Precision at the highest threshold whose recall reaches the target.

    Raises:
        MetricError: If there are no positive labels.

    """
    reaching = [(threshold, precision) for threshold, precision, recall in pr_curve(scores, labels)
                if recall >= target_recall]
    if not reaching:
        raise MetricError(f'No threshold reaches recall {target_recall}.')
    return max(reaching)[1]


def classification_metrics(scores, labels, threshold=DEFAULT_THRESHOLD):
    """F1, accuracy and class macro F1 of thresholded scores.

    Returns:
        A dict with f1, accuracy, macro_f1 and f1_undefined, the latter set when there are neither predicted
        nor actual positives and f1 is reported as 0.

    """
    scores, labels = _as_arrays(scores, labels)
    predictions = scores >= threshold
    return {'f1': float(f1_score(labels, predictions, zero_division=0)),
            'accuracy': float(accuracy_score(labels, predictions)) if labels.size else 0.0,
            'macro_f1': float(f1_score(labels, predictions, average='macro', labels=[False, True],
                                       zero_division=0)),
            'f1_undefined': not (predictions.any() or labels.any())}


def balanced_downsample_per_language(languages, labels, seed):
    """Balances the classes within every language by downsampling the majority class.

    Args:
        languages: The language of every sample.
        labels: The label of every sample.
        seed: The sampling seed.

    Returns:
        The sorted indices of the retained samples, languages missing a class are dropped.

    """
    labels = np.asarray(labels, dtype=bool)
    by_language = {}
    for index, language in enumerate(languages):
        by_language.setdefault(language, []).append(index)
    kept = []
    for language in sorted(by_language):
        try:
            kept.extend(undersample_balance(by_language[language], seed, label_of=labels.__getitem__))
        except BalanceError:
            LOGGER.warning(f'Dropping language {language} from the balanced set, it lacks a class.')
    return sorted(kept)


def _groups(privileged):
    privileged = np.asarray(privileged, dtype=bool)
    if privileged.all() or not privileged.any():
        raise MetricError('Both the privileged and the unprivileged group must be present.',
                          group='privileged' if not privileged.any() else 'unprivileged')
    return privileged


def disparate_impact_ratio(scores, privileged, threshold=DEFAULT_THRESHOLD):
    """Ratio of the flag rate of unprivileged to privileged editors.

    Args:
        scores: Predicted probabilities.
        privileged: True for registered editors, False for anonymous ones.
        threshold: Scores at or above it are flagged.

    Returns:
        The ratio, INFINITE_DIR when no privileged editor is flagged.

    """
    scores = np.asarray(scores, dtype=np.float64)
    privileged = _groups(privileged)
    flagged = scores >= threshold
    privileged_rate = flagged[privileged].mean()
    if privileged_rate == 0:
        return INFINITE_DIR
    return float(flagged[~privileged].mean() / privileged_rate)


def base_disparate_impact_ratio(labels, privileged):
    """The disparate impact ratio of the true labels."""
    return disparate_impact_ratio(np.asarray(labels, dtype=np.float64), privileged, threshold=0.5)


def auc_difference(scores, labels, privileged):
    """AUC among anonymous editors minus AUC among registered editors.

    Raises:
        MetricError: Naming the group whose AUC is undefined.

    """
    scores, labels = _as_arrays(scores, labels)
    privileged = _groups(privileged)
    per_group = {}
    for name, mask in (('unprivileged', ~privileged), ('privileged', privileged)):
        try:
            per_group[name] = auc(scores[mask], labels[mask])
        except MetricError as error:
            raise MetricError(f'AUC undefined for the {name} group: {error}', group=name) from error
    return per_group['unprivileged'] - per_group['privileged']


def fairness_report(scores, labels, privileged, threshold=DEFAULT_THRESHOLD):
    """Builds the FairnessReport of a prediction set, undefined AUCs are recorded as errors."""
    scores, labels = _as_arrays(scores, labels)
    privileged = _groups(privileged)
    group_aucs, errors = {}, []
    for name, mask in (('unprivileged', ~privileged), ('privileged', privileged)):
        try:
            group_aucs[name] = auc(scores[mask], labels[mask])
        except MetricError as error:
            group_aucs[name] = None
            errors.append(f'{name}: {error}')
    difference = None
    if None not in group_aucs.values():
        difference = group_aucs['unprivileged'] - group_aucs['privileged']
    return FairnessReport(dir=disparate_impact_ratio(scores, privileged, threshold),
                          dir_base=base_disparate_impact_ratio(labels, privileged),
                          auc_unprivileged=group_aucs['unprivileged'],
                          auc_privileged=group_aucs['privileged'],
                          auc_difference=difference,
                          group_counts={'unprivileged': int((~privileged).sum()),
                                        'privileged': int(privileged.sum())},
                          threshold=threshold,
                          errors=errors)


def rule_based_baseline(records):
    """Scores every anonymous revision 1.0 and every other revision 0.0."""
    scores = []
    for record in records:
        if record.is_bot:
            LOGGER.warning(f'Bot revision {record.revision_id} reached evaluation, scoring it 0.0.')
        scores.append(1.0 if record.is_anonymous else 0.0)
    return scores


def _summary(scores, labels, anonymous, threshold, target_recall):
    classification = classification_metrics(scores, labels, threshold)
    try:
        area = auc(scores, labels)
    except MetricError as error:
        LOGGER.warning(f'{error}')
        area = None
    try:
        precision = precision_at_recall(scores, labels, target_recall)
        curve = pr_curve(scores, labels)
    except MetricError as error:
        LOGGER.warning(f'{error}')
        precision, curve = None, []
    return EvalReport(auc=area,
                      pr_at_r75=precision,
                      f1_at_half=classification['f1'],
                      accuracy_at_half=classification['accuracy'],
                      macro_f1=classification['macro_f1'],
                      f1_undefined=classification['f1_undefined'],
                      n_samples=int(labels.size),
                      positive_rate=float(labels.mean()) if labels.size else 0.0,
                      anonymous_rate=float(anonymous.mean()) if anonymous is not None and anonymous.size else None,
                      threshold=threshold,
                      pr_curve=curve)


def evaluate(scores,  # pylint: disable=too-many-arguments
             labels,
             languages,
             anonymous=None,
             threshold=DEFAULT_THRESHOLD,
             target_recall=DEFAULT_TARGET_RECALL,
             min_language_samples=1):
    """Computes the metric suite overall and per language.

    Args:
        scores: Predicted probabilities.
        labels: True labels.
        languages: The wiki of every sample.
        anonymous: Optional anonymity flags, reported as per language anonymous rates.
        threshold: The decision threshold.
        target_recall: The recall of the precision at recall metric.
        min_language_samples: Languages with fewer samples are listed as skipped.

    Returns:
        The EvalReport.

    Raises:
        MetricError: On an empty prediction set.

    """
    scores, labels = _as_arrays(scores, labels)
    if not labels.size:
        raise MetricError('Cannot evaluate an empty prediction set.')
    languages = np.asarray(list(languages), dtype=object)
    anonymous = None if anonymous is None else np.asarray(anonymous, dtype=bool)
    report = _summary(scores, labels, anonymous, threshold, target_recall)
    for language in sorted(set(languages.tolist())):
        mask = languages == language
        if mask.sum() < min_language_samples:
            report.skipped_languages.append(language)
            continue
        report.per_language[language] = _summary(scores[mask],
                                                  labels[mask],
                                                  None if anonymous is None else anonymous[mask],
                                                  threshold,
                                                  target_recall)
    if report.per_language:
        report.language_macro_f1 = float(np.mean([item.f1_at_half for item in report.per_language.values()]))
    return report


def report_rows(report, model, view):
    """Flat rows of an EvalReport, one for all languages and one per language."""
    rows = []
    for language, item in [('all', report)] + sorted(report.per_language.items()):
        rows.append({'model': model,
                     'view': view,
                     'language': language,
                     'n_samples': item.n_samples,
                     'positive_rate': item.positive_rate,
                     'anonymous_rate': item.anonymous_rate,
                     'auc': item.auc,
                     'pr_at_r75': item.pr_at_r75,
                     'f1': item.f1_at_half,
                     'accuracy': item.accuracy_at_half,
                     'macro_f1': item.macro_f1})
    return rows


def report_table(reports):
    """A pandas DataFrame with one row per (model, view, language).

    Args:
        reports: A mapping of (model, view) to EvalReport.

    """
    rows = [row for (model, view), report in sorted(reports.items()) for row in report_rows(report, model, view)]
    return pd.DataFrame(rows, columns=['model', 'view', 'language', 'n_samples', 'positive_rate', 'anonymous_rate',
                                       'auc', 'pr_at_r75', 'f1', 'accuracy', 'macro_f1'])


def write_report_tables(reports, directory):
    """Writes the flat metrics table and one precision recall curve csv per (model, view).

    Returns:
        The list of written paths.

    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / 'metrics.csv']
    report_table(reports).to_csv(written[0], index=False)
    for (model, view), report in sorted(reports.items()):
        path = directory / f'pr_curve_{model}_{view}.csv'
        pd.DataFrame(report.pr_curve, columns=['threshold', 'precision', 'recall']).to_csv(path, index=False)
        written.append(path)
    return written
