#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: gbdt.py
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
Main code for gbdt.

Gradient boosted decision trees for binary classification under logistic loss, with histogram split
finding over quantile bins, class weighting, versioned serialization and decision path explanations.

Missing values are encoded as NaN and routed by the learned missing direction of every split.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import json
import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, logit

from .revertriskexceptions import (ConfigurationError,
                                   EnsembleLoadError,
                                   PredictionError,
                                   TrainingError,
                                   WeightingError)

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
LOGGER_BASENAME = '''gbdt'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

ENSEMBLE_FORMAT_VERSION = 1

# Feature value marking an absent measurement, routed like NaN by missing_goes_left.
MISSING_SENTINEL = -1.0


def is_missing(values, missing_value=MISSING_SENTINEL):
    """Elementwise mask of NaN and sentinel values."""
    values = np.asarray(values, dtype=np.float64)
    mask = np.isnan(values)
    if missing_value is not None:
        mask |= values == missing_value
    return mask


@dataclass(frozen=True)
class TrainConfig:
    """Boosting hyperparameters."""

    learning_rate: float = 0.01
    n_trees: int = 200
    max_depth: int = 6
    min_child_weight: float = 1.0
    l2_lambda: float = 1.0
    n_bins: int = 64
    seed: int = 0
    missing_value: Optional[float] = MISSING_SENTINEL

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f'learning_rate must be positive, got {self.learning_rate}')
        if self.n_trees < 1:
            raise ConfigurationError(f'n_trees must be at least 1, got {self.n_trees}')
        if self.n_bins < 2:
            raise ConfigurationError(f'n_bins must be at least 2, got {self.n_bins}')
        if self.max_depth < 0 or self.min_child_weight < 0 or self.l2_lambda < 0:
            raise ConfigurationError('max_depth, min_child_weight and l2_lambda must not be negative')
        if self.missing_value is not None and (isinstance(self.missing_value, bool)
                                               or not isinstance(self.missing_value, (int, float))
                                               or np.isnan(self.missing_value)):
            raise ConfigurationError(f'missing_value must be a number or None, got {self.missing_value!r}')

    def to_dict(self):
        """The configuration as a json compatible dict."""
        return asdict(self)


@dataclass
class TreeNode:  # pylint: disable=too-many-instance-attributes
    """A node of a regression tree, a leaf when value is set."""

    value: Optional[float] = None
    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    missing_goes_left: bool = True
    left: Optional['TreeNode'] = None
    right: Optional['TreeNode'] = None
    expected_value: Optional[float] = None
    gain: float = 0.0
    cover: float = 0.0

    def __post_init__(self):
        if self.is_leaf and self.expected_value is None:
            self.expected_value = self.value

    @classmethod
    def leaf(cls, value, cover=0.0):
        """Builds a leaf."""
        return cls(value=float(value), cover=float(cover))

    @property
    def is_leaf(self):
        """Whether the node is a leaf."""
        return self.value is not None

    def goes_left(self, value, missing_value=MISSING_SENTINEL):
        """Whether a feature value is routed to the left child, missing values follow missing_goes_left."""
        if is_missing(value, missing_value):
            return self.missing_goes_left
        return value <= self.threshold

    def to_dict(self):
        """The subtree as nested dicts."""
        if self.is_leaf:
            return {'value': self.value, 'cover': self.cover}
        return {'feature_index': self.feature_index,
                'threshold': self.threshold,
                'missing_goes_left': self.missing_goes_left,
                'expected_value': self.expected_value,
                'gain': self.gain,
                'cover': self.cover,
                'left': self.left.to_dict(),
                'right': self.right.to_dict()}

    @classmethod
    def from_dict(cls, data):
        """Rebuilds a subtree from nested dicts."""
        if 'value' in data:
            return cls.leaf(data['value'], data.get('cover', 0.0))
        return cls(feature_index=int(data['feature_index']),
                   threshold=float(data['threshold']),
                   missing_goes_left=bool(data['missing_goes_left']),
                   expected_value=float(data['expected_value']),
                   gain=float(data.get('gain', 0.0)),
                   cover=float(data.get('cover', 0.0)),
                   left=cls.from_dict(data['left']),
                   right=cls.from_dict(data['right']))

    def nodes(self):
        """Yields every node of the subtree depth first."""
        yield self
        if not self.is_leaf:
            yield from self.left.nodes()
            yield from self.right.nodes()


@dataclass(frozen=True)
class SplitCandidate:
    """The best split of a node."""

    feature_index: int
    bin_index: int
    threshold: float
    missing_goes_left: bool
    gain: float


class QuantileBinner:
    """Maps feature columns to at most n_bins ordered bins plus a bin for missing values.

    Columns with at most n_bins distinct values get one bin per value, otherwise bin edges are the
    deduplicated quantiles. A value v lands in bin k when edges[k - 1] < v <= edges[k].
    """

    def __init__(self, n_bins=64, missing_value=MISSING_SENTINEL):
        self.n_bins = n_bins
        self.missing_value = missing_value
        self.edges = []

    @property
    def missing_bin(self):
        """The bin index of missing values."""
        return self.n_bins

    def fit(self, features):
        """Computes the bin edges of every column."""
        self.edges = []
        for column in np.asarray(features, dtype=np.float64).T:
            present = np.unique(column[~is_missing(column, self.missing_value)])
            if present.size <= self.n_bins:
                edges = present[:-1]
            else:
                quantiles = np.quantile(column[~is_missing(column, self.missing_value)],
                                        np.linspace(0, 1, self.n_bins + 1)[1:-1])
                edges = np.unique(quantiles)
                edges = edges[edges < present[-1]]
            self.edges.append(edges)
        return self

    def transform(self, features):
        """Bins a feature matrix, returning an integer matrix of the same shape."""
        features = np.asarray(features, dtype=np.float64)
        bins = np.empty(features.shape, dtype=np.int64)
        for index, edges in enumerate(self.edges):
            column = features[:, index]
            bins[:, index] = np.searchsorted(edges, column, side='left')
            bins[is_missing(column, self.missing_value), index] = self.missing_bin
        return bins


def _best_split(bins, gradients, hessians, edge_counts, n_bins, l2_lambda):
    """Histogram split search on a binned node, ties go to the lowest feature, threshold and left."""
    n_rows, n_features = bins.shape
    width = n_bins + 1
    flat = (bins + np.arange(n_features) * width).ravel()

    def histogram(weights):
        return np.bincount(flat, weights=weights, minlength=n_features * width).reshape(n_features, width)

    grad_hist = histogram(np.repeat(gradients, n_features))
    hess_hist = histogram(np.repeat(hessians, n_features))
    count_hist = histogram(None)
    total_grad, total_hess = gradients.sum(), hessians.sum()
    parent_score = total_grad ** 2 / (total_hess + l2_lambda)

    cum_grad = np.cumsum(grad_hist[:, :n_bins], axis=1)
    cum_hess = np.cumsum(hess_hist[:, :n_bins], axis=1)
    cum_count = np.cumsum(count_hist[:, :n_bins], axis=1)
    missing = (grad_hist[:, n_bins:], hess_hist[:, n_bins:], count_hist[:, n_bins:])

    # Direction 0 sends missing values left, direction 1 sends them right.
    left_grad = np.stack([cum_grad + missing[0], cum_grad], axis=2)
    left_hess = np.stack([cum_hess + missing[1], cum_hess], axis=2)
    left_count = np.stack([cum_count + missing[2], cum_count], axis=2)
    right_grad, right_hess, right_count = total_grad - left_grad, total_hess - left_hess, n_rows - left_count
    with np.errstate(divide='ignore', invalid='ignore'):
        gains = (left_grad ** 2 / (left_hess + l2_lambda) + right_grad ** 2 / (right_hess + l2_lambda)) - parent_score

    valid = (left_count > 0) & (right_count > 0) & np.isfinite(gains)
    valid &= (np.arange(n_bins)[None, :] < np.asarray(edge_counts)[:, None])[:, :, None]
    gains = np.where(valid, gains, -np.inf)
    best = int(np.argmax(gains))
    feature_index, bin_index, direction = np.unravel_index(best, gains.shape)
    gain = float(gains[feature_index, bin_index, direction])
    if not gain > 0:
        return None
    return int(feature_index), int(bin_index), bool(direction == 0), gain


def find_best_split(features, gradients, hessians, n_bins=64, l2_lambda=1.0,  # pylint: disable=too-many-arguments
                    missing_value=MISSING_SENTINEL):
    """Finds the best split of a single node over a raw feature matrix.

    Args:
        features: A (samples, features) matrix, NaN and missing_value mark missing values.
        gradients: First order loss derivatives per sample.
        hessians: Second order loss derivatives per sample.
        n_bins: The number of quantile bins per feature.
        l2_lambda: The leaf weight regularization.
        missing_value: The sentinel of missing values, None for NaN only.

    Returns:
        The SplitCandidate, or None when no split has a positive gain.

    """
    binner = QuantileBinner(n_bins, missing_value).fit(features)
    found = _best_split(binner.transform(features),
                        np.asarray(gradients, dtype=np.float64),
                        np.asarray(hessians, dtype=np.float64),
                        [len(edges) for edges in binner.edges],
                        n_bins,
                        l2_lambda)
    if found is None:
        return None
    feature_index, bin_index, missing_goes_left, gain = found
    return SplitCandidate(feature_index=feature_index,
                          bin_index=bin_index,
                          threshold=float(binner.edges[feature_index][bin_index]),
                          missing_goes_left=missing_goes_left,
                          gain=gain)


def _cover_weighted(left, right):
    cover = left.cover + right.cover
    if cover <= 0:
        return (left.expected_value + right.expected_value) / 2
    return (left.cover * left.expected_value + right.cover * right.expected_value) / cover


class _TreeGrower:  # pylint: disable=too-few-public-methods
    """Grows one tree depth first on binned data and applies its leaves to the training margins."""

    def __init__(self, binner, bins, config):
        self.binner = binner
        self.bins = bins
        self.config = config
        self.edge_counts = [len(edges) for edges in binner.edges]

    def grow(self, gradients, hessians, margins):
        """Returns the root of a new tree, margins are updated in place."""
        return self._grow(np.arange(self.bins.shape[0]), gradients, hessians, margins, 0)

    def _leaf(self, rows, total_grad, total_hess, margins):
        value = -self.config.learning_rate * total_grad / (total_hess + self.config.l2_lambda)
        margins[rows] += value
        return TreeNode.leaf(value, cover=total_hess)

    def _grow(self, rows, gradients, hessians, margins, depth):  # pylint: disable=too-many-arguments
        node_grad, node_hess = gradients[rows], hessians[rows]
        total_grad, total_hess = float(node_grad.sum()), float(node_hess.sum())
        if depth >= self.config.max_depth or total_hess < self.config.min_child_weight or rows.size < 2:
            return self._leaf(rows, total_grad, total_hess, margins)
        found = _best_split(self.bins[rows], node_grad, node_hess, self.edge_counts,
                            self.config.n_bins, self.config.l2_lambda)
        if found is None:
            return self._leaf(rows, total_grad, total_hess, margins)
        feature_index, bin_index, missing_goes_left, gain = found
        column = self.bins[rows, feature_index]
        to_left = np.where(column == self.binner.missing_bin, missing_goes_left, column <= bin_index)
        left = self._grow(rows[to_left], gradients, hessians, margins, depth + 1)
        right = self._grow(rows[~to_left], gradients, hessians, margins, depth + 1)
        return TreeNode(feature_index=feature_index,
                        threshold=float(self.binner.edges[feature_index][bin_index]),
                        missing_goes_left=missing_goes_left,
                        left=left,
                        right=right,
                        expected_value=_cover_weighted(left, right),
                        gain=gain,
                        cover=total_hess)


class TreeEnsemble:
    """An immutable additive ensemble of regression trees over logistic margins."""

    def __init__(self, trees, base_margin, learning_rate, feature_names, trained_config=None):
        self._trees = tuple(trees)
        self.base_margin = float(base_margin)
        self.learning_rate = float(learning_rate)
        self._feature_names = tuple(feature_names)
        self.trained_config = trained_config or TrainConfig(learning_rate=learning_rate)
        for tree in self._trees:
            for node in tree.nodes():
                if not node.is_leaf and not 0 <= node.feature_index < len(self._feature_names):
                    raise PredictionError(f'Split on feature {node.feature_index} is out of the '
                                          f'{len(self._feature_names)} known features.')

    def __repr__(self):
        return f'TreeEnsemble(trees={len(self._trees)}, features={len(self._feature_names)})'

    @property
    def missing_value(self):
        """The sentinel routed like NaN."""
        return self.trained_config.missing_value

    @property
    def trees(self):
        """The tree roots in boosting order."""
        return self._trees

    @property
    def feature_names(self):
        """The ordered feature names."""
        return list(self._feature_names)

    @property
    def feature_count(self):
        """The expected input dimension."""
        return len(self._feature_names)

    def _checked_matrix(self, features):
        matrix = np.asarray(features, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1)
        if matrix.ndim != 2 or matrix.shape[1] != self.feature_count:
            raise PredictionError(f'Expected {self.feature_count} features, got shape {np.shape(features)}.')
        return matrix

    def _route(self, node, matrix, rows, margins):  # pylint: disable=too-many-arguments
        if node.is_leaf:
            margins[rows] += node.value
            return
        column = matrix[rows, node.feature_index]
        to_left = np.where(is_missing(column, self.missing_value), node.missing_goes_left, column <= node.threshold)
        self._route(node.left, matrix, rows[to_left], margins)
        self._route(node.right, matrix, rows[~to_left], margins)

    def predict_margins(self, features, n_trees=None):
        """Margins of every row of a matrix, optionally using only the first n_trees trees."""
        matrix = self._checked_matrix(features)
        margins = np.full(matrix.shape[0], self.base_margin, dtype=np.float64)
        rows = np.arange(matrix.shape[0])
        for tree in self._trees[:n_trees]:
            self._route(tree, matrix, rows, margins)
        return margins

    def predict_margin(self, vector):
        """The margin of a single feature vector."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.ndim != 1:
            raise PredictionError(f'Expected a single vector, got shape {vector.shape}.')
        return float(self.predict_margins(vector)[0])

    def predict_probas(self, features):
        """Revert probabilities of every row of a matrix."""
        return expit(self.predict_margins(features))

    def predict_proba(self, vector):
        """The revert probability of a single feature vector."""
        return float(expit(self.predict_margin(vector)))

    def explain(self, vector):
        """Attributes a margin to the features on the decision paths.

        Every split taken moves the expected value from the node to the child, that move is credited to
        the split feature.

        Args:
            vector: A single feature vector.

        Returns:
            A tuple of the base expectation and a dict of feature name to contribution.

        """
        vector = self._checked_matrix(vector)[0]
        base_expected = self.base_margin
        contributions = {}
        for tree in self._trees:
            base_expected += tree.expected_value
            node = tree
            while not node.is_leaf:
                child = node.left if node.goes_left(vector[node.feature_index], self.missing_value) else node.right
                name = self._feature_names[node.feature_index]
                contributions[name] = contributions.get(name, 0.0) + child.expected_value - node.expected_value
                node = child
        return base_expected, contributions

    def mean_abs_contributions(self, features):
        """Mean absolute path contribution of every feature over the rows of a matrix."""
        matrix = self._checked_matrix(features)
        totals = dict.fromkeys(self._feature_names, 0.0)
        for vector in matrix:
            for name, value in self.explain(vector)[1].items():
                totals[name] += abs(value)
        rows = max(matrix.shape[0], 1)
        return {name: total / rows for name, total in totals.items()}

    def feature_importance(self):
        """Total split gain per feature normalized to sum to one."""
        gains = np.zeros(self.feature_count, dtype=np.float64)
        for tree in self._trees:
            for node in tree.nodes():
                if not node.is_leaf:
                    gains[node.feature_index] += node.gain
        total = gains.sum()
        if total > 0:
            gains = gains / total
        return dict(zip(self._feature_names, gains.tolist()))

    def to_dict(self):
        """The ensemble as a json compatible dict."""
        return {'format_version': ENSEMBLE_FORMAT_VERSION,
                'base_margin': self.base_margin,
                'learning_rate': self.learning_rate,
                'feature_names': list(self._feature_names),
                'trained_config': self.trained_config.to_dict(),
                'trees': [tree.to_dict() for tree in self._trees]}

    def serialize(self):
        """The ensemble as utf-8 json bytes."""
        return json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')

    @classmethod
    def deserialize(cls, payload):
        """Loads an ensemble written by serialize.

        Raises:
            EnsembleLoadError: On corrupt payloads and unsupported format versions.

        """
        try:
            data = json.loads(payload.decode('utf-8') if isinstance(payload, bytes) else payload)
        except (UnicodeDecodeError, ValueError) as error:
            raise EnsembleLoadError(f'Ensemble payload is not valid json: {error}') from error
        if not isinstance(data, dict):
            raise EnsembleLoadError('Ensemble payload is not an object.')
        version = data.get('format_version')
        if not isinstance(version, int) or version > ENSEMBLE_FORMAT_VERSION:
            raise EnsembleLoadError(f'Ensemble format version {version} is not supported, '
                                    f'newest supported is {ENSEMBLE_FORMAT_VERSION}.')
        try:
            return cls(trees=[TreeNode.from_dict(tree) for tree in data['trees']],
                       base_margin=data['base_margin'],
                       learning_rate=data['learning_rate'],
                       feature_names=data['feature_names'],
                       trained_config=TrainConfig(**data['trained_config']))
        except (KeyError, TypeError, ValueError, ConfigurationError, PredictionError) as error:
            raise EnsembleLoadError(f'Ensemble payload is corrupt: {error!r}') from error


def compute_class_weights(labels):
    """Weights balancing the classes, negatives keep a weight of one.

    Args:
        labels: Boolean labels.

    Returns:
        The (w_pos, w_neg) tuple.

    Raises:
        WeightingError: If a class is absent.

    """
    labels = np.asarray(labels, dtype=bool)
    positives = int(labels.sum())
    negatives = labels.size - positives
    if not positives or not negatives:
        raise WeightingError(f'Cannot weight {positives} positive and {negatives} negative labels.')
    return negatives / positives, 1.0


def weighted_logloss(margins, labels, sample_weights):
    """Weighted mean logistic loss of margins."""
    labels = np.asarray(labels, dtype=np.float64)
    losses = np.logaddexp(0.0, margins) - labels * margins
    return float(np.average(losses, weights=sample_weights))


def train(features, labels, sample_weights=None, config=None, feature_names=None):
    """Boosts a tree ensemble on the weighted logistic loss.

    Args:
        features: A (samples, features) matrix, NaN and config.missing_value mark missing values.
        labels: Boolean labels.
        sample_weights: Non negative weights, all ones if not set.
        config: The TrainConfig, defaults apply if not set.
        feature_names: Names of the columns, generated if not set.

    Returns:
        The trained TreeEnsemble.

    Raises:
        TrainingError: On degenerate input.

    """
    config = config or TrainConfig()
    matrix = np.asarray(features, dtype=np.float64)
    targets = np.asarray(labels, dtype=bool).astype(np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != targets.shape[0]:
        raise TrainingError(f'Feature matrix of shape {matrix.shape} does not fit {targets.shape[0]} labels.')
    if matrix.shape[0] < 2:
        raise TrainingError('Training needs at least two samples.')
    if np.unique(targets).size < 2:
        raise TrainingError('Training needs both classes.')
    if np.isinf(matrix).any():
        raise TrainingError('Feature values must be finite or NaN.')
    weights = np.ones_like(targets) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64)
    if weights.shape != targets.shape or (weights < 0).any() or weights.sum() <= 0:
        raise TrainingError('Sample weights must be non negative, one per sample and not all zero.')
    feature_names = list(feature_names) if feature_names is not None else [f'f{index}'
                                                                          for index in range(matrix.shape[1])]
    if len(feature_names) != matrix.shape[1]:
        raise TrainingError(f'{len(feature_names)} feature names for {matrix.shape[1]} features.')

    base_margin = float(logit(np.average(targets, weights=weights)))
    binner = QuantileBinner(config.n_bins, config.missing_value).fit(matrix)
    grower = _TreeGrower(binner, binner.transform(matrix), config)
    margins = np.full(targets.shape[0], base_margin, dtype=np.float64)
    trees = []
    for iteration in range(config.n_trees):
        probabilities = expit(margins)
        gradients = weights * (probabilities - targets)
        hessians = weights * probabilities * (1 - probabilities)
        trees.append(grower.grow(gradients, hessians, margins))
        if (iteration + 1) % 50 == 0:
            LOGGER.debug(f'Iteration {iteration + 1}: weighted logloss '
                         f'{weighted_logloss(margins, targets, weights):.6f}')
    LOGGER.info(f'Trained {len(trees)} trees on {matrix.shape[0]} samples and {matrix.shape[1]} features.')
    return TreeEnsemble(trees, base_margin, config.learning_rate, feature_names, config)
