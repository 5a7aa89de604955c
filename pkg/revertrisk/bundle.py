#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: bundle.py
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
Main code for bundle.

The model bundle, the deployable unit holding the channel scorers, the tree ensemble and the feature
layout, its directory format and the single scoring path shared by the command line and the service.

A bundle directory holds::

    manifest.json
    ensemble.json
    scorers/<channel>.npz

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .features import FeatureConfig, assemble_features, check_layout, featurize_records, record_actions, record_delta
from .gbdt import TreeEnsemble
from .revertriskexceptions import AssemblyError, BundleLoadError, EnsembleLoadError
from .textdiff import DiffConfig
from .textscore import TextChannel, assemble_pooled, load_scorer, save_scorer, scorer_from_description

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
LOGGER_BASENAME = '''bundle'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

BUNDLE_SCHEMA_VERSION = 2
MANIFEST_FILE = 'manifest.json'
ENSEMBLE_FILE = 'ensemble.json'
SCORERS_DIRECTORY = 'scorers'
TOP_CONTRIBUTIONS = 10


@dataclass(frozen=True)
class ScoreResult:
    """The outcome of scoring one revision."""

    probability: float
    margin: float
    model_version: str
    feature_config: str
    top_contributions: list
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        """The result as a json compatible dict."""
        return {'probability': self.probability,
                'margin': self.margin,
                'model_version': self.model_version,
                'feature_config': self.feature_config,
                'top_contributions': [list(item) for item in self.top_contributions],
                'timings': dict(self.timings)}


def _elapsed_ms(start):
    return (time.perf_counter() - start) * 1000


class ModelBundle:
    """Models a trained revert risk model ready for scoring.

    Bundles are never mutated after construction, so one instance can serve concurrent requests.
    """

    def __init__(self,  # pylint: disable=too-many-arguments
                 scorers,
                 ensemble,
                 feature_config,
                 diff_config=None,
                 provenance=None,
                 schema_version=BUNDLE_SCHEMA_VERSION):
        self.scorers = {TextChannel(channel): scorer for channel, scorer in (scorers or {}).items()}
        self.ensemble = ensemble
        self.feature_config = feature_config
        self.diff_config = diff_config or DiffConfig()
        self.provenance = dict(provenance or {})
        self.schema_version = schema_version
        self._model_version = f'{feature_config.preset}-{hashlib.sha256(ensemble.serialize()).hexdigest()[:12]}'
        check_layout(feature_config, ensemble.feature_names)
        if feature_config.use_text_scores and set(self.scorers) != set(TextChannel):
            raise AssemblyError(f'The {feature_config.preset} layout needs scorers for every channel, got '
                                f'{sorted(channel.value for channel in self.scorers)}.')

    def __repr__(self):
        return f'ModelBundle(version={self.model_version}, features={self.feature_config.preset})'

    @property
    def languages(self):
        """The languages of the one-hot block."""
        return list(self.feature_config.languages)

    @property
    def model_version(self):
        """A stable identifier derived from the preset and the ensemble content."""
        return self._model_version

    def featurize(self, record):
        """The feature vector of a single revision."""
        delta = record_delta(record, self.diff_config)
        pooled = assemble_pooled(self.scorers, delta, record.page_title) if self.feature_config.use_text_scores \
            else None
        return assemble_features(record, delta, pooled, self.feature_config,
                                 actions=record_actions(record, delta, self.diff_config))

    def score_record(self, record, top=TOP_CONTRIBUTIONS):
        """Scores and explains a single revision.

        Args:
            record: The RevisionRecord to score.
            top: The number of contributions to report.

        Returns:
            A ScoreResult with the largest absolute contributions first.

        """
        start = time.perf_counter()
        vector = self.featurize(record)
        featurize_ms = _elapsed_ms(start)
        start = time.perf_counter()
        margin = self.ensemble.predict_margin(vector)
        probability = self.ensemble.predict_proba(vector)
        _, contributions = self.ensemble.explain(vector)
        predict_ms = _elapsed_ms(start)
        ranked = sorted(contributions.items(), key=lambda item: (-abs(item[1]), item[0]))[:top]
        return ScoreResult(probability=probability,
                           margin=margin,
                           model_version=self.model_version,
                           feature_config=self.feature_config.preset,
                           top_contributions=ranked,
                           timings={'featurize_ms': featurize_ms, 'predict_ms': predict_ms})

    def score_records(self, records, n_jobs=1):
        """Revert probabilities of many revisions, identical to scoring them one by one."""
        matrix = featurize_records(records, self.feature_config, self.scorers, self.diff_config, n_jobs)
        return self.ensemble.predict_probas(matrix)


def save_bundle(bundle, path):
    """Writes a bundle directory.

    Args:
        bundle: The ModelBundle.
        path: The destination directory, created if missing.

    Returns:
        The path of the written manifest.

    """
    directory = Path(path)
    (directory / SCORERS_DIRECTORY).mkdir(parents=True, exist_ok=True)
    scorers = {}
    for channel, scorer in sorted(bundle.scorers.items(), key=lambda item: item[0].value):
        if scorer.kind == 'remote':
            scorers[channel.value] = scorer.describe()
            continue
        relative = f'{SCORERS_DIRECTORY}/{channel.value}.npz'
        save_scorer(scorer, directory / relative)
        scorers[channel.value] = dict(scorer.describe(), file=relative)
    (directory / ENSEMBLE_FILE).write_bytes(bundle.ensemble.serialize())
    manifest = {'schema_version': BUNDLE_SCHEMA_VERSION,
                'model_version': bundle.model_version,
                'feature_config': bundle.feature_config.to_dict(),
                'diff_config': bundle.diff_config.to_dict(),
                'scorers': scorers,
                'ensemble_file': ENSEMBLE_FILE,
                'provenance': bundle.provenance}
    manifest_path = directory / MANIFEST_FILE
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding='utf-8')
    LOGGER.info(f'Saved bundle {bundle.model_version} to {directory}.')
    return manifest_path


def _migrate_manifest(manifest):
    version = manifest.get('schema_version')
    if version == 1:
        LOGGER.warning('Bundle manifest has schema version 1, migrating the feature preset to a feature config.')
        migrated = dict(manifest)
        preset = FeatureConfig.from_preset(manifest['feature_preset'], manifest.get('languages', []))
        migrated['feature_config'] = preset.to_dict()
        migrated['schema_version'] = BUNDLE_SCHEMA_VERSION
        return migrated
    if version != BUNDLE_SCHEMA_VERSION:
        raise BundleLoadError(f'Bundle schema version {version} is not supported, '
                              f'newest supported is {BUNDLE_SCHEMA_VERSION}.')
    return manifest


def load_bundle(path, session=None):
    """Loads a bundle directory written by save_bundle.

    Args:
        path: The bundle directory.
        session: Optional requests session for remote scorers.

    Returns:
        The ModelBundle.

    Raises:
        BundleLoadError: On missing files, unsupported versions or a layout mismatch.

    """
    directory = Path(path)
    try:
        manifest = json.loads((directory / MANIFEST_FILE).read_text(encoding='utf-8'))
        ensemble = TreeEnsemble.deserialize((directory / manifest.get('ensemble_file', ENSEMBLE_FILE)).read_bytes())
    except (OSError, ValueError, EnsembleLoadError) as error:
        raise BundleLoadError(f'Bundle {directory} cannot be loaded: {error}') from error
    manifest = _migrate_manifest(manifest)
    scorers = {}
    for channel, description in manifest.get('scorers', {}).items():
        if description.get('kind') == 'remote':
            scorers[channel] = scorer_from_description(description, session=session)
        else:
            scorers[channel] = load_scorer(directory / description['file'])
    try:
        bundle = ModelBundle(scorers=scorers,
                             ensemble=ensemble,
                             feature_config=FeatureConfig.from_dict(manifest['feature_config']),
                             diff_config=DiffConfig(**manifest.get('diff_config', {})),
                             provenance=manifest.get('provenance', {}),
                             schema_version=manifest['schema_version'])
    except (AssemblyError, KeyError) as error:
        raise BundleLoadError(f'Bundle {directory} is inconsistent: {error}') from error
    LOGGER.info(f'Loaded bundle {bundle.model_version} from {directory}.')
    return bundle
