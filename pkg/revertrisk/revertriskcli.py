#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: revertriskcli.py
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
Main code for revertriskcli.

The command line surface, one sub command per pipeline stage plus explain, serve and synth.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import argparse
import json
import logging
import logging.config
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import coloredlogs
import pandas as pd
from terminaltables import AsciiTable
from yaspin import yaspin

from ._version import __version__ as cli_version
from .bundle import load_bundle, save_bundle
from .mediawiki import MediaWikiClient
from .pipeline import (annotate,
                       apply_filters,
                       corpus_summary,
                       evaluate_channel_scorers,
                       featurize_classifier_split,
                       ingest,
                       prepare_splits,
                       run_evaluate,
                       run_fairness,
                       train_bundles,
                       train_channel_scorers,
                       write_evaluation)
from .revertriskexceptions import (ConfigurationError,
                                   DataError,
                                   MissingRequiredArguments,
                                   MutuallyExclusiveArguments,
                                   StageError)
from .revisions import load_corpus, write_corpus
from .service import serve
from .synthetic import DEFAULT_LANGUAGES, SyntheticSpec, write_synthetic
from .textscore import save_scorer
from .validators import (OverridingArgument,
                         default_environment_variable,
                         environment_variable_boolean,
                         feature_presets,
                         get_mutually_exclusive_args,
                         non_negative_integer,
                         positive_integer,
                         valid_local_directory,
                         valid_local_file,
                         wiki_list)

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
LOGGER_BASENAME = '''revertriskcli'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FAILURE = 3


class RevertRiskArgumentParser(argparse.ArgumentParser):
    """An argument parser exiting with the usage status code on errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


@dataclass
class CommandReport:
    """The printable outcome of a command."""

    title: str
    header: list
    rows: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def table(self):
        """The report as an ascii table."""
        return AsciiTable([self.header] + [[str(value) for value in row] for row in self.rows], self.title).table


def _common_arguments():
    common = RevertRiskArgumentParser(add_help=False)
    common.add_argument('--config',
                        '-c',
                        action=default_environment_variable('REVERTRISK_CONFIG'),
                        type=valid_local_file,
                        help='The location of the pipeline configuration json file.')
    common.add_argument('--seed',
                        '-s',
                        action=default_environment_variable('REVERTRISK_SEED'),
                        type=non_negative_integer,
                        help='The seed of every random choice, overrides the configured one.')
    common.add_argument('--output',
                        '-o',
                        action=default_environment_variable('REVERTRISK_OUTPUT'),
                        help='The directory receiving the produced artifacts, overrides the configured one.')
    common.add_argument('--languages',
                        '-g',
                        action=default_environment_variable('REVERTRISK_LANGUAGES'),
                        type=wiki_list,
                        help='A list of wiki database names like "enwiki,dewiki" for the language one-hot block.')
    common.add_argument('--feature-config',
                        '-f',
                        action=default_environment_variable('REVERTRISK_FEATURE_CONFIG'),
                        type=feature_presets,
                        help='Feature presets among basic, mlm, user, full or "all". Training accepts several.')
    common.add_argument('--n-jobs',
                        '-n',
                        action=default_environment_variable('REVERTRISK_N_JOBS'),
                        type=positive_integer,
                        help='Parallel workers for text delta extraction and scorer training.')
    common.add_argument('--log-config',
                        '-l',
                        action=default_environment_variable('REVERTRISK_LOG_CONFIG'),
                        dest='logger_config',
                        help='The location of the logging config json file')
    common.add_argument('--log-level',
                        '-L',
                        help='Provide the log level. Defaults to info.',
                        dest='log_level',
                        action=default_environment_variable('REVERTRISK_LOG_LEVEL'),
                        default='info',
                        choices=['debug',
                                 'info',
                                 'warning',
                                 'error',
                                 'critical'])
    common.add_argument('--to-json',
                        '-j',
                        action='store_true',
                        default=environment_variable_boolean(os.environ.get('REVERTRISK_TO_JSON', False)),
                        help='Return the report in json format.')
    common.add_argument('--disable-spinner',
                        '-ds',
                        action='store_true',
                        default=environment_variable_boolean(os.environ.get('REVERTRISK_DISABLE_SPINNER', False)),
                        help='If set spinner will be disabled on the CLI.')
    common.add_argument('--disable-banner',
                        '-db',
                        action='store_true',
                        default=environment_variable_boolean(os.environ.get('REVERTRISK_DISABLE_BANNER', False)),
                        help='If set banner will be disabled on the CLI.')
    return common


def _bundle_argument(parser, multiple=False, required=True):
    parser.add_argument('--bundle',
                        '-b',
                        type=valid_local_directory,
                        nargs='+' if multiple else None,
                        required=required,
                        help='The model bundle directory.' if not multiple else 'One or more model bundle directories.')


def get_parser():
    """Constructs the parser with all the arguments and returns it."""
    parser = RevertRiskArgumentParser(description='''A cli to train, evaluate, explain and serve multilingual
    revert risk models for wiki revisions.''')
    parser.add_argument('--version',
                        '-v',
                        action=OverridingArgument,
                        nargs=0,
                        help='Prints the version of the tool. If this argument is set any other argument is effectively'
                             ' disregarded. ')
    common = _common_arguments()
    commands = parser.add_subparsers(dest='command', metavar='command')
    for name, help_text in (('ingest', 'Loads the configured corpus files and reports per language counts.'),
                            ('annotate', 'Loads and annotates identity reverts.'),
                            ('filter', 'Loads, annotates and filters the corpus.'),
                            ('split', 'Splits the filtered corpus into scorer, classifier and test corpora.'),
                            ('train-scorers', 'Trains the text scorers and reports their auc.'),
                            ('featurize', 'Writes the full feature matrix of the classifier split.'),
                            ('train', 'Trains one model bundle per feature preset.')):
        commands.add_parser(name, parents=[common], help=help_text)
    for name, help_text in (('evaluate', 'Evaluates bundles and the rule based baseline on the test corpus.'),
                            ('fairness', 'Audits bundles for disparities between anonymous and registered editors.')):
        command = commands.add_parser(name, parents=[common], help=help_text)
        _bundle_argument(command, multiple=True)
        command.add_argument('--test-corpus',
                             '-t',
                             type=valid_local_file,
                             help='A test corpus file, annotated and filtered on load, prepared from the configuration '
                                  'if not set.')
    explain = commands.add_parser('explain', parents=[common], help='Scores and explains a single revision.')
    _bundle_argument(explain)
    explain.add_argument('--lang', help='The language or wiki of a revision to fetch, like "en" or "enwiki".')
    explain.add_argument('--rev-id', type=positive_integer, help='The id of a revision to fetch.')
    explain.add_argument('--record-file',
                         '-r',
                         type=valid_local_file,
                         help='A corpus file holding the revision. Mutually exclusive with --rev-id.')
    explain.add_argument('--record-index', type=non_negative_integer, default=0,
                         help='The position of the revision within the record file, defaults to the first.')
    serve_command = commands.add_parser('serve', parents=[common], help='Runs the scoring service.')
    _bundle_argument(serve_command, required=False)
    serve_command.add_argument('--host', help='The interface to bind, overrides the configured one.')
    serve_command.add_argument('--port', type=positive_integer, help='The port to bind, overrides the configured one.')
    synth = commands.add_parser('synth', parents=[common], help='Writes a synthetic corpus and its configuration.')
    synth.add_argument('--revisions',
                       type=positive_integer,
                       default=50000,
                       help='The number of revisions to generate.')
    return parser


def get_arguments(arguments=None):
    """
    Gets us the cli arguments.

    Returns the args as parsed from the argsparser.
    """
    parser = get_parser()
    args = parser.parse_args(arguments)
    if args.version:
        parser.exit(0, f'{cli_version}\n')
    if not args.command:
        parser.error('a command is required')
    if args.command == 'explain':
        try:
            _ = get_mutually_exclusive_args(args.rev_id, args.record_file, required=True)
        except MissingRequiredArguments:
            parser.error('one of the arguments --rev-id --record-file/-r is required')
        except MutuallyExclusiveArguments:
            parser.error('arguments --rev-id --record-file/-r are mutually exclusive')
        if args.rev_id and not args.lang:
            parser.error('argument --rev-id needs --lang')
    if args.command not in ('train', 'featurize') and args.feature_config and len(args.feature_config) > 1:
        parser.error(f'argument --feature-config/-f: the {args.command} command accepts a single preset')
    return args


def setup_logging(level, config_file=None):
    """Sets up the logging.

    Args:
        level: At which level do we log
        config_file: Configuration to use

    """
    if config_file:
        try:
            with open(config_file, encoding='utf-8') as conf_file:
                configuration = json.loads(conf_file.read())
                logging.config.dictConfig(configuration)
        except ValueError:
            print(f'File "{config_file}" is not valid json, cannot continue.')
            raise SystemExit(EXIT_USAGE) from None
        except FileNotFoundError:
            print(f'File "{config_file}" does not exist or cannot be read, cannot continue.')
            raise SystemExit(EXIT_USAGE) from None
    else:
        coloredlogs.install(level=level.upper())


def run_with_spinner(text, method, log_level, disable_spinner=False):
    """If log level is not debug shows a spinner while the callable provided runs.

    Args:
        text: The waiting message.
        method: The callable to run without arguments.
        log_level: The log level as set by the user.
        disable_spinner: The spinner will be disabled while running.

    Returns:
        The result of the callable.

    """
    if all([log_level != 'debug', not disable_spinner]):
        with yaspin(text=text, color='yellow') as spinner:
            try:
                result = method()
            except Exception:
                spinner.fail('💥')
                raise
        spinner.ok('✅')
        return result
    return method()


def configuration_overrides(args):
    """The nested configuration overrides of the command line flags."""
    overrides = {}
    for name in ('seed', 'output', 'n_jobs'):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    if getattr(args, 'languages', None):
        overrides.setdefault('features', {})['languages'] = list(args.languages)
    if getattr(args, 'feature_config', None) and len(args.feature_config) == 1:
        overrides.setdefault('features', {})['preset'] = args.feature_config[0]
    service = {key: value for key, value in (('bundle_path', getattr(args, 'bundle', None)),
                                             ('host', getattr(args, 'host', None)),
                                             ('port', getattr(args, 'port', None)))
               if value is not None and args.command == 'serve'}
    if service:
        overrides['service'] = {key: str(value) if key == 'bundle_path' else value for key, value in service.items()}
    return overrides


def exit_code_for(error):
    """The process status of a failed command."""
    cause = error.cause if isinstance(error, StageError) else error
    if isinstance(cause, ConfigurationError):
        return EXIT_USAGE
    if isinstance(cause, DataError):
        return EXIT_DATA
    return EXIT_FAILURE


def _output(configuration, *parts):
    path = Path(configuration['output']).joinpath(*parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _rate(value):
    return '-' if value is None else f'{value:.3f}'


def _corpus_report(title, corpus, ledger, path):
    summary = corpus_summary(corpus)
    return CommandReport(title=title,
                         header=['Language', 'Records', 'Anonymous rate', 'Revert rate'],
                         rows=[[row['language'], row['records'], _rate(row['anonymous_rate']),
                                _rate(row['revert_rate'])] for row in summary],
                         data={'corpus': str(path),
                               'languages': summary,
                               'parse_errors': [str(error) for error in corpus.errors],
                               'stages': ledger.data})


def ingest_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Loads the configured corpus files."""
    corpus = ingest(configuration, ledger)
    path = write_corpus(corpus, _output(configuration, 'ingested.jsonl'))
    return _corpus_report('Ingested corpus', corpus, ledger, path)


def annotate_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Loads and annotates the configured corpus files."""
    corpus = annotate(ingest(configuration, ledger), configuration, ledger)
    path = write_corpus(corpus, _output(configuration, 'annotated.jsonl'))
    return _corpus_report('Annotated corpus', corpus, ledger, path)


def filter_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Loads, annotates and filters the configured corpus files."""
    corpus = apply_filters(annotate(ingest(configuration, ledger), configuration, ledger), configuration, ledger)
    path = write_corpus(corpus, _output(configuration, 'filtered.jsonl'))
    return _corpus_report('Filtered corpus', corpus, ledger, path)


def split_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Writes the scorer, classifier and test corpora."""
    splits = prepare_splits(configuration, ledger)
    rows, paths = [], {}
    for name in ('scorer_train', 'classifier_train', 'test'):
        corpus = getattr(splits, name)
        paths[name] = str(write_corpus(corpus, _output(configuration, 'splits', f'{name}.jsonl')))
        reverted = sum(bool(record.is_reverted) for record in corpus)
        rows.append([name, len(corpus), len(corpus.pages()), _rate(reverted / len(corpus))])
    return CommandReport(title='Corpus splits',
                         header=['Split', 'Records', 'Pages', 'Revert rate'],
                         rows=rows,
                         data={'splits': paths, 'stages': ledger.data})


def train_scorers_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Trains and saves the text scorers, reporting their auc on the classifier split."""
    splits = prepare_splits(configuration, ledger)
    scorers = train_channel_scorers(splits.scorer_train, configuration, ledger)
    aucs = evaluate_channel_scorers(scorers, splits.classifier_train, configuration)
    rows, descriptions = [], {}
    for channel, scorer in sorted(scorers.items(), key=lambda item: item[0].value):
        if scorer.kind != 'remote':
            save_scorer(scorer, _output(configuration, 'scorers', f'{channel.value}.npz'))
        descriptions[channel.value] = scorer.describe()
        rows.append([channel.value, scorer.kind, _rate(aucs.get(channel.value))])
    return CommandReport(title='Text scorers',
                         header=['Channel', 'Kind', 'AUC'],
                         rows=rows,
                         data={'scorers': descriptions, 'auc': aucs, 'stages': ledger.data})


def featurize_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Writes the full feature matrix and labels of the classifier split."""
    splits = prepare_splits(configuration, ledger)
    languages = sorted(set(splits.scorer_train.languages) | set(splits.classifier_train.languages))
    scorers = train_channel_scorers(splits.scorer_train, configuration, ledger)
    layout, matrix, labels = featurize_classifier_split(splits.classifier_train, scorers, configuration, languages)
    frame = pd.DataFrame(matrix, columns=layout.feature_names())
    frame['label'] = labels.astype(int)
    path = _output(configuration, 'features.csv')
    frame.to_csv(path, index=False)
    return CommandReport(title='Feature matrix',
                         header=['Records', 'Features', 'Revert rate', 'Path'],
                         rows=[[matrix.shape[0], matrix.shape[1], _rate(float(labels.mean())), path]],
                         data={'features': str(path), 'feature_names': layout.feature_names(),
                               'stages': ledger.data})


def train_command(args, configuration, ledger):
    """Trains and saves one bundle per requested feature preset."""
    bundles = train_bundles(configuration, presets=args.feature_config, ledger=ledger)
    rows, written = [], {}
    for preset, bundle in bundles.items():
        directory = _output(configuration, 'bundles', preset)
        save_bundle(bundle, directory)
        written[preset] = {'path': str(directory), 'model_version': bundle.model_version}
        rows.append([preset, bundle.model_version, bundle.ensemble.feature_count, directory])
    return CommandReport(title='Trained bundles',
                         header=['Preset', 'Model version', 'Features', 'Path'],
                         rows=rows,
                         data={'bundles': written, 'stages': ledger.data})


def _bundles(paths):
    return {Path(path).name: load_bundle(path) for path in paths}


def _test_corpus(args, configuration, ledger):
    """The test corpus file annotated and filtered like the training data, or the configured test split."""
    if not args.test_corpus:
        return prepare_splits(configuration, ledger).test
    corpus = load_corpus(args.test_corpus, role='test', strict=configuration['corpus']['strict'])
    unlabeled = sum(record.is_reverted is None for record in corpus)
    if unlabeled:
        LOGGER.info(f'Test corpus {args.test_corpus} has {unlabeled} unlabeled records, annotating reverts.')
    return apply_filters(annotate(corpus, configuration, ledger), configuration, ledger)


def evaluate_command(args, configuration, ledger):
    """Evaluates bundles and the baseline, writing the reports."""
    run = run_evaluate(_bundles(args.bundle), _test_corpus(args, configuration, ledger), configuration)
    written = write_evaluation(run, _output(configuration, 'evaluation', 'report.json').parent)
    rows = [[model, view, _rate(report.auc), _rate(report.pr_at_r75), _rate(report.f1_at_half),
             _rate(report.accuracy_at_half), _rate(report.macro_f1), report.n_samples]
            for (model, view), report in sorted(run.reports.items())]
    return CommandReport(title='Evaluation',
                         header=['Model', 'View', 'AUC', 'P@R75', 'F1', 'Accuracy', 'Macro F1', 'Samples'],
                         rows=rows,
                         data=dict(run.to_dict(), files=[str(path) for path in written]))


def fairness_command(args, configuration, ledger):
    """Audits bundles and the baseline, writing the fairness report."""
    run = run_fairness(_bundles(args.bundle), _test_corpus(args, configuration, ledger), configuration)
    path = _output(configuration, 'fairness.json')
    path.write_text(json.dumps(run.to_dict(), indent=2, sort_keys=True), encoding='utf-8')
    rows = [[model, _rate(report.dir), _rate(report.dir_base), _rate(report.auc_unprivileged),
             _rate(report.auc_privileged), _rate(report.auc_difference)]
            for model, report in sorted(run.fairness.items())]
    return CommandReport(title='Fairness',
                         header=['Model', 'DIR', 'DIR base', 'AUC anonymous', 'AUC registered', 'AUC difference'],
                         rows=rows,
                         data=dict(run.to_dict(), file=str(path)))


def _explained_record(args, configuration):
    if args.record_file:
        corpus = load_corpus(args.record_file, strict=True)
        if args.record_index >= len(corpus):
            raise ConfigurationError(f'Record file {args.record_file} has no record at index {args.record_index}.')
        return corpus[args.record_index]
    service = configuration['service']
    client = MediaWikiClient(api_root=service['api_root'], timeout=service['timeout'])
    return client.fetch_revision_pair(args.lang, args.rev_id)


def explain_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Scores a single revision and lists its largest feature contributions."""
    bundle = load_bundle(args.bundle)
    record = _explained_record(args, configuration)
    result = bundle.score_record(record)
    return CommandReport(title=f'Revision {record.wiki_db}/{record.revision_id}: '
                               f'probability {result.probability:.3f}',
                         header=['Feature', 'Contribution'],
                         rows=[[name, f'{value:+.4f}'] for name, value in result.top_contributions],
                         data=result.to_dict())


def serve_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Runs the scoring service until interrupted."""
    serve(configuration)


def synth_command(args, configuration, ledger):  # pylint: disable=unused-argument
    """Writes a synthetic corpus and the configuration to train on it."""
    spec = SyntheticSpec(languages=tuple(args.languages or DEFAULT_LANGUAGES),
                         n_revisions=args.revisions,
                         seed=configuration['seed'])
    corpus_path, configuration_path = write_synthetic(spec, configuration['output'])
    return CommandReport(title='Synthetic corpus',
                         header=['Corpus', 'Configuration', 'Revisions', 'Languages'],
                         rows=[[corpus_path, configuration_path, spec.n_revisions, ','.join(spec.languages)]],
                         data={'corpus': str(corpus_path), 'configuration': str(configuration_path),
                               'revisions': spec.n_revisions, 'languages': list(spec.languages)})


COMMANDS = {'ingest': ingest_command,
            'annotate': annotate_command,
            'filter': filter_command,
            'split': split_command,
            'train-scorers': train_scorers_command,
            'featurize': featurize_command,
            'train': train_command,
            'evaluate': evaluate_command,
            'fairness': fairness_command,
            'explain': explain_command,
            'serve': serve_command,
            'synth': synth_command}
