#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: revisions.py
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
Main code for revisions.

Domain types for wiki revisions, corpus ingestion from line delimited json files and identity revert
annotation.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import hashlib
import json
import logging
import math
from collections import Counter, OrderedDict, defaultdict
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional

from .revertriskexceptions import (AnnotationError,
                                   ConfigurationError,
                                   DataError,
                                   EmptyCorpus,
                                   RecordParseError,
                                   SchemaViolation)
from .textdiff import ActionCounts, TextDelta

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
LOGGER_BASENAME = '''revisions'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

DEFAULT_REVERT_WINDOW = 10

REQUIRED_FIELDS = ('wiki_db', 'revision_id', 'revision_parent_id', 'page_title', 'event_timestamp')

TIMESTAMP_FORMATS = ('%Y-%m-%d %H:%M:%S.%f', '%Y-%m-%d %H:%M:%S')


class UserKind(Enum):
    """The kind of account behind a revision."""

    ANONYMOUS = 'anonymous'
    REGISTERED = 'registered'
    BOT = 'bot'


@dataclass(frozen=True)
class InterfaceFlags:
    """The editing interface a revision was saved from."""

    is_mobile_edit: bool = False
    is_mobile_web_edit: bool = False
    is_visualeditor: bool = False
    is_wikieditor: bool = False
    is_mobile_app_edit: bool = False
    is_android_app_edit: bool = False
    is_ios_app_edit: bool = False

    @classmethod
    def names(cls):
        """The flag names in layout order."""
        return tuple(flag.name for flag in fields(cls))

    def as_tuple(self):
        """The flag values in layout order."""
        return tuple(getattr(self, name) for name in self.names())


@dataclass(frozen=True)
class RevisionRecord:  # pylint: disable=too-many-instance-attributes
    """Models a single revision, its optional wikitext pair and its revert labels."""

    wiki_db: str
    revision_id: int
    revision_parent_id: int
    page_title: str
    event_timestamp: datetime
    event_comment: str = ''
    event_user_text: str = ''
    user_kind: UserKind = UserKind.REGISTERED
    seconds_since_previous_revision: Optional[int] = None
    revision_text_bytes_diff: int = 0
    interface_flags: InterfaceFlags = field(default_factory=InterfaceFlags)
    parent_text: Optional[str] = None
    current_text: Optional[str] = None
    is_reverted: Optional[bool] = None
    is_revert: Optional[bool] = None
    user_groups: tuple = ()
    precomputed_delta: Optional[TextDelta] = None
    precomputed_actions: Optional[ActionCounts] = None

    def __post_init__(self):
        if not self.wiki_db:
            raise SchemaViolation('wiki_db', 'empty value for field')
        if self.revision_id <= 0:
            raise SchemaViolation('revision_id', 'non positive value for field')
        if self.revision_parent_id < 0:
            raise SchemaViolation('revision_parent_id', 'negative value for field')
        if self.seconds_since_previous_revision is not None and self.seconds_since_previous_revision < 0:
            raise SchemaViolation('event_user_seconds_since_previous_revision', 'negative value for field')
        if self.has_texts:
            expected = len(self.current_text.encode('utf-8')) - len(self.parent_text.encode('utf-8'))
            if expected != self.revision_text_bytes_diff:
                raise SchemaViolation('revision_text_bytes_diff',
                                      f'value {self.revision_text_bytes_diff} disagrees with texts ({expected}) for')
        object.__setattr__(self, 'user_groups', tuple(self.user_groups))

    @property
    def is_anonymous(self):
        """True for edits without an account."""
        return self.user_kind is UserKind.ANONYMOUS

    @property
    def is_bot(self):
        """True for edits by bot accounts."""
        return self.user_kind is UserKind.BOT

    @property
    def page_key(self):
        """The identity of the page, titles in different wikis are different pages."""
        return self.wiki_db, self.page_title

    @property
    def has_texts(self):
        """True when both the parent and the current wikitext are available."""
        return self.parent_text is not None and self.current_text is not None

    @property
    def sort_key(self):
        """The corpus ordering key, ties on timestamp are ordered by revision id."""
        return self.wiki_db, self.page_title, self.event_timestamp, self.revision_id


class Corpus:
    """An ordered collection of revisions with its per language counts."""

    def __init__(self, records=(), errors=()):
        self._records = tuple(sorted(records, key=lambda record: record.sort_key))
        self.errors = tuple(errors)

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __getitem__(self, index):
        return self._records[index]

    def __repr__(self):
        return f'Corpus(records={len(self._records)}, languages={self.per_language_counts})'

    @property
    def records(self):
        """The records in corpus order."""
        return self._records

    @property
    def per_language_counts(self):
        """Number of records per wiki."""
        return dict(sorted(Counter(record.wiki_db for record in self._records).items()))

    @property
    def languages(self):
        """The wikis present in the corpus."""
        return tuple(self.per_language_counts)

    def pages(self):
        """Groups the records per page keeping corpus order.

        Returns:
            An ordered mapping of (wiki_db, page_title) to the list of its records.

        """
        grouped = OrderedDict()
        for record in self._records:
            grouped.setdefault(record.page_key, []).append(record)
        return grouped

    def filter(self, predicate):
        """A new corpus with the records the predicate accepts."""
        return Corpus(record for record in self._records if predicate(record))


def calculate_file_hash(binary_contents):
    """Calculates a hex digest of binary contents.

    Args:
        binary_contents: The binary object to calculate the hex digest of.

    Returns:
        The calculated hex digest of the binary object.

    """
    hash_object = hashlib.sha256()
    hash_object.update(binary_contents)
    return hash_object.hexdigest()


def content_digest(text):
    """The digest of the exact wikitext bytes, no normalization applied."""
    return calculate_file_hash(text.encode('utf-8'))


def parse_timestamp(value):
    """Parses the corpus timestamp formats into an aware UTC datetime.

    Args:
        value: A "YYYY-MM-DD HH:MM:SS.S" or an ISO-8601 string.

    Returns:
        The datetime in UTC.

    Raises:
        ValueError: If the value matches no supported format.

    """
    if isinstance(value, datetime):
        parsed = value
    else:
        text = str(value).strip()
        parsed = None
        for timestamp_format in TIMESTAMP_FORMATS:
            try:
                parsed = datetime.strptime(text, timestamp_format)
                break
            except ValueError:
                continue
        if parsed is None:
            parsed = datetime.fromisoformat(text.replace('Z', '+00:00'))
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _as_int(payload, name, line_number, default=None):
    value = payload.get(name, default)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return default
    if isinstance(value, bool):
        raise SchemaViolation(name, 'boolean where an integer is expected for', line_number)
    if isinstance(value, int):
        return value
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        raise SchemaViolation(name, f'invalid integer {value!r} for', line_number) from None
    if not as_float.is_integer():
        raise SchemaViolation(name, f'invalid integer {value!r} for', line_number)
    return int(as_float)


def _as_bool(payload, name, line_number, default=False):
    value = payload.get(name, default)
    if value is None:
        return default
    if value in (True, 1, '1', 'true', 'True'):
        return True
    if value in (False, 0, '0', 'false', 'False'):
        return False
    raise SchemaViolation(name, f'invalid boolean {value!r} for', line_number)


def _as_optional_text(payload, name, line_number):
    value = payload.get(name)
    if value is None or isinstance(value, str):
        return value
    raise SchemaViolation(name, 'non string value for', line_number)


def _decoded(value):
    if isinstance(value, str):
        return json.loads(value)
    return value


def _precomputed_delta(payload, line_number):
    if not any(key in payload for key in ('texts_insert', 'texts_removed', 'texts_change')):
        return None
    try:
        inserts = _decoded(payload.get('texts_insert')) or []
        removes = _decoded(payload.get('texts_removed')) or []
        changes = []
        for change in _decoded(payload.get('texts_change')) or []:
            if isinstance(change, dict):
                changes.append((change['old'], change['new']))
            else:
                old, new = change
                changes.append((old, new))
        return TextDelta(inserts=[str(text) for text in inserts],
                         removes=[str(text) for text in removes],
                         changes=[(str(old), str(new)) for old, new in changes if old != new])
    except (ValueError, TypeError, KeyError):
        LOGGER.debug(f'line {line_number}: ignoring unparseable precomputed text changes.')
        return None


def _precomputed_actions(payload, line_number):
    if 'actions' not in payload:
        return None
    try:
        actions = _decoded(payload['actions'])
        if not isinstance(actions, dict):
            raise TypeError('actions is not a mapping')
        return ActionCounts.from_flat_dict(actions)
    except (ValueError, TypeError):
        LOGGER.debug(f'line {line_number}: ignoring unparseable actions field.')
        return None


def _user_kind(payload, line_number):
    if _as_bool(payload, 'is_bot', line_number):
        return UserKind.BOT
    if _as_bool(payload, 'is_anonymous', line_number):
        return UserKind.ANONYMOUS
    return UserKind.REGISTERED


def record_from_mapping(payload, line_number=None):
    """Builds a RevisionRecord out of a decoded corpus line.

    Args:
        payload: The mapping with corpus field names.
        line_number: The line the mapping was read from, used in diagnostics.

    Returns:
        The RevisionRecord.

    Raises:
        SchemaViolation: If a required field is missing or a value is invalid.

    """
    for name in REQUIRED_FIELDS:
        if payload.get(name) is None:
            raise SchemaViolation(name, line_number=line_number)
    try:
        timestamp = parse_timestamp(payload['event_timestamp'])
    except (TypeError, ValueError):
        raise SchemaViolation('event_timestamp', 'unparseable value for', line_number) from None
    is_reverted = payload.get('revision_is_identity_reverted')
    is_revert = payload.get('is_revert')
    flags = InterfaceFlags(**{name: _as_bool(payload, name, line_number) for name in InterfaceFlags.names()})
    groups = payload.get('event_user_groups') or ()
    if isinstance(groups, str):
        groups = [group for group in groups.split(',') if group]
    try:
        return RevisionRecord(
            wiki_db=str(payload['wiki_db']),
            revision_id=_as_int(payload, 'revision_id', line_number),
            revision_parent_id=_as_int(payload, 'revision_parent_id', line_number),
            page_title=str(payload['page_title']),
            event_timestamp=timestamp,
            event_comment=str(payload.get('event_comment') or ''),
            event_user_text=str(payload.get('event_user_text_historical') or ''),
            user_kind=_user_kind(payload, line_number),
            seconds_since_previous_revision=_as_int(payload, 'event_user_seconds_since_previous_revision',
                                                    line_number),
            revision_text_bytes_diff=_as_int(payload, 'revision_text_bytes_diff', line_number, default=0),
            interface_flags=flags,
            parent_text=_as_optional_text(payload, 'parent_text', line_number),
            current_text=_as_optional_text(payload, 'current_text', line_number),
            is_reverted=None if is_reverted is None else _as_bool(payload, 'revision_is_identity_reverted',
                                                                  line_number),
            is_revert=None if is_revert is None else _as_bool(payload, 'is_revert', line_number),
            user_groups=tuple(str(group) for group in groups),
            precomputed_delta=_precomputed_delta(payload, line_number),
            precomputed_actions=_precomputed_actions(payload, line_number))
    except SchemaViolation as error:
        if error.line_number is None and line_number is not None:
            raise SchemaViolation(error.field, error.message, line_number) from None
        raise


def parse_revision_record(serialized_record, line_number=None):
    """Parses one corpus line.

    Args:
        serialized_record: A json object on a single line.
        line_number: The line number within its file, used in diagnostics.

    Returns:
        The RevisionRecord.

    Raises:
        RecordParseError: If the line is not a json object.
        SchemaViolation: If a required field is missing or invalid.

    """
    try:
        payload = json.loads(serialized_record)
    except ValueError as error:
        raise RecordParseError(f'malformed record, {error}', line_number) from None
    if not isinstance(payload, dict):
        raise RecordParseError('record is not a json object', line_number)
    return record_from_mapping(payload, line_number)


def record_to_mapping(record):
    """The corpus field mapping of a record, the inverse of record_from_mapping."""
    payload = {'wiki_db': record.wiki_db,
               'revision_id': record.revision_id,
               'revision_parent_id': record.revision_parent_id,
               'page_title': record.page_title,
               'event_timestamp': record.event_timestamp.isoformat(),
               'event_comment': record.event_comment,
               'event_user_text_historical': record.event_user_text,
               'event_user_seconds_since_previous_revision': record.seconds_since_previous_revision,
               'revision_text_bytes_diff': record.revision_text_bytes_diff,
               'is_anonymous': int(record.is_anonymous),
               'is_bot': int(record.is_bot)}
    payload.update({name: int(value) for name, value in zip(InterfaceFlags.names(),
                                                            record.interface_flags.as_tuple())})
    if record.is_reverted is not None:
        payload['revision_is_identity_reverted'] = int(record.is_reverted)
    if record.is_revert is not None:
        payload['is_revert'] = int(record.is_revert)
    if record.parent_text is not None:
        payload['parent_text'] = record.parent_text
    if record.current_text is not None:
        payload['current_text'] = record.current_text
    if record.user_groups:
        payload['event_user_groups'] = list(record.user_groups)
    if record.precomputed_delta is not None:
        payload.update({key: json.dumps(value, ensure_ascii=False)
                        for key, value in record.precomputed_delta.to_dict().items()})
    if record.precomputed_actions is not None:
        payload['actions'] = json.dumps(record.precomputed_actions.as_flat_dict())
    return payload


def serialize_revision_record(record):
    """Serializes a record to a single corpus line."""
    return json.dumps(record_to_mapping(record), ensure_ascii=False, sort_keys=True)


def _read_records(path, strict):
    records, errors = [], []
    try:
        with open(path, 'r', encoding='utf-8') as ifile:
            for line_number, line in enumerate(ifile, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(parse_revision_record(line, line_number))
                except (RecordParseError, SchemaViolation) as error:
                    if strict:
                        raise
                    LOGGER.warning(f'{path}: skipping {error}')
                    errors.append(error)
    except OSError as error:
        raise DataError(f'Corpus file "{path}" cannot be read: {error}') from None
    return records, errors


def _cap_per_language(records, cap):
    grouped = defaultdict(list)
    for record in records:
        grouped[record.wiki_db].append(record)
    kept = []
    for language, language_records in grouped.items():
        language_records.sort(key=lambda record: (record.event_timestamp, record.revision_id))
        if len(language_records) > cap:
            LOGGER.info(f'Capping {language} from {len(language_records)} to {cap} records.')
        kept.extend(language_records[:cap])
    return kept


def load_corpus(path, train_cap=None, test_cap=None, role='train', strict=False):
    """Loads a corpus from one or more line delimited json files.

    Args:
        path: A file path or an iterable of file paths (shards).
        train_cap: Maximum records per language kept for the train role, unlimited if None.
        test_cap: Maximum records per language kept for the test role, unlimited if None.
        role: Either "train" or "test", selects the cap.
        strict: If set the first malformed line aborts loading, otherwise malformed lines are skipped and
            reported on the corpus errors.

    Returns:
        The Corpus with the earliest records per language retained.

    Raises:
        DataError: If a file cannot be read.
        EmptyCorpus: If no valid record was read.

    """
    if role not in ('train', 'test'):
        raise ConfigurationError(f'Unknown corpus role "{role}", expected train or test.')
    cap = train_cap if role == 'train' else test_cap
    if cap is not None and cap <= 0:
        raise ConfigurationError(f'Corpus cap must be positive, got {cap}.')
    paths = [path] if isinstance(path, (str, Path)) else list(path)
    records, errors = [], []
    for shard in paths:
        shard_records, shard_errors = _read_records(shard, strict)
        LOGGER.info(f'Read {len(shard_records)} records from {shard}, skipped {len(shard_errors)} lines.')
        records.extend(shard_records)
        errors.extend(shard_errors)
    if not records:
        raise EmptyCorpus(f'No valid records found in {", ".join(str(shard) for shard in paths)}.')
    if cap is not None:
        records = _cap_per_language(records, cap)
    return Corpus(records, errors=errors)


def write_corpus(corpus, path):
    """Writes records as a line delimited json corpus file."""
    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    with open(destination, 'w', encoding='utf-8') as ofile:
        for record in corpus:
            ofile.write(serialize_revision_record(record))
            ofile.write('\n')
    return destination


def annotate_reverts(page_history, window=DEFAULT_REVERT_WINDOW, overwrite=False):
    """Flags identity reverts and the revisions they reverted on a single page history.

    A revision is a revert if its content equals the content of a revision at least two and at most
    window positions earlier, every revision in between is reverted. The nearest matching earlier
    revision wins. A null edit, equal to its immediate predecessor, flags nothing.

    Args:
        page_history: The timestamp ordered records of one page, all with texts.
        window: The maximum distance between the revert and the restored revision.
        overwrite: If set computed flags replace labels already present on the records.

    Returns:
        The list of records with is_revert and is_reverted set.

    Raises:
        AnnotationError: If records miss texts, belong to several pages or the window is not positive.

    """
    records = list(page_history)
    if window < 1:
        raise AnnotationError(f'Revert window must be positive, got {window}.')
    if len({record.page_key for record in records}) > 1:
        raise AnnotationError('Page history spans more than one page.')
    missing = [record.revision_id for record in records if record.current_text is None]
    if missing:
        raise AnnotationError(f'Revisions {missing} miss their wikitext.')
    digests = [content_digest(record.current_text) for record in records]
    is_revert = [False] * len(records)
    is_reverted = [False] * len(records)
    for position, digest in enumerate(digests):
        if position and digest == digests[position - 1]:
            continue
        for earlier in range(position - 2, max(-1, position - window - 1), -1):
            if digests[earlier] == digest:
                is_revert[position] = True
                for between in range(earlier + 1, position):
                    is_reverted[between] = True
                break
    annotated = []
    for record, revert, reverted in zip(records, is_revert, is_reverted):
        annotated.append(replace(record,
                                 is_revert=revert if overwrite or record.is_revert is None else record.is_revert,
                                 is_reverted=(reverted if overwrite or record.is_reverted is None
                                              else record.is_reverted)))
    return annotated


def annotate_corpus(corpus, window=DEFAULT_REVERT_WINDOW):
    """Annotates every page of a corpus, labels already present on the records win.

    Pages lacking wikitext keep their precomputed labels, their missing revert flags become False.

    Args:
        corpus: The Corpus to annotate.
        window: The revert window.

    Returns:
        The annotated Corpus.

    Raises:
        AnnotationError: If a page lacks both wikitext and precomputed labels.

    """
    annotated = []
    for page_key, history in corpus.pages().items():
        if all(record.current_text is not None for record in history):
            annotated.extend(annotate_reverts(history, window))
            continue
        if any(record.is_reverted is None for record in history):
            raise AnnotationError(f'Page {page_key} has neither wikitext nor revert labels.')
        annotated.extend(replace(record, is_revert=bool(record.is_revert)) for record in history)
    LOGGER.info(f'Annotated {len(annotated)} records, '
                f'{sum(bool(record.is_revert) for record in annotated)} reverts, '
                f'{sum(bool(record.is_reverted) for record in annotated)} reverted.')
    return Corpus(annotated)
