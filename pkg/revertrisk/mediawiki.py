#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: mediawiki.py
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
Main code for mediawiki.

A small client of the MediaWiki action api fetching a revision and its parent as a RevisionRecord.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import logging
from datetime import datetime

import requests

from ._version import __version__
from .revertriskexceptions import RevisionNotFound, TransportError, UnsupportedRevision, UpstreamTimeout
from .revisions import InterfaceFlags, RevisionRecord, UserKind, parse_timestamp

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
LOGGER_BASENAME = '''mediawiki'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

DEFAULT_API_ROOT = 'https://{lang}.wikipedia.org'
USER_AGENT = f'revertrisk/{__version__} (https://github.com/revertrisk/revertrisk)'
BOT_GROUP = 'bot'
IMPLICIT_GROUPS = ('*',)
TAG_FLAGS = {'mobile edit': 'is_mobile_edit',
             'mobile web edit': 'is_mobile_web_edit',
             'visualeditor': 'is_visualeditor',
             'wikieditor': 'is_wikieditor',
             'mobile app edit': 'is_mobile_app_edit',
             'android app edit': 'is_android_app_edit',
             'ios app edit': 'is_ios_app_edit'}


def language_of(wiki_db):
    """The language code of a wiki database name, "enwiki" gives "en"."""
    return wiki_db[:-len('wiki')] if wiki_db.endswith('wiki') else wiki_db


def wiki_db_of(lang):
    """The wiki database name of a language code, "en" gives "enwiki", database names pass through."""
    return lang if lang.endswith('wiki') else f'{lang}wiki'


def interface_flags_of(tags):
    """The interface flags set by the change tags of a revision, unknown tags are ignored."""
    return InterfaceFlags(**{TAG_FLAGS[tag]: True for tag in tags or () if tag in TAG_FLAGS})


class MediaWikiClient:
    """Fetches revisions from the MediaWiki action api."""

    def __init__(self, api_root=DEFAULT_API_ROOT, timeout=10, session=None):
        self.api_root = api_root
        self.timeout = timeout
        self.session = session or requests.Session()
        self.session.headers.update({'User-Agent': USER_AGENT})

    def _api_url(self, wiki_db):
        return f'{self.api_root.format(lang=language_of(wiki_db)).rstrip("/")}/w/api.php'

    def _query(self, wiki_db, revision_id):
        return self._get(wiki_db, {'action': 'query',
                                   'prop': 'revisions',
                                   'revids': str(revision_id),
                                   'rvprop': 'ids|timestamp|user|comment|content|size|flags|tags',
                                   'rvslots': 'main',
                                   'format': 'json',
                                   'formatversion': '2'})

    def _get(self, wiki_db, params):
        url = self._api_url(wiki_db)
        try:
            response = self.session.get(url, params=params, timeout=self.timeout)
        except requests.Timeout as error:
            raise UpstreamTimeout(f'{url} did not answer within {self.timeout}s') from error
        except requests.RequestException as error:
            raise TransportError(f'{url} unreachable: {error}') from error
        if not response.ok:
            raise TransportError(f'{url} answered with status {response.status_code}', status=response.status_code)
        try:
            return response.json()
        except ValueError as error:
            raise TransportError(f'{url} answered with invalid json', status=response.status_code) from error

    def fetch_revision(self, wiki_db, revision_id):
        """Fetches the metadata and the content of a single revision.

        Returns:
            A tuple of the page title and the revision payload of the api.

        Raises:
            RevisionNotFound: If the revision does not exist or its content is hidden.

        """
        payload = self._query(wiki_db, revision_id)
        query = payload.get('query', {})
        if query.get('badrevids'):
            raise RevisionNotFound(f'Revision {revision_id} of {wiki_db} does not exist.')
        pages = query.get('pages') or []
        if not pages or pages[0].get('missing') or not pages[0].get('revisions'):
            raise RevisionNotFound(f'Revision {revision_id} of {wiki_db} does not exist.')
        revision = pages[0]['revisions'][0]
        main = revision.get('slots', {}).get('main', {})
        if revision.get('texthidden') or main.get('texthidden') or 'content' not in main:
            raise RevisionNotFound(f'Content of revision {revision_id} of {wiki_db} is hidden.')
        return pages[0]['title'], revision

    def fetch_user_groups(self, wiki_db, user_text):
        """The explicit groups of a registered user, empty for unknown users."""
        payload = self._get(wiki_db, {'action': 'query',
                                      'list': 'users',
                                      'ususers': user_text,
                                      'usprop': 'groups',
                                      'format': 'json',
                                      'formatversion': '2'})
        users = payload.get('query', {}).get('users') or [{}]
        groups = tuple(group for group in users[0].get('groups', ()) if group not in IMPLICIT_GROUPS)
        if users[0].get('missing'):
            LOGGER.debug(f'User {user_text} of {wiki_db} is unknown, assuming no groups.')
        return groups

    def fetch_revision_pair(self, language, revision_id):
        """Fetches a revision and its parent by language code, "en", or wiki database name, "enwiki"."""
        return self.fetch_record(wiki_db_of(language), revision_id)

    def fetch_record(self, wiki_db, revision_id):
        """Fetches a revision and its parent as a RevisionRecord ready for scoring.

        Registered editors are looked up for their groups, members of the bot group become bots. Change tags
        set the interface flags.

        Raises:
            UnsupportedRevision: For page creations.

        """
        title, revision = self.fetch_revision(wiki_db, revision_id)
        parent_id = int(revision.get('parentid') or 0)
        if parent_id == 0:
            raise UnsupportedRevision(f'Revision {revision_id} of {wiki_db} creates a page.')
        _, parent = self.fetch_revision(wiki_db, parent_id)
        current_text = revision['slots']['main']['content']
        parent_text = parent['slots']['main']['content']
        timestamp = _parse_api_timestamp(revision['timestamp'])
        seconds = int((timestamp - _parse_api_timestamp(parent['timestamp'])).total_seconds())
        user_text = revision.get('user', '')
        if revision.get('anon'):
            kind, groups = UserKind.ANONYMOUS, ()
        else:
            groups = self.fetch_user_groups(wiki_db, user_text)
            kind = UserKind.BOT if BOT_GROUP in groups else UserKind.REGISTERED
        LOGGER.debug(f'Fetched revision {revision_id} of {wiki_db} with parent {parent_id}.')
        return RevisionRecord(wiki_db=wiki_db,
                              revision_id=int(revision_id),
                              revision_parent_id=parent_id,
                              page_title=title,
                              event_timestamp=timestamp,
                              event_comment=revision.get('comment', ''),
                              event_user_text=user_text,
                              user_kind=kind,
                              user_groups=groups,
                              seconds_since_previous_revision=max(seconds, 0),
                              revision_text_bytes_diff=len(current_text.encode('utf-8')) - len(
                                  parent_text.encode('utf-8')),
                              interface_flags=interface_flags_of(revision.get('tags')),
                              parent_text=parent_text,
                              current_text=current_text)


def _parse_api_timestamp(value):
    return parse_timestamp(datetime.strptime(value, '%Y-%m-%dT%H:%M:%SZ'))
