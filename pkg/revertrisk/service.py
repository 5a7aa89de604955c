#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: service.py
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
Main code for service.

The HTTP scoring service. Revisions are scored either by fetching them and their parent from the
MediaWiki api or from a raw payload carrying both texts.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""

import hmac
import logging
import threading
import time
from datetime import datetime, timezone
from typing import List, Optional

import uvicorn
from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ._version import __version__
from .bundle import load_bundle
from .mediawiki import MediaWikiClient, wiki_db_of
from .revertriskexceptions import (BundleLoadError,
                                   RevertRiskError,
                                   RevisionNotFound,
                                   SchemaViolation,
                                   TransportError,
                                   UnsupportedRevision,
                                   UpstreamTimeout)
from .revisions import InterfaceFlags, RevisionRecord, UserKind

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
LOGGER_BASENAME = '''service'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())

# Most specific classes first, the first isinstance match wins.
ERROR_STATUS_CODES = ((RevisionNotFound, 404),
                      (UnsupportedRevision, 422),
                      (UpstreamTimeout, 504),
                      (TransportError, 502),
                      (SchemaViolation, 400),
                      (RevertRiskError, 500))


class ScoreRequest(BaseModel):
    """A revision to fetch from the MediaWiki api and score."""

    model_config = {'extra': 'forbid'}

    lang: str = Field(..., min_length=2)
    rev_id: int = Field(..., gt=0)


class RawScoreRequest(BaseModel):
    """A revision given with both texts and its metadata."""

    model_config = {'extra': 'forbid'}

    lang: str = Field(..., min_length=2)
    parent_text: str
    current_text: str
    page_title: str = ''
    rev_id: int = Field(1, gt=0)
    parent_rev_id: int = Field(1, gt=0)
    event_comment: str = ''
    event_user_text: str = ''
    is_anonymous: bool = False
    is_bot: bool = False
    user_groups: List[str] = Field(default_factory=list)
    seconds_since_previous_revision: Optional[int] = Field(None, ge=0)
    is_mobile_edit: bool = False
    is_mobile_web_edit: bool = False
    is_visualeditor: bool = False
    is_wikieditor: bool = False
    is_mobile_app_edit: bool = False
    is_android_app_edit: bool = False
    is_ios_app_edit: bool = False

    def to_record(self):
        """The RevisionRecord of the payload, stamped with the current time."""
        if self.is_bot:
            kind = UserKind.BOT
        elif self.is_anonymous:
            kind = UserKind.ANONYMOUS
        else:
            kind = UserKind.REGISTERED
        return RevisionRecord(
            wiki_db=wiki_db_of(self.lang),
            revision_id=self.rev_id,
            revision_parent_id=self.parent_rev_id,
            page_title=self.page_title,
            event_timestamp=datetime.now(timezone.utc),
            event_comment=self.event_comment,
            event_user_text=self.event_user_text,
            user_kind=kind,
            seconds_since_previous_revision=self.seconds_since_previous_revision,
            revision_text_bytes_diff=len(self.current_text.encode('utf-8')) - len(self.parent_text.encode('utf-8')),
            interface_flags=InterfaceFlags(**{name: getattr(self, name) for name in InterfaceFlags.names()}),
            parent_text=self.parent_text,
            current_text=self.current_text,
            user_groups=tuple(self.user_groups))


class ReloadRequest(BaseModel):
    """An optional new bundle location for a reload."""

    bundle_path: Optional[str] = None


class BundleHolder:
    """Holds the served bundle, swapped atomically on reload."""

    def __init__(self, bundle=None):
        self._bundle = bundle
        self._lock = threading.Lock()

    @property
    def bundle(self):
        """The current bundle, None before the first load."""
        with self._lock:
            return self._bundle

    def swap(self, bundle):
        """Replaces the bundle and returns the previous one."""
        with self._lock:
            previous, self._bundle = self._bundle, bundle
        return previous


def _status_code(error):
    return next(code for error_type, code in ERROR_STATUS_CODES if isinstance(error, error_type))


def _initial_bundle(bundle, bundle_path, client):
    if bundle is not None or not bundle_path:
        return bundle
    try:
        return load_bundle(bundle_path, session=client.session)
    except BundleLoadError:
        LOGGER.exception(f'Could not load the bundle at {bundle_path}, serving without a model.')
        return None


def create_app(configuration, bundle=None, client=None):  # noqa: MC0001
    """Builds the scoring application.

    Args:
        configuration: The validated configuration, its service section is used.
        bundle: A loaded ModelBundle, loaded from the configured bundle path if not set.
        client: A MediaWikiClient, built from the configured api root if not set.

    Returns:
        The FastAPI application.

    """
    settings = configuration['service']
    client = client or MediaWikiClient(api_root=settings['api_root'], timeout=settings['timeout'])
    holder = BundleHolder(_initial_bundle(bundle, settings['bundle_path'], client))
    started = time.monotonic()
    app = FastAPI(title='revertrisk', version=__version__)
    app.state.holder = holder

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, error: RequestValidationError):  # pylint: disable=unused-argument
        return JSONResponse(status_code=400, content={'detail': jsonable_encoder(error.errors())})

    @app.exception_handler(RevertRiskError)
    async def domain_error(request: Request, error: RevertRiskError):
        status_code = _status_code(error)
        LOGGER.warning(f'{request.url.path} answered {status_code}: {error}')
        return JSONResponse(status_code=status_code, content={'detail': str(error),
                                                              'error': type(error).__name__})

    def current_bundle():
        current = holder.bundle
        if current is None:
            raise HTTPException(status_code=503, detail='No model bundle is loaded.')
        return current

    def respond(record, fetch_ms):
        result = current_bundle().score_record(record)
        payload = result.to_dict()
        payload['timings'] = {'fetch_ms': fetch_ms, **payload['timings']}
        return payload

    @app.post('/v1/score')
    def score(request: ScoreRequest):
        current_bundle()
        start = time.perf_counter()
        record = client.fetch_record(wiki_db_of(request.lang), request.rev_id)
        return respond(record, (time.perf_counter() - start) * 1000)

    @app.post('/v1/score:raw')
    def score_raw(request: RawScoreRequest):
        limit = settings['max_text_bytes']
        for name in ('parent_text', 'current_text'):
            size = len(getattr(request, name).encode('utf-8'))
            if size > limit:
                raise HTTPException(status_code=413, detail=f'{name} has {size} bytes, the limit is {limit}.')
        return respond(request.to_record(), 0.0)

    @app.get('/healthz')
    def healthz():
        current = holder.bundle
        payload = {'status': 'ok' if current is not None else 'unavailable',
                   'model_version': current.model_version if current is not None else None,
                   'uptime_s': time.monotonic() - started}
        return JSONResponse(status_code=200 if current is not None else 503, content=payload)

    @app.post('/admin/reload')
    def reload(request: Optional[ReloadRequest] = None,
               x_reload_secret: Optional[str] = Header(None)):
        secret = settings['reload_secret']
        if not secret:
            raise HTTPException(status_code=404, detail='Reloading is disabled.')
        if not x_reload_secret or not hmac.compare_digest(x_reload_secret, secret):
            raise HTTPException(status_code=403, detail='Invalid reload secret.')
        path = (request.bundle_path if request else None) or settings['bundle_path']
        if not path:
            raise HTTPException(status_code=400, detail='No bundle path to reload from.')
        new_bundle = load_bundle(path, session=client.session)
        previous = holder.swap(new_bundle)
        LOGGER.info(f'Reloaded bundle {new_bundle.model_version} from {path}.')
        return {'model_version': new_bundle.model_version,
                'previous_model_version': previous.model_version if previous is not None else None}

    return app


def serve(configuration):
    """Runs the scoring service until interrupted, in flight requests are drained on shutdown."""
    settings = configuration['service']
    LOGGER.info(f'Serving on {settings["host"]}:{settings["port"]}.')
    uvicorn.run(create_app(configuration), host=settings['host'], port=settings['port'], log_config=None)
