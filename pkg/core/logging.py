"""
Logging helpers for session-scoped correlation.

Overview
--------
- Exposes a `contextvars.ContextVar` (`session_id_var`) that stores the id of the
  current acquisition session, pipeline run or HTTP request.
- Provides `SessionIDFilter`, a `logging.Filter` that injects `session_id` and a
  rendered `fields` suffix onto every `LogRecord` so the structured formatter
  never breaks, even for lines emitted outside any session.
- `bind_session()` is a context manager that binds a fresh (or given) id for the
  duration of a block and restores the previous value afterwards.

Usage
-----
    logger.info("dump received", extra={"event_fields": {"pages": 160}})

renders as `... message=dump received pages=160` under the structured formatter.
"""

from __future__ import annotations

import logging
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional

session_id_var: ContextVar[str] = ContextVar("session_id", default="-")


def new_session_id() -> str:
    """Compact uuid4 hex id, safe for file names and log fields."""
    return uuid.uuid4().hex


@contextmanager
def bind_session(session_id: Optional[str] = None) -> Iterator[str]:
    """Bind `session_id` (or a new one) to the current context."""
    sid = session_id or new_session_id()
    token = session_id_var.set(sid)
    try:
        yield sid
    finally:
        session_id_var.reset(token)


def _render_fields(fields: dict) -> str:
    parts = []
    for key, value in fields.items():
        text = str(value)
        if " " in text or not text:
            text = f'"{text}"'
        parts.append(f" {key}={text}")
    return "".join(parts)


class SessionIDFilter(logging.Filter):
    """
    Ensures `%(session_id)s` and `%(fields)s` are always present in log records.
    """

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "session_id"):
            record.session_id = session_id_var.get()
        if not hasattr(record, "fields"):
            record.fields = _render_fields(getattr(record, "event_fields", None) or {})
        return True
