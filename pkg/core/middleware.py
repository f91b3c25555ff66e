"""
Request correlation for the evidence ledger API.

`LedgerRequestLogMiddleware` accepts a client `X-Request-ID` when it is a safe
token (otherwise a fresh session id is used), binds it as the logging session
for the request, echoes it back, and writes one `request` line with status,
latency and the authenticated user.
"""

from __future__ import annotations

import logging
import re
import time
from typing import Callable, Optional

from django.http import HttpRequest, HttpResponse

from .logging import bind_session

logger = logging.getLogger("workbench.request")

REQUEST_ID_HEADER = "X-Request-ID"
_SAFE_ID = re.compile(r"^[A-Za-z0-9._\-]{1,200}$")


def client_request_id(request: HttpRequest) -> Optional[str]:
    raw = request.headers.get(REQUEST_ID_HEADER)
    return raw if raw and _SAFE_ID.match(raw) else None


class LedgerRequestLogMiddleware:
    def __init__(self, get_response: Callable[[HttpRequest], HttpResponse]) -> None:
        self.get_response = get_response

    def __call__(self, request: HttpRequest) -> HttpResponse:
        with bind_session(client_request_id(request)) as rid:
            request.request_id = rid
            started = time.perf_counter()
            response = self.get_response(request)
            response.headers[REQUEST_ID_HEADER] = rid
            user = getattr(request, "user", None)
            logger.info(
                "request",
                extra={"event_fields": {
                    "method": request.method,
                    "path": request.path,
                    "status": response.status_code,
                    "user": user.get_username() if user is not None and user.is_authenticated else "-",
                    "ms": round((time.perf_counter() - started) * 1000, 1),
                }},
            )
        return response
