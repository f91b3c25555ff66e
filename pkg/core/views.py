"""Core utility views (unauthenticated).

Currently exposes:
- `health`: lightweight readiness endpoint that checks ledger DB connectivity and
  that the artifact output directory is writable. Meant for load balancer and
  orchestrator readiness checks.
"""

import os

from django.conf import settings
from django.http import JsonResponse
from django.utils.timezone import now
from django.db import connection


def health(request):
    """
    Lightweight health endpoint (no auth).

    Returns:
        200 JSON when the DB is reachable; 503 JSON when a DB error is raised.
        `artifacts` reports "ok" or "unwritable" but does not change the status.
    """
    status = 200
    out_dir = settings.WORKBENCH_OUTPUT_DIR
    payload = {
        "app": "forensic-workbench",
        "time": now().isoformat(),
        "db": "ok",
        "artifacts": "ok" if (not out_dir.exists() or os.access(out_dir, os.W_OK)) else "unwritable",
    }
    try:
        connection.ensure_connection()
    except Exception as exc:  # pragma: no cover (covered by tests via mocking)
        payload["db"] = "down"
        payload["error"] = str(exc)
        status = 503
    return JsonResponse(payload, status=status)
