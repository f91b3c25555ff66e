"""AppConfig for the `core` app.

Scope
-----
Holds shared infrastructure pieces used across the workbench:
- logging helpers (session id filter),
- request middleware for the ledger API,
- the management command base class and pipeline config loading.
"""

from django.apps import AppConfig


class CoreConfig(AppConfig):
    """Standard Django AppConfig; keep defaults lightweight."""
    default_auto_field = "django.db.models.BigAutoField"
    name = "core"
