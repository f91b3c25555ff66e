"""AppConfig for the `evidence` app (ledger of acquisitions, diffs and traces)."""

from django.apps import AppConfig


class EvidenceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "evidence"
    verbose_name = "Evidence ledger"
