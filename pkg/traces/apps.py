"""AppConfig for the `traces` app (offline RTS trace parser and statistics)."""

from django.apps import AppConfig


class TracesConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "traces"
