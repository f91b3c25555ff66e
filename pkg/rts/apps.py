"""AppConfig for the `rts` app (runtime-service table, hooks, tracer, scenarios)."""

from django.apps import AppConfig


class RtsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "rts"
    verbose_name = "Runtime services"
