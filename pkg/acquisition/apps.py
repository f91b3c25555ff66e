"""AppConfig for the `acquisition` app (agent, wire protocol, receiver)."""

from django.apps import AppConfig


class AcquisitionConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "acquisition"
