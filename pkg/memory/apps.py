"""AppConfig for the `memory` app (memory maps, images, reboot footprints)."""

from django.apps import AppConfig


class MemoryConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "memory"
