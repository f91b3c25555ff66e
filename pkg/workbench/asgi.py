"""ASGI entry point for the evidence ledger API."""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "workbench.settings.prod")

application = get_asgi_application()
