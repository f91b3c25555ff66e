"""
Print the pairwise diff table from a saved `report.json`.

Usage
-----
    python manage.py table artifacts/run1/report.json
"""

from __future__ import annotations

import json
from pathlib import Path

from core.commands import WorkbenchCommand
from diffing.errors import DiffError
from diffing.tables import format_table, reports_from_dict, reports_to_dict


class Command(WorkbenchCommand):
    help = "Format a diff report JSON as the pairwise table."

    def add_command_arguments(self, parser):
        parser.add_argument("report", help="report.json written by `diff` or `pipeline`.")

    def run(self, config, **options):
        path = Path(options["report"])
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DiffError(f"{path} is not valid JSON: {exc}") from None
        reports = reports_from_dict(data)
        self.emit(reports_to_dict(reports), format_table(reports))
