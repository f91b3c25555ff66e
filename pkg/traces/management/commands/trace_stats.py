"""
Count traced calls per service.

Usage
-----
    python manage.py trace_stats traces/boot.log traces/login.log
    python manage.py trace_stats traces/boot.log --json

One column per log (named after its file). Malformed records are reported on
stderr and skipped; an empty log gives an all-zero column.
"""

from __future__ import annotations

from pathlib import Path

from core.commands import WorkbenchCommand
from traces.calls import reassemble_calls
from traces.parser import parse_file
from traces.stats import count_by_service, format_stats_table


def load_calls(path):
    records, issues = parse_file(path)
    calls, more = reassemble_calls(records)
    return calls, issues + more


class Command(WorkbenchCommand):
    help = "Per-service call counts of tracer logs."

    def add_command_arguments(self, parser):
        parser.add_argument("logs", nargs="+", help="Tracer log files.")

    def run(self, config, **options):
        columns = {}
        payload = {}
        for text in options["logs"]:
            path = Path(text)
            calls, issues = load_calls(path)
            stats = count_by_service(calls)
            name = path.stem
            columns[name] = stats
            payload[name] = dict(stats.to_dict(), issues=len(issues))
            for issue in issues:
                self.stderr.write(f"{path}: {issue}")
        self.emit(payload, format_stats_table(columns))
