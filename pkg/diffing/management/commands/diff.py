"""
Pairwise diff of raw dumps.

Usage
-----
    python manage.py diff Q1=out/Q1.raw Q2=out/Q2.raw UF=out/UF.raw Q3=out/Q3.raw
    python manage.py diff a.raw b.raw --json --out reports/

Each dump is `LABEL=path` or a bare path (labelled by its file name). Pairs
come out in input order: with four dumps, Q1Q2, Q1UF, Q1Q3, Q2UF, Q2Q3, UFQ3.
With `--out`, `report.json` and `table.txt` are written there as well.
"""

from __future__ import annotations

from pathlib import Path

from core.commands import WorkbenchCommand
from diffing.engine import pairwise_report
from diffing.tables import format_table, report_to_json, reports_to_dict
from evidence.ledger import record_diff_run


def parse_dump_arg(text: str) -> tuple[str, Path]:
    label, sep, path = text.partition("=")
    if sep and label:
        return label, Path(path)
    path = Path(text)
    return path.name.removesuffix(".raw"), path


class Command(WorkbenchCommand):
    help = "Compare raw dumps pairwise (pages and bytes differing)."

    def add_command_arguments(self, parser):
        parser.add_argument("dumps", nargs="+", help="LABEL=path or path, at least two.")
        parser.add_argument("--workers", type=int, default=None, help="Threads (default: DIFF_WORKERS).")
        parser.add_argument("--chunk-pages", type=int, default=None, help="Pages per chunk (default: DIFF_CHUNK_PAGES).")

    def run(self, config, **options):
        dumps = [parse_dump_arg(text) for text in options["dumps"]]
        reports = pairwise_report(dumps, workers=options.get("workers"), chunk_pages=options.get("chunk_pages"))
        table = format_table(reports)
        if options.get("out"):
            config.output_dir.mkdir(parents=True, exist_ok=True)
            (config.output_dir / "report.json").write_text(report_to_json(reports) + "\n", encoding="utf-8")
            (config.output_dir / "table.txt").write_text(table + "\n", encoding="utf-8")
        record_diff_run(reports, label=" ".join(label for label, _ in dumps), output_dir=options.get("out") or "")
        self.emit(reports_to_dict(reports), table)
