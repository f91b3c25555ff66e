"""
Render the page-wise diff of two raw dumps as a PPM pixmap.

Usage
-----
    python manage.py render out/Q1.raw out/Q2.raw --output q1q2.ppm

One pixel per page, 512 pages per row, page 0 at the bottom left; blue for
equal pages, red for differing ones.
"""

from __future__ import annotations

from core.commands import WorkbenchCommand
from diffing.engine import diff
from diffing.management.commands.diff import parse_dump_arg
from diffing.render import render_diff


class Command(WorkbenchCommand):
    help = "Write the page-wise diff pixmap (P6) of two raw dumps."

    def add_command_arguments(self, parser):
        parser.add_argument("dump_a", help="LABEL=path or path.")
        parser.add_argument("dump_b", help="LABEL=path or path.")
        parser.add_argument("--output", default=None, help="Pixmap path (default: <out>/<a><b>.ppm).")

    def run(self, config, **options):
        label_a, path_a = parse_dump_arg(options["dump_a"])
        label_b, path_b = parse_dump_arg(options["dump_b"])
        report = diff(path_a, path_b, labels=(label_a, label_b))
        output = options.get("output")
        if output is None:
            config.output_dir.mkdir(parents=True, exist_ok=True)
            output = config.output_dir / f"{label_a.lower()}{label_b.lower()}.ppm"
        pixmap = render_diff(report, output)
        payload = dict(report.to_dict(), pixmap=str(output), width=pixmap.width, height=pixmap.height)
        self.emit(payload, f"{output}: {pixmap.width}x{pixmap.height}, {report.total_pages_differing} pages differ")
