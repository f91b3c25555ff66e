"""
Diff table tests.

What these tests verify
-----------------------
- 25,794,969 differing bytes of 2 GiB format as "24.6 MiB" and "1.2 %".
- An all-zero report formats as "0.0 MiB" and "0.0 %".
- Six reports give six body rows; JSON carries {pairs: [{a, b, pages, bytes, proportion}]}.
- Rounding is half-up.
"""

from __future__ import annotations

import json

import numpy as np
from django.test import SimpleTestCase

from diffing.engine import DiffReport
from diffing.tables import format_mib, format_percent, format_table, report_to_json

TWO_GIB = 2 * 1024 ** 3


def _report(a: str, b: str, pages: int, n_bytes: int, total: int = TWO_GIB) -> DiffReport:
    return DiffReport(a, b, pages, n_bytes, total, np.zeros(total // 4096, dtype=bool))


class TableTests(SimpleTestCase):
    def test_first_row_arithmetic(self):
        self.assertEqual(format_mib(25794969), "24.6 MiB")
        self.assertEqual(format_percent(25794969, TWO_GIB), "1.2 %")
        row = format_table([_report("Q1", "Q2", 8143, 25794969)]).splitlines()[1]
        self.assertEqual(row.split(), ["1", "Q1", "Q2", "8143", "24.6", "MiB", "1.2", "%"])

    def test_zero_report(self):
        row = format_table([_report("Q1", "Q1", 0, 0)]).splitlines()[1]
        self.assertEqual(row.split()[-5:], ["0", "0.0", "MiB", "0.0", "%"])

    def test_half_up(self):
        self.assertEqual(format_mib(262144), "0.3 MiB")
        self.assertEqual(format_percent(25, 10000), "0.3 %")
        self.assertEqual(format_percent(5, 10000), "0.1 %")
        self.assertEqual(format_percent(1, 0), "0.0 %")

    def test_six_rows_and_json(self):
        labels = ("Q1", "Q2", "UF", "Q3")
        pairs = [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]]
        reports = [_report(a, b, i, i * 10, 4096 * 4) for i, (a, b) in enumerate(pairs)]
        lines = format_table(reports).splitlines()
        self.assertEqual(len(lines), 7)
        self.assertTrue(lines[0].startswith("#"))
        self.assertIn("Total Pages", lines[0])
        data = json.loads(report_to_json(reports))
        self.assertEqual(len(data["pairs"]), 6)
        self.assertEqual(data["pairs"][3], {"a": "Q2", "b": "UF", "pages": 3, "bytes": 30, "proportion": 30 / 16384, "total_bytes": 16384})
