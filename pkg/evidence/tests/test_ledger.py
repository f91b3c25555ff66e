"""
Ledger writer tests.

What these tests verify
-----------------------
- Acquisitions, diff runs (with their pairs) and trace runs are stored with
  the values of the objects they record.
- With `EVIDENCE_LEDGER_ENABLED` off every writer returns None and stores nothing.
- A database failure is swallowed and logged; the writer returns None.
"""

from __future__ import annotations

from pathlib import Path
from unittest import mock

import numpy as np
from django.db import DatabaseError
from django.test import TestCase, override_settings

from acquisition.artifacts import DumpArtifact
from diffing.engine import diff
from evidence.ledger import record_acquisition, record_diff_run, record_trace_run
from evidence.models import Acquisition, DiffPair, DiffRun, TraceRun
from rts.scenarios import get_scenario, run_scenario

PAGE = 4096


def _artifact() -> DumpArtifact:
    return DumpArtifact(
        raw_dump_path=Path("/tmp/UF.raw"),
        metadata_path=Path("/tmp/UF.meta.json"),
        atomicity_window_ns=1234,
        digest_verified=True,
        name="UF",
        session_id="abc123",
        pages_received=16,
        digest="00" * 32,
    )


def _reports():
    a = np.zeros(4 * PAGE, dtype=np.uint8)
    b = a.copy()
    b[PAGE + 1] = 1
    c = b.copy()
    c[3 * PAGE:] = 7
    return [diff(a, b, labels=("Q1", "Q2")), diff(b, c, labels=("Q2", "Q3"))]


@override_settings(EVIDENCE_LEDGER_ENABLED=True)
class LedgerWriteTests(TestCase):
    def test_acquisition(self):
        row = record_acquisition(_artifact(), peer="loopback")
        self.assertEqual(Acquisition.objects.count(), 1)
        self.assertEqual((row.name, row.peer, row.pages_received), ("UF", "loopback", 16))
        self.assertEqual(row.bytes_received, 16 * PAGE)
        self.assertEqual(row.raw_dump_path, "/tmp/UF.raw")
        self.assertTrue(row.digest_verified)

    def test_diff_run_with_pairs(self):
        run = record_diff_run(_reports(), label="demo", output_dir="out", pixmaps={1: "out/q2q3.ppm"})
        pairs = list(run.pairs.order_by("index"))
        self.assertEqual([(p.dump_a, p.dump_b) for p in pairs], [("Q1", "Q2"), ("Q2", "Q3")])
        self.assertEqual([p.pages_differing for p in pairs], [1, 1])
        self.assertEqual(pairs[1].bytes_differing, PAGE)
        self.assertAlmostEqual(pairs[1].proportion, 0.25)
        self.assertEqual([p.pixmap_path for p in pairs], ["", "out/q2q3.ppm"])

    def test_trace_run(self):
        run = run_scenario(get_scenario("reboot"), seed=2)
        row = record_trace_run(run, seed=2, log_path="traces/reboot.log")
        self.assertEqual(row.total, 3123)
        self.assertEqual(row.counts["GetTime"], 92)
        self.assertEqual(row.segment_starts, [0, 1532])

    def test_database_error_is_swallowed(self):
        with mock.patch.object(Acquisition.objects, "create", side_effect=DatabaseError("locked")):
            with self.assertLogs("workbench.evidence", level="WARNING") as logs:
                self.assertIsNone(record_acquisition(_artifact()))
        self.assertIn("ledger write failed", logs.output[0])


@override_settings(EVIDENCE_LEDGER_ENABLED=False)
class LedgerDisabledTests(TestCase):
    def test_writers_are_noops(self):
        self.assertIsNone(record_acquisition(_artifact()))
        self.assertIsNone(record_diff_run(_reports(), label="x"))
        self.assertIsNone(record_trace_run(run_scenario(get_scenario("boot"), seed=0)))
        self.assertEqual(
            (Acquisition.objects.count(), DiffRun.objects.count(), DiffPair.objects.count(), TraceRun.objects.count()),
            (0, 0, 0, 0),
        )
