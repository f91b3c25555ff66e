"""
`trace`, `trace_stats` and `trace_diff` command tests.

What these tests verify
-----------------------
- `trace --scenario boot` then `trace_stats` on its log reports 1500 calls.
- `trace_stats` on an empty log prints an all-zero table and succeeds.
- `trace_diff boot login` reports GetVariable +32; `trace_diff reboot
  --segments` reports the second-boot deltas, from a log or a scenario name.
- Trace runs are recorded in the ledger; unknown scenarios are command errors.
"""

from __future__ import annotations

import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import CommandError, call_command
from django.test import TestCase

from evidence.models import TraceRun


class TraceCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def _json(self, *args) -> dict:
        out = StringIO()
        call_command(*args, "--json", stdout=out, stderr=StringIO())
        return json.loads(out.getvalue())

    def test_trace_then_stats(self):
        payload = self._json("trace", "--scenario", "boot", "--out", str(self.root))
        self.assertEqual(payload["total"], 1500)
        log = Path(payload["log"])
        self.assertEqual(log.name, "boot.log")
        self.assertEqual(TraceRun.objects.get().total, 1500)

        stats = self._json("trace_stats", str(log))
        self.assertEqual(stats["boot"]["total"], 1500)
        self.assertEqual(stats["boot"]["counts"]["GetVariable"], 754)
        self.assertEqual(stats["boot"]["issues"], 0)

    def test_stats_on_empty_log(self):
        empty = self.root / "empty.log"
        empty.write_text("")
        out = StringIO()
        call_command("trace_stats", str(empty), stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[-1].split(), ["Total", "0"])
        self.assertEqual(lines[2].split(), ["GetTime", "0"])

    def test_diff_boot_login(self):
        boot = self._json("trace", "--scenario", "boot", "--out", str(self.root))["log"]
        login = self._json("trace", "--scenario", "login", "--out", str(self.root), "--seed", "3")["log"]
        for first, second in ((boot, login), ("boot", "login")):
            delta = self._json("trace_diff", first, second)
            self.assertEqual(delta["services"]["GetVariable"], 32)
            self.assertEqual(delta["GetVariable"], {"OsIndications": 16, "OsIndicationsSupported": 16})

    def test_diff_second_boot(self):
        log = self._json("trace", "--scenario", "reboot", "--out", str(self.root))["log"]
        for operand in (log, "reboot"):
            delta = self._json("trace_diff", operand, "--segments")["services"]
            self.assertEqual(
                (delta["GetVariable"], delta["GetNextVariableName"], delta["SetVariable"]), (45, 69, -55)
            )

    def test_export_builtins(self):
        payload = self._json("trace", "--export-builtins", str(self.root / "specs"))
        self.assertEqual(len(payload["exported"]), 6)

    def test_errors(self):
        with self.assertRaises(CommandError):
            call_command("trace", "--scenario", "nap", "--out", str(self.root))
        with self.assertRaises(CommandError):
            call_command("trace_diff", "boot")
