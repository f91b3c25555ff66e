"""
Trace statistics tests.

What these tests verify
-----------------------
- Parsing and reassembling a traced run gives back exactly the call counts of
  every built-in scenario.
- Scenario deltas: login adds 32 GetVariable calls (16 OsIndications, 16
  OsIndicationsSupported) over boot; reboot adds one boot's GetTime and
  ConvertPointer calls over login; deltas are antisymmetric and zero on self.
- The second boot of `reboot`, compared with the first, reads GetVariable 45
  more times, GetNextVariableName 69 more times and SetVariable 55 fewer; it
  reads OsIndications once more.
- The counts table layout.
"""

from __future__ import annotations

from django.test import SimpleTestCase

from rts.scenarios import BUILTIN_SCENARIOS, get_scenario, run_scenario
from traces.calls import reassemble_calls
from traces.parser import parse_log
from traces.stats import (
    CallStats,
    compare_scenarios,
    count_by_service,
    format_stats_table,
    split_segments,
    stats_to_json,
)


def _calls(name: str, seed: int = 0):
    run = run_scenario(get_scenario(name), seed=seed)
    records, issues = parse_log(run.lines)
    calls, more = reassemble_calls(records)
    assert not issues and not more
    return run, calls


class RoundTripTests(SimpleTestCase):
    def test_counts_survive_trace_round_trip(self):
        for name, spec in BUILTIN_SCENARIOS.items():
            _, calls = _calls(name)
            self.assertEqual(count_by_service(calls), spec.stats(), name)
            self.assertEqual(len(calls), spec.total)


class CompareTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.boot_run, cls.boot = _calls("boot", seed=1)
        cls.login_run, cls.login = _calls("login", seed=2)
        cls.reboot_run, cls.reboot = _calls("reboot", seed=3)

    def test_boot_to_login(self):
        delta = compare_scenarios(count_by_service(self.boot), count_by_service(self.login), self.boot, self.login)
        self.assertEqual(delta.get("GetVariable"), 32)
        self.assertEqual(delta.get("GetTime"), 0)
        self.assertEqual(delta.variables, {"OsIndications": 16, "OsIndicationsSupported": 16})

    def test_login_to_reboot(self):
        delta = compare_scenarios(count_by_service(self.login), count_by_service(self.reboot))
        self.assertEqual(delta.get("GetTime"), 46)
        self.assertEqual(delta.get("ConvertPointer"), 91)
        self.assertEqual(delta.get("GetVariable"), 831)

    def test_antisymmetric_and_zero_on_self(self):
        a, b = count_by_service(self.boot), count_by_service(self.reboot)
        forward = compare_scenarios(a, b, self.boot, self.reboot)
        backward = compare_scenarios(b, a, self.reboot, self.boot)
        self.assertEqual({k: -v for k, v in forward.services.items()}, dict(backward.services))
        self.assertEqual({k: -v for k, v in forward.variables.items()}, dict(backward.variables))
        self.assertTrue(compare_scenarios(a, a, self.boot, self.boot).is_zero)

    def test_second_boot_against_first(self):
        first, second = split_segments(self.reboot, self.reboot_run.segment_starts)
        self.assertEqual(len(first), 1532)
        self.assertEqual(len(second), 1591)
        delta = compare_scenarios(count_by_service(first), count_by_service(second), first, second)
        self.assertEqual(delta.get("GetVariable"), 45)
        self.assertEqual(delta.get("GetNextVariableName"), 69)
        self.assertEqual(delta.get("SetVariable"), -55)
        self.assertEqual(delta.get("GetTime"), 0)
        self.assertEqual(delta.variables.get("OsIndications"), 1)


class FormatTests(SimpleTestCase):
    def test_table_layout(self):
        text = format_stats_table({
            "boot": get_scenario("boot").stats(),
            "reboot": get_scenario("reboot").stats(),
        })
        lines = text.splitlines()
        self.assertTrue(lines[0].startswith("Runtime Service"))
        self.assertTrue(lines[0].endswith("Reboot"))
        self.assertEqual(lines[2].split(), ["GetTime", "46", "92"])
        self.assertEqual(lines[-1].split(), ["Total", "1500", "3123"])
        self.assertEqual(len(lines), 1 + 1 + 5 + 1 + 1)

    def test_zero_counts_are_dropped(self):
        stats = CallStats({"GetTime": 0, "GetVariable": 2})
        self.assertEqual(stats.counts, {"GetVariable": 2})
        self.assertIn('"total": 2', stats_to_json("x", stats))
