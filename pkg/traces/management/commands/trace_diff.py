"""
Compare the calls of two traced scenarios.

Usage
-----
    python manage.py trace_diff traces/boot.log traces/login.log
    python manage.py trace_diff boot login --json
    python manage.py trace_diff reboot --segments

Each operand is a tracer log or a built-in scenario name (run with --seed).
Deltas are `second - first`, per service and per GetVariable name. With
`--segments` the single operand's second boot is compared with its first.
"""

from __future__ import annotations

import json
from pathlib import Path

from core.commands import WorkbenchCommand
from rts.errors import ScenarioSpecError
from rts.scenarios import BUILTIN_SCENARIOS, get_scenario, run_scenario
from traces.calls import reassemble_calls
from traces.management.commands.trace_stats import load_calls
from traces.parser import parse_log
from traces.stats import compare_scenarios, count_by_service, split_segments


def _format_delta(delta) -> str:
    lines = [f"{'Runtime Service':<26}{'Delta':>8}"]
    lines += [f"{name:<26}{value:>+8d}" for name, value in delta.services.items()]
    if delta.variables:
        lines.append("")
        lines.append(f"{'GetVariable name':<26}{'Delta':>8}")
        lines += [f"{name:<26}{value:>+8d}" for name, value in delta.variables.items()]
    return "\n".join(lines)


class Command(WorkbenchCommand):
    help = "Per-service and per-variable call deltas between two traces."

    def add_command_arguments(self, parser):
        parser.add_argument("first", help="Tracer log or built-in scenario name.")
        parser.add_argument("second", nargs="?", default=None, help="Tracer log or built-in scenario name.")
        parser.add_argument("--segments", action="store_true",
                            help="Compare the second boot segment of FIRST with its first one.")

    def _calls(self, operand: str, seed: int):
        path = Path(operand)
        if path.is_file():
            calls, issues = load_calls(path)
            for issue in issues:
                self.stderr.write(f"{path}: {issue}")
            return calls, None
        if operand in BUILTIN_SCENARIOS:
            run = run_scenario(get_scenario(operand), seed=seed)
            calls, _ = reassemble_calls(parse_log(run.lines)[0])
            return calls, run.segment_starts
        raise ScenarioSpecError(f"{operand!r} is neither a log file nor a built-in scenario")

    def run(self, config, **options):
        first_calls, starts = self._calls(options["first"], config.seed)
        if options.get("segments"):
            if starts is None:
                starts = _segment_starts_from_summary(Path(options["first"]))
            segments = split_segments(first_calls, starts)
            if len(segments) < 2:
                raise ScenarioSpecError(f"{options['first']} has a single boot segment")
            a, b = segments[0], segments[1]
        else:
            if options.get("second") is None:
                raise ScenarioSpecError("two traces are needed (or --segments)")
            a = first_calls
            b, _ = self._calls(options["second"], config.seed)
        delta = compare_scenarios(count_by_service(a), count_by_service(b), a, b)
        self.emit(delta.to_dict(), _format_delta(delta))


def _segment_starts_from_summary(log_path: Path):
    """`segment_starts` from the `<name>.json` the trace command wrote next to the log."""
    summary = log_path.with_suffix(".json")
    try:
        return list(json.loads(summary.read_text(encoding="utf-8"))["segment_starts"])
    except (OSError, ValueError, KeyError) as exc:
        raise ScenarioSpecError(f"no segment starts for {log_path}: {exc}") from None
