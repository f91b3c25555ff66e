"""
Run a scenario through a fully traced service table.

Usage
-----
    python manage.py trace --scenario boot --out traces/
    python manage.py trace --scenario my-spec.json --seed 4 --json
    python manage.py trace --export-builtins specs/

Writes `<name>.log` (tracer lines) and `<name>.json` ({scenario, counts, total,
segment_starts}).
"""

from __future__ import annotations

from core.commands import WorkbenchCommand
from evidence.ledger import record_trace_run
from rts.scenarios import export_builtin_scenarios, resolve_scenario, run_scenario, write_scenario_run
from traces.stats import format_stats_table


class Command(WorkbenchCommand):
    help = "Generate the runtime-service trace log of a scenario."
    config_options = {"scenario": "scenario"}

    def add_command_arguments(self, parser):
        parser.add_argument("--scenario", default=None, help="Built-in name or JSON spec path (default: boot).")
        parser.add_argument("--name", default=None, help="Output file stem (default: scenario name).")
        parser.add_argument("--export-builtins", default=None, metavar="DIR",
                            help="Write the built-in scenario specs as JSON into DIR and exit.")

    def run(self, config, **options):
        if options.get("export_builtins"):
            paths = export_builtin_scenarios(options["export_builtins"])
            self.emit({"exported": [str(p) for p in paths]}, "\n".join(str(p) for p in paths))
            return
        spec = resolve_scenario(config.scenario)
        run = run_scenario(spec, seed=config.seed)
        log_path, json_path = write_scenario_run(run, config.output_dir, options.get("name"))
        record_trace_run(run, seed=config.seed, log_path=str(log_path))
        payload = dict(run.summary(), log=str(log_path), summary=str(json_path), seed=config.seed)
        self.emit(payload, format_stats_table({spec.name: run.stats}))
