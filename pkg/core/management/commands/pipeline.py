"""
Run the whole cold-boot pipeline over loopback.

Usage
-----
    python manage.py pipeline --seed 1 --out artifacts/run1
    python manage.py pipeline --config pipeline.json --json

Produces Q1/Q2/UF/Q3 raw dumps, the UF metadata, six pairwise reports
(`report.json`, `table.txt`) and six pixmaps. A failing stage aborts the run
and is named in the error (`acquire: ...`).
"""

from __future__ import annotations

from core.commands import WorkbenchCommand
from core.pipeline import run_pipeline
from evidence.ledger import record_acquisition, record_diff_run


class Command(WorkbenchCommand):
    help = "Simulate, acquire over loopback, diff and render the Q1/Q2/UF/Q3 dumps."
    config_options = {
        "footprint": "footprint",
        "footprint_enabled": "footprint_enabled",
        "acquisition_footprint": "acquisition_footprint",
        "acquisition_switch": "acquisition_switch",
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--footprint", default=None, help="Reset footprint profile JSON.")
        parser.add_argument(
            "--no-footprint",
            dest="footprint_enabled",
            action="store_const",
            const=False,
            default=None,
            help="Skip the reset footprint (Q1 == Q2).",
        )
        parser.add_argument("--acquisition-footprint", default=None, help="Profile of memory the acquisition alters.")
        parser.add_argument("--acquisition-switch", type=float, default=None,
                            help="Traversed fraction at which the acquisition footprint lands (default 0.5).")
        parser.add_argument("--timeout", type=float, default=None, help="Seconds the receiver waits for the agent.")

    def run(self, config, **options):
        result = run_pipeline(config, timeout=options.get("timeout"))
        record_acquisition(result.artifact, peer="loopback")
        record_diff_run(
            result.reports,
            label=f"pipeline seed={config.seed}",
            output_dir=str(config.output_dir),
            pixmaps={i: str(p) for i, p in result.pixmaps.items()},
        )
        payload = {
            "session_id": result.session_id,
            "dumps": {label: str(path) for label, path in result.dumps.items()},
            "acquisition": result.summary.to_dict(),
            "digest_verified": result.artifact.digest_verified,
            "pairs": [r.to_dict() for r in result.reports],
            "pixmaps": [str(result.pixmaps[i]) for i in sorted(result.pixmaps)],
            "report": str(result.report_path),
            "table": str(result.table_path),
        }
        self.emit(payload, result.table)
