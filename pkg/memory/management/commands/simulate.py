"""
Write the pre-reset (Q1) and post-reset (Q2) images of a simulated machine.

Usage
-----
    python manage.py simulate --seed 7 --out artifacts/run1
    python manage.py simulate --map map.json --footprint profile.json --json

Outputs `Q1.raw`, `Q2.raw` (each `map.top` bytes), `map.json` and
`footprint.json` in the output directory. Same seed, same files.
"""

from __future__ import annotations

from core.commands import WorkbenchCommand
from core.pipeline import simulate


class Command(WorkbenchCommand):
    help = "Simulate the memory before (Q1) and after (Q2) a firmware reset."
    config_options = {"footprint": "footprint", "footprint_enabled": "footprint_enabled"}

    def add_command_arguments(self, parser):
        parser.add_argument("--footprint", default=None, help="Footprint profile JSON (default: built-in profile).")
        parser.add_argument(
            "--no-footprint",
            dest="footprint_enabled",
            action="store_const",
            const=False,
            default=None,
            help="Skip the reset footprint (Q2 == Q1).",
        )

    def run(self, config, **options):
        result = simulate(config)
        payload = {name: str(path) for name, path in result.paths.items()}
        payload.update({"seed": config.seed, "bytes": result.q1.map.top})
        self.emit(payload, f"Q1 -> {payload['Q1']}\nQ2 -> {payload['Q2']}\n({payload['bytes']} bytes each)")
