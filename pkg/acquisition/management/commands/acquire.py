"""
Stream a memory image to a receiver.

Usage
-----
    python manage.py acquire --map map.json --image Q2.raw --to 10.0.0.2:7070
    python manage.py acquire --to 127.0.0.1:7070 --seed 3

Without `--image` the post-reset image is simulated from the config (seed,
map, footprint) and sent from memory.
"""

from __future__ import annotations

from acquisition.agent import acquire
from core.commands import WorkbenchCommand
from core.pipeline import resolve_map, simulate_post_reset
from memory.image import load_raw_dump


class Command(WorkbenchCommand):
    help = "Send a raw dump (or a simulated post-reset image) to a receiver."
    config_options = {"connect": "connect", "footprint": "footprint"}

    def add_command_arguments(self, parser):
        parser.add_argument("--to", "--connect", dest="connect", default=None,
                            help="Receiver host:port (default: ACQUISITION_LISTEN).")
        parser.add_argument("--image", "--source", dest="source", default=None,
                            help="Raw dump to send (needs --map unless it is the VM map).")
        parser.add_argument("--footprint", default=None, help="Footprint profile used when simulating.")
        parser.add_argument("--throttle", type=float, default=None, help="Cap in pages per second.")

    def run(self, config, **options):
        if options.get("source"):
            image = load_raw_dump(options["source"], resolve_map(config))
        else:
            image = simulate_post_reset(config)
        summary = acquire(image, config.connect, throttle=options.get("throttle"))
        self.emit(
            summary.to_dict(),
            f"sent {summary.pages_sent} pages to {config.connect}, window {summary.atomicity_window_ns} ns, "
            f"{'confirmed' if summary.confirmed else 'NOT confirmed'} by the receiver",
        )
