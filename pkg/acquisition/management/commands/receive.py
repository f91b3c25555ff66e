"""
Receive memory dumps from acquisition agents.

Usage
-----
    python manage.py receive --listen 0.0.0.0:7070 --out dumps/ --name UF
    python manage.py receive --forever --out dumps/

Without `--forever` one dump is received and the command exits. With it,
sessions are served until interrupted, each named `dump-<session id>`.
"""

from __future__ import annotations

from acquisition.receiver import ReceiverServer, receive
from core.commands import WorkbenchCommand
from evidence.ledger import record_acquisition


class Command(WorkbenchCommand):
    help = "Listen for an acquisition agent and store the received dump."
    config_options = {"listen": "listen"}

    def add_command_arguments(self, parser):
        parser.add_argument("--listen", default=None, help="host:port (default: ACQUISITION_LISTEN).")
        parser.add_argument("--name", default=None, help="Dump name (default: dump-<session id>).")
        parser.add_argument("--timeout", type=float, default=None, help="Seconds to wait for an agent.")
        parser.add_argument("--forever", action="store_true", help="Serve sessions until interrupted.")

    def run(self, config, **options):
        config.output_dir.mkdir(parents=True, exist_ok=True)
        if options.get("forever"):
            self._serve_forever(config)
            return
        artifact = receive(config.listen, config.output_dir, name=options.get("name"), timeout=options.get("timeout"))
        record_acquisition(artifact)
        verdict = "verified" if artifact.digest_verified else "DIGEST MISMATCH"
        self.emit(
            artifact.to_dict(),
            f"{artifact.raw_dump_path}: {artifact.pages_received} pages, "
            f"window {artifact.atomicity_window_ns} ns, {verdict}",
        )

    def _serve_forever(self, config):
        with ReceiverServer(config.listen, config.output_dir) as server:
            self.stdout.write(f"listening on {server.endpoint}")
            try:
                server.serve_forever()
            except KeyboardInterrupt:
                pass
            for artifact in server.artifacts:
                record_acquisition(artifact)
            self.emit({
                "received": [a.to_dict() for a in server.artifacts],
                "failed": [{"name": name, "error": str(exc)} for name, exc in server.failures],
            }, f"{len(server.artifacts)} dumps received, {len(server.failures)} sessions failed")
