"""
Shared base for workbench management commands.

Global flags
------------
Every workbench command accepts:
    --config <file>   JSON pipeline config (see `core.config.CONFIG_SCHEMA`)
    --seed <int>      seed for simulated images, footprints and scenario order
    --map <file>      memory map sidecar (default: built-in VM map)
    --out <dir>       output directory for artifacts
    --json            print machine-readable JSON instead of text

Error contract
--------------
- Domain failures (`WorkbenchError` subclasses) surface as `CommandError`, so the
  process exits non-zero. Subclasses set `stage` to prefix the failing step.
- Exit code 0 iff no errors.
"""

from __future__ import annotations

import json
from typing import Any, Dict, Optional

from django.core.management.base import BaseCommand, CommandError, CommandParser

from core.config import PipelineConfig, load_pipeline_config
from core.errors import WorkbenchError


class WorkbenchCommand(BaseCommand):
    """Base class adding global flags, config loading and JSON output."""

    #: config keys forwarded from command-specific options (option name -> config key)
    config_options: Dict[str, str] = {}

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--config", default=None, help="JSON pipeline config file.")
        parser.add_argument("--seed", type=int, default=None, help="Seed (default: WORKBENCH_SEED).")
        parser.add_argument("--map", dest="map", default=None, help="Memory map sidecar JSON.")
        parser.add_argument("--out", dest="out", default=None, help="Output directory.")
        parser.add_argument("--json", dest="as_json", action="store_true", default=False,
                            help="Print machine-readable JSON.")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser: CommandParser) -> None:
        """Hook for command-specific options."""

    def load_config(self, options: Dict[str, Any]) -> PipelineConfig:
        overrides = {"seed": options.get("seed"), "map": options.get("map"), "out": options.get("out")}
        for option, key in self.config_options.items():
            overrides[key] = options.get(option)
        return load_pipeline_config(options.get("config"), overrides)

    def handle(self, *args, **options):
        self.as_json = bool(options.get("as_json"))
        try:
            config = self.load_config(options)
            run_options = {k: v for k, v in options.items() if k != "config"}
            self.run(config, **run_options)
        except WorkbenchError as exc:
            stage = getattr(exc, "stage", None)
            prefix = f"{stage}: " if stage else ""
            raise CommandError(f"{prefix}{exc}") from exc
        except OSError as exc:
            raise CommandError(str(exc)) from exc

    def run(self, config: PipelineConfig, **options) -> None:
        raise NotImplementedError

    def emit(self, payload: Dict[str, Any], text: Optional[str] = None) -> None:
        """Write `payload` as JSON when --json was given, else the human text."""
        if self.as_json or text is None:
            self.stdout.write(json.dumps(payload, indent=2, sort_keys=True))
        else:
            self.stdout.write(text)
