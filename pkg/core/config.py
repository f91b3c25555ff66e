"""
Pipeline configuration: JSON config files overlaid by command-line flags.

Resolution order
----------------
1) Settings defaults (`WORKBENCH_SEED`, `WORKBENCH_OUTPUT_DIR`, `ACQUISITION_LISTEN`).
2) Optional JSON config file (`--config`), validated against `CONFIG_SCHEMA`.
3) Explicit command-line flags (non-None values only).

Referenced files (map, footprint profiles) must exist; a missing file raises
`ConfigError` naming the field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import jsonschema
from django.conf import settings

from core.errors import WorkbenchError


class ConfigError(WorkbenchError):
    """Invalid or inconsistent workbench configuration."""


CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "map": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "footprint": {"type": "string"},
        "footprint_enabled": {"type": "boolean"},
        "acquisition_footprint": {"type": "string"},
        "acquisition_switch": {"type": "number", "minimum": 0, "maximum": 1},
        "listen": {"type": "string"},
        "connect": {"type": "string"},
        "out": {"type": "string"},
        "scenario": {"type": "string"},
    },
}


@dataclass(frozen=True)
class Endpoint:
    """A `host:port` TCP endpoint (statically configured; no DHCP)."""
    host: str
    port: int

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        host, sep, port = (text or "").rpartition(":")
        if not sep or not host:
            raise ConfigError(f"Endpoint must look like host:port, got {text!r}.")
        try:
            port_num = int(port)
        except ValueError:
            raise ConfigError(f"Endpoint port is not a number: {text!r}.") from None
        if not 0 <= port_num <= 65535:
            raise ConfigError(f"Endpoint port out of range: {text!r}.")
        return cls(host=host.strip("[]"), port=port_num)

    def as_tuple(self) -> tuple[str, int]:
        return (self.host, self.port)

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


@dataclass(frozen=True)
class PipelineConfig:
    """
    Inputs shared by the workbench commands.

    `map_file`/`footprint_file` of None select the built-in fixtures (the
    three-range VM map and the default reboot footprint).
    """
    seed: int = 0
    map_file: Optional[Path] = None
    footprint_file: Optional[Path] = None
    footprint_enabled: bool = True
    acquisition_footprint_file: Optional[Path] = None
    # Fraction of the address space already traversed when the acquisition
    # footprint lands; pages below it are sent unperturbed.
    acquisition_switch: float = 0.5
    listen: Endpoint = field(default_factory=lambda: Endpoint("127.0.0.1", 0))
    connect: Endpoint = field(default_factory=lambda: Endpoint("127.0.0.1", 7070))
    output_dir: Path = Path("artifacts")
    scenario: str = "boot"


_PATH_KEYS = {
    "map": "map_file",
    "footprint": "footprint_file",
    "acquisition_footprint": "acquisition_footprint_file",
}


def _defaults() -> PipelineConfig:
    listen = Endpoint.parse(settings.ACQUISITION_LISTEN)
    return PipelineConfig(
        seed=int(settings.WORKBENCH_SEED),
        listen=listen,
        connect=listen,
        output_dir=Path(settings.WORKBENCH_OUTPUT_DIR),
    )


def _apply(config: PipelineConfig, values: Mapping[str, Any], base_dir: Path) -> PipelineConfig:
    changes: Dict[str, Any] = {}
    for key, value in values.items():
        if value is None:
            continue
        if key in _PATH_KEYS:
            path = Path(value)
            if not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                raise ConfigError(f"{key}: referenced file does not exist: {path}")
            changes[_PATH_KEYS[key]] = path
        elif key in ("listen", "connect"):
            changes[key] = Endpoint.parse(value)
        elif key == "out":
            path = Path(value)
            changes["output_dir"] = path if path.is_absolute() else base_dir / path
        elif key == "seed":
            changes["seed"] = int(value)
        elif key in ("footprint_enabled", "acquisition_switch", "scenario"):
            changes[key] = value
    return replace(config, **changes)


def load_pipeline_config(
    config_path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """
    Build a `PipelineConfig` from settings, an optional JSON file and overrides.

    Raises:
        ConfigError: unreadable/invalid config file or a missing referenced file.
    """
    config = _defaults()
    if config_path:
        path = Path(config_path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Config file is not valid JSON: {exc}") from None
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"Config file rejected: {exc.message}") from None
        config = _apply(config, raw, path.resolve().parent)
    if overrides:
        config = _apply(config, overrides, Path.cwd())
    return config
