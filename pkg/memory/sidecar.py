"""
JSON sidecars for memory maps and footprint profiles.

Map sidecar
-----------
    {"page_size": 4096,
     "ranges": [{"start": "0x0", "end": "0x9ffff", "purpose": "SystemRam"}, ...]}

Addresses are hexadecimal strings; `end` is inclusive.

Footprint profile
-----------------
    {"regions": [{"start": "0x1000000", "length": "0x700000", "fill": "Zero"},
                 {"start": "0x7f000000", "length": 16777216, "fill": "PseudoRandom", "seed": 7}],
     "decay_bitflip_rate": 0.0}

`length` accepts an integer or a hexadecimal string. Both documents are validated
with jsonschema before conversion; failures raise `SidecarError`.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, Union

import jsonschema

from .errors import SidecarError
from .footprint import FillMode, FootprintProfile, OverwriteRegion
from .ranges import PAGE_SIZE, MemoryMap, MemoryRange, Purpose, validate_map

PathLike = Union[str, os.PathLike]

_HEX = {"type": "string", "pattern": "^0x[0-9a-fA-F]+$"}

MAP_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["page_size", "ranges"],
    "properties": {
        "page_size": {"const": PAGE_SIZE},
        "ranges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start", "end", "purpose"],
                "properties": {
                    "start": _HEX,
                    "end": _HEX,
                    "purpose": {"enum": list(Purpose.values)},
                },
                "additionalProperties": False,
            },
        },
    },
}

PROFILE_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "properties": {
        "regions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start", "length"],
                "properties": {
                    "start": _HEX,
                    "length": {"anyOf": [{"type": "integer", "minimum": 0}, _HEX]},
                    "fill": {"enum": list(FillMode.values)},
                    "seed": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "decay_bitflip_rate": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "additionalProperties": False,
}


def _read_json(path: PathLike, schema: Dict[str, Any]) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SidecarError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SidecarError(f"{path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise SidecarError(f"{path}: {exc.message}") from exc
    return data


def _int(value: Union[int, str]) -> int:
    return value if isinstance(value, int) else int(value, 16)


def map_to_dict(memory_map: MemoryMap) -> Dict[str, Any]:
    return {
        "page_size": memory_map.page_size,
        "ranges": [
            {"start": hex(r.start), "end": hex(r.end), "purpose": str(r.purpose.value)}
            for r in memory_map.ranges
        ],
    }


def map_from_dict(data: Dict[str, Any]) -> MemoryMap:
    try:
        jsonschema.validate(data, MAP_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SidecarError(exc.message) from exc
    memory_map = MemoryMap(
        ranges=tuple(
            MemoryRange(_int(item["start"]), _int(item["end"]), Purpose(item["purpose"]))
            for item in data["ranges"]
        ),
        page_size=data["page_size"],
    )
    validate_map(memory_map)
    return memory_map


def write_map_sidecar(memory_map: MemoryMap, path: PathLike) -> Path:
    target = Path(path)
    target.write_text(json.dumps(map_to_dict(memory_map), indent=2) + "\n", encoding="utf-8")
    return target


def load_map_sidecar(path: PathLike) -> MemoryMap:
    """Read and validate a map sidecar (schema + MemoryMap invariants)."""
    data = _read_json(path, MAP_SCHEMA)
    return map_from_dict(data)


def profile_to_dict(profile: FootprintProfile) -> Dict[str, Any]:
    regions = []
    for region in profile.overwrite_regions:
        item: Dict[str, Any] = {
            "start": hex(region.start),
            "length": region.length,
            "fill": str(region.fill.value),
        }
        if region.seed is not None:
            item["seed"] = region.seed
        regions.append(item)
    return {"regions": regions, "decay_bitflip_rate": profile.decay_bitflip_rate}


def write_footprint_profile(profile: FootprintProfile, path: PathLike) -> Path:
    target = Path(path)
    target.write_text(json.dumps(profile_to_dict(profile), indent=2) + "\n", encoding="utf-8")
    return target


def load_footprint_profile(path: PathLike) -> FootprintProfile:
    data = _read_json(path, PROFILE_SCHEMA)
    return FootprintProfile(
        overwrite_regions=tuple(
            OverwriteRegion(
                start=_int(item["start"]),
                length=_int(item["length"]),
                fill=FillMode(item.get("fill", FillMode.ZERO)),
                seed=item.get("seed"),
            )
            for item in data.get("regions", [])
        ),
        decay_bitflip_rate=float(data.get("decay_bitflip_rate", 0.0)),
    )
