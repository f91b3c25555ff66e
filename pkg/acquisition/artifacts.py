"""
Received dumps on disk.

A receiver session leaves two files in the output directory:

    <name>.raw        flat dump, `map.top` bytes, non-received bytes zero
    <name>.meta.json  session metadata (see `METADATA_KEYS`)

`DumpArtifact` points at both. `atomicity_window()` and `verify_artifact()` work
from the files alone, so artifacts can be checked long after the session.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from memory.sidecar import map_from_dict

from .errors import DigestMismatch, MissingMetadata

logger = logging.getLogger("workbench.acquisition")

PathLike = Union[str, os.PathLike]

METADATA_KEYS = (
    "name",
    "session_id",
    "peer",
    "raw_dump",
    "map",
    "page_size",
    "pages_received",
    "bytes_received",
    "page_runs",
    "first_ts_ns",
    "last_ts_ns",
    "atomicity_window_ns",
    "expected_digest",
    "received_digest",
    "digest_verified",
    "started_at",
    "finished_at",
)

_HASH_CHUNK = 16 * 1024 * 1024


@dataclass(frozen=True)
class DumpArtifact:
    raw_dump_path: Path
    metadata_path: Path
    atomicity_window_ns: int
    digest_verified: bool
    name: str = ""
    session_id: str = ""
    pages_received: int = 0
    digest: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "session_id": self.session_id,
            "raw_dump": str(self.raw_dump_path),
            "metadata": str(self.metadata_path),
            "pages_received": self.pages_received,
            "atomicity_window_ns": self.atomicity_window_ns,
            "digest": self.digest,
            "digest_verified": self.digest_verified,
        }


def metadata_path_for(raw_dump_path: PathLike) -> Path:
    raw = Path(raw_dump_path)
    return raw.with_name(raw.name.removesuffix(".raw") + ".meta.json")


def write_metadata(path: PathLike, metadata: Dict[str, Any]) -> Path:
    """Write metadata JSON via a temp file + rename so readers never see half a file."""
    target = Path(path)
    tmp = target.with_name(target.name + ".part")
    tmp.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, target)
    return target


def read_metadata(path: PathLike) -> Dict[str, Any]:
    """
    Raises:
        MissingMetadata: file absent, unreadable, not JSON, or lacking timestamps.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        raise MissingMetadata(path) from None
    if not isinstance(data, dict) or "first_ts_ns" not in data or "last_ts_ns" not in data:
        raise MissingMetadata(path)
    return data


def load_artifact(metadata_path: PathLike) -> DumpArtifact:
    path = Path(metadata_path)
    data = read_metadata(path)
    raw = path.parent / data.get("raw_dump", "")
    return DumpArtifact(
        raw_dump_path=raw,
        metadata_path=path,
        atomicity_window_ns=int(data["last_ts_ns"]) - int(data["first_ts_ns"]),
        digest_verified=bool(data.get("digest_verified", False)),
        name=data.get("name", ""),
        session_id=data.get("session_id", ""),
        pages_received=int(data.get("pages_received", 0)),
        digest=data.get("received_digest", ""),
    )


def atomicity_window(artifact: DumpArtifact) -> int:
    """
    Nanoseconds between the first and the last received page (`last_ts - first_ts`).

    Raises:
        MissingMetadata: the metadata file is missing or has no timestamps.
    """
    data = read_metadata(artifact.metadata_path)
    return int(data["last_ts_ns"]) - int(data["first_ts_ns"])


def _page_runs(data: Dict[str, Any]) -> List[Tuple[int, int]]:
    return [(int(start), int(end)) for start, end in data.get("page_runs", [])]


def recompute_digest(raw_dump_path: PathLike, page_runs: List[Tuple[int, int]]) -> str:
    """SHA-256 over the bytes of each `(start, end_exclusive)` run, in order."""
    digest = hashlib.sha256()
    content = None
    if page_runs:
        content = np.memmap(raw_dump_path, dtype=np.uint8, mode="r")
    for start, end in page_runs:
        for offset in range(start, end, _HASH_CHUNK):
            digest.update(memoryview(content[offset:min(offset + _HASH_CHUNK, end)]))
    return digest.hexdigest()


def verify_artifact(artifact: DumpArtifact, strict: bool = False) -> bool:
    """
    Re-hash the stored dump over the received pages and compare with the
    digest the agent sent in End.

    Raises:
        MissingMetadata: metadata missing.
        DigestMismatch: only when `strict` and the digests differ.
    """
    data = read_metadata(artifact.metadata_path)
    map_from_dict(data["map"])  # the map must still be valid
    expected = data.get("expected_digest", "")
    actual = recompute_digest(artifact.raw_dump_path, _page_runs(data))
    ok = actual == expected
    if not ok:
        logger.warning(
            "stored dump does not match agent digest",
            extra={"event_fields": {"name": artifact.name, "expected": expected, "actual": actual}},
        )
        if strict:
            raise DigestMismatch(expected, actual)
    return ok
