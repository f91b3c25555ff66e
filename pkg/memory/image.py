"""
Flat memory images and raw dump files.

Overview
--------
- `MemoryImage` is the flat content of simulated RAM (addresses `0..top-1`) with
  its map and a provenance label ("Q1", "UF", ...). Content is a read-only
  numpy `uint8` array; operations never mutate an image, they return new ones.
- `new_image()` fills SystemRam from a PCG64 stream keyed by the seed; holes and
  Reserved ranges stay zero (same layout as QEMU's pmemsave output).
- `write_raw_dump()` / `load_raw_dump()` store the content byte-for-byte.
  Loading memory-maps the file read-only so multi-GiB dumps stay off-heap.

PERF:
    Generation and file IO are chunked (`_CHUNK` bytes) so a 2 GiB image only
    needs its own buffer plus one chunk of scratch space.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (
    DumpIOError,
    LengthMismatch,
    OutOfBounds,
    ReservedBytesNonZero,
    UnalignedAddress,
)
from .ranges import MemoryMap, validate_map

logger = logging.getLogger("workbench.memory")

_CHUNK = 64 * 1024 * 1024

PathLike = Union[str, os.PathLike]


def _freeze(content: np.ndarray) -> np.ndarray:
    if content.flags.writeable:
        content.flags.writeable = False
    return content


@dataclass(frozen=True, eq=False)
class MemoryImage:
    map: MemoryMap
    content: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        _freeze(self.content)

    def __len__(self) -> int:
        return int(self.content.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MemoryImage):
            return NotImplemented
        return self.map == other.map and np.array_equal(self.content, other.content)

    __hash__ = None  # type: ignore[assignment]

    def relabel(self, provenance: str) -> "MemoryImage":
        return MemoryImage(self.map, self.content, provenance)

    def sha256(self) -> str:
        digest = hashlib.sha256()
        for offset in range(0, len(self), _CHUNK):
            digest.update(memoryview(self.content[offset:offset + _CHUNK]))
        return digest.hexdigest()


def new_image(memory_map: MemoryMap, seed: int, provenance: str = "") -> MemoryImage:
    """
    Build a deterministic image: SystemRam from a seeded stream, the rest zero.

    Same `(memory_map, seed)` always yields byte-identical content.
    """
    validate_map(memory_map)
    content = np.zeros(memory_map.top, dtype=np.uint8)
    rng = np.random.default_rng(seed)
    for r in memory_map.system_ram():
        for offset in range(r.start, r.end + 1, _CHUNK):
            n = min(_CHUNK, r.end + 1 - offset)
            content[offset:offset + n] = np.frombuffer(rng.bytes(n), dtype=np.uint8)
    logger.debug(
        "image generated",
        extra={"event_fields": {"bytes": memory_map.top, "seed": seed, "provenance": provenance}},
    )
    return MemoryImage(memory_map, content, provenance)


def read_page(image: MemoryImage, address: int) -> bytes:
    """
    Return the 4096 bytes starting at `address`.

    Raises:
        UnalignedAddress: `address` is not page aligned.
        OutOfBounds: `address` is negative or at/after `map.top`.
    """
    page = image.map.page_size
    if address < 0 or address >= image.map.top:
        raise OutOfBounds("page outside image", address)
    if address % page:
        raise UnalignedAddress("page address not aligned", address)
    return image.content[address:address + page].tobytes()


def write_raw_dump(image: MemoryImage, path: PathLike) -> Path:
    """Write the flat content to `path` byte-for-byte (length = `map.top`)."""
    target = Path(path)
    try:
        with open(target, "wb") as fh:
            for offset in range(0, len(image), _CHUNK):
                fh.write(memoryview(image.content[offset:offset + _CHUNK]))
    except OSError as exc:
        raise DumpIOError(f"cannot write raw dump {target}: {exc}") from exc
    return target


def load_raw_dump(path: PathLike, memory_map: MemoryMap, provenance: str = "") -> MemoryImage:
    """
    Memory-map a raw dump written for `memory_map`.

    Raises:
        LengthMismatch: file length differs from `map.top`.
        ReservedBytesNonZero: a hole/Reserved byte is non-zero.
        DumpIOError: the file cannot be opened.
    """
    validate_map(memory_map)
    source = Path(path)
    try:
        size = source.stat().st_size
    except OSError as exc:
        raise DumpIOError(f"cannot read raw dump {source}: {exc}") from exc
    if size != memory_map.top:
        raise LengthMismatch(memory_map.top, size)
    content = np.memmap(source, dtype=np.uint8, mode="r", shape=(memory_map.top,))
    for start, end in memory_map.zero_spans():
        for offset in range(start, end, _CHUNK):
            chunk = content[offset:min(offset + _CHUNK, end)]
            nonzero = np.flatnonzero(chunk)
            if nonzero.size:
                raise ReservedBytesNonZero("non-SystemRam byte is not zero", offset + int(nonzero[0]))
    return MemoryImage(memory_map, content, provenance or source.stem)
