"""
Reboot footprint simulation.

A cold-boot style acquisition first resets the machine; the firmware then
overwrites some regions of RAM before any acquisition code runs. A
`FootprintProfile` lists those regions (zeroed or rewritten with pseudorandom
data) and an optional per-bit decay rate for the remaining SystemRam.

Determinism
-----------
`apply_footprint(image, profile, seed)` derives one child stream per region (unless
the region pins its own seed) and one for decay from `SeedSequence(seed)`, so the
result is a pure function of its inputs.

Locality
--------
With `decay_bitflip_rate == 0`, only bytes inside the overwrite regions can change.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.db import models

from .errors import InvalidFootprintProfile, RegionOutOfBounds
from .image import MemoryImage
from .ranges import MemoryMap

logger = logging.getLogger("workbench.memory")

_DECAY_CHUNK = 1024 * 1024


class FillMode(models.TextChoices):
    ZERO = "Zero", "Zero fill"
    PSEUDO_RANDOM = "PseudoRandom", "Pseudorandom fill"


@dataclass(frozen=True)
class OverwriteRegion:
    start: int
    length: int
    fill: FillMode = FillMode.ZERO
    # Only used by PseudoRandom; None derives the stream from the apply seed.
    seed: Optional[int] = None

    @property
    def end(self) -> int:
        """Exclusive end address."""
        return self.start + self.length

    def pages(self, page_size: int) -> range:
        if self.length <= 0:
            return range(0)
        return range(self.start // page_size, (self.end - 1) // page_size + 1)


@dataclass(frozen=True)
class FootprintProfile:
    overwrite_regions: Tuple[OverwriteRegion, ...] = field(default_factory=tuple)
    decay_bitflip_rate: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "overwrite_regions", tuple(self.overwrite_regions))
        if not 0.0 <= self.decay_bitflip_rate <= 1.0:
            raise InvalidFootprintProfile(
                f"decay_bitflip_rate must be within [0, 1], got {self.decay_bitflip_rate}"
            )

    def touched_pages(self, page_size: int = 4096) -> List[int]:
        """Sorted page indices intersecting any overwrite region."""
        pages = set()
        for region in self.overwrite_regions:
            pages.update(region.pages(page_size))
        return sorted(pages)

    @property
    def overwritten_bytes(self) -> int:
        return sum(max(r.length, 0) for r in self.overwrite_regions)


def check_profile(profile: FootprintProfile, memory_map: MemoryMap) -> None:
    """
    Raises:
        RegionOutOfBounds: a non-empty region is not inside one SystemRam range,
            or a region has a negative length.
    """
    ram = memory_map.system_ram()
    for index, region in enumerate(profile.overwrite_regions):
        if region.length < 0 or region.start < 0:
            raise RegionOutOfBounds("negative start or length", index)
        if region.length == 0:
            continue
        if not any(r.contains(region.start, region.length) for r in ram):
            raise RegionOutOfBounds(
                f"0x{region.start:x}+0x{region.length:x} is not inside a SystemRam range", index
            )


def _decay_spans(memory_map: MemoryMap, regions: Sequence[OverwriteRegion]) -> List[Tuple[int, int]]:
    """SystemRam `(start, end_exclusive)` spans minus every overwrite region."""
    cuts = sorted((r.start, r.end) for r in regions if r.length > 0)
    spans: List[Tuple[int, int]] = []
    for ram in memory_map.system_ram():
        cursor, stop = ram.start, ram.end + 1
        for cut_start, cut_end in cuts:
            if cut_end <= cursor or cut_start >= stop:
                continue
            if cut_start > cursor:
                spans.append((cursor, cut_start))
            cursor = max(cursor, cut_end)
        if cursor < stop:
            spans.append((cursor, stop))
    return spans


def _flip_bits(content: np.ndarray, start: int, end: int, rate: float, rng: np.random.Generator) -> int:
    flipped = 0
    for offset in range(start, end, _DECAY_CHUNK):
        chunk = content[offset:min(offset + _DECAY_CHUNK, end)]
        n_bits = chunk.shape[0] * 8
        k = int(rng.binomial(n_bits, rate))
        if not k:
            continue
        positions = rng.choice(n_bits, size=k, replace=False)
        masks = np.left_shift(1, positions & 7).astype(np.uint8)
        np.bitwise_xor.at(chunk, positions >> 3, masks)
        flipped += k
    return flipped


def apply_footprint(image: MemoryImage, profile: FootprintProfile, seed: int) -> MemoryImage:
    """
    Return a copy of `image` with the firmware footprint applied.

    Regions are rewritten in profile order; then every remaining SystemRam bit
    flips independently with probability `decay_bitflip_rate`.
    """
    check_profile(profile, image.map)
    regions = profile.overwrite_regions
    content = np.array(image.content, dtype=np.uint8, copy=True)
    children = np.random.SeedSequence(seed).spawn(len(regions) + 1)

    for index, region in enumerate(regions):
        if region.length == 0:
            continue
        target = content[region.start:region.end]
        if region.fill == FillMode.ZERO:
            target[:] = 0
        else:
            rng = np.random.default_rng(region.seed if region.seed is not None else children[index])
            target[:] = np.frombuffer(rng.bytes(region.length), dtype=np.uint8)

    flipped = 0
    if profile.decay_bitflip_rate > 0:
        rng = np.random.default_rng(children[-1])
        for start, end in _decay_spans(image.map, regions):
            flipped += _flip_bits(content, start, end, profile.decay_bitflip_rate, rng)

    logger.debug(
        "footprint applied",
        extra={"event_fields": {
            "regions": len(regions),
            "overwritten_bytes": profile.overwritten_bytes,
            "flipped_bits": flipped,
        }},
    )
    return MemoryImage(image.map, content, image.provenance)
