"""
Physical memory maps.

Overview
--------
- `MemoryRange` is one row of a physical memory map: inclusive `[start, end]`
  plus its `Purpose`. Both `start` and `end + 1` must sit on a page boundary.
- `MemoryMap` is the ordered, disjoint set of ranges of one machine. `top` is the
  highest `end + 1`; flat images and raw dumps are exactly `top` bytes long.
- `validate_map()` checks every invariant and names the offending range index.

Notes
-----
- The page size is fixed at 4096 bytes; the wire format and pixmaps depend on it.
- Holes between ranges are addressable in flat images and always read as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

from django.db import models

from .errors import NoSystemRam, OverlappingRanges, UnalignedRange

PAGE_SIZE = 4096


class Purpose(models.TextChoices):
    """What a physical range is used for."""
    SYSTEM_RAM = "SystemRam", "System RAM"
    RESERVED = "Reserved", "Reserved"


@dataclass(frozen=True)
class MemoryRange:
    start: int
    end: int  # inclusive
    purpose: Purpose = Purpose.SYSTEM_RAM

    @property
    def size(self) -> int:
        return self.end - self.start + 1

    @property
    def page_count(self) -> int:
        return self.size // PAGE_SIZE

    @property
    def is_system_ram(self) -> bool:
        return self.purpose == Purpose.SYSTEM_RAM

    def contains(self, start: int, length: int) -> bool:
        """True if `[start, start + length)` lies inside this range."""
        return self.start <= start and start + length - 1 <= self.end

    def page_addresses(self) -> range:
        return range(self.start, self.end + 1, PAGE_SIZE)


@dataclass(frozen=True)
class MemoryMap:
    ranges: Tuple[MemoryRange, ...]
    page_size: int = PAGE_SIZE

    def __post_init__(self) -> None:
        # Accept any iterable but store a tuple so maps stay hashable.
        object.__setattr__(self, "ranges", tuple(self.ranges))

    @property
    def top(self) -> int:
        return max((r.end + 1 for r in self.ranges), default=0)

    @property
    def total_pages(self) -> int:
        return -(-self.top // self.page_size)

    def system_ram(self) -> Tuple[MemoryRange, ...]:
        return tuple(r for r in self.ranges if r.is_system_ram)

    @property
    def system_ram_pages(self) -> int:
        return sum(r.page_count for r in self.system_ram())

    def system_page_addresses(self) -> Iterator[int]:
        """Every SystemRam page address in ascending order."""
        for r in self.system_ram():
            yield from r.page_addresses()

    def is_system_page(self, address: int) -> bool:
        return any(r.is_system_ram and r.start <= address <= r.end for r in self.ranges)

    def zero_spans(self) -> Iterator[Tuple[int, int]]:
        """`(start, end_exclusive)` spans that are not SystemRam (holes + Reserved)."""
        cursor = 0
        for r in self.system_ram():
            if r.start > cursor:
                yield cursor, r.start
            cursor = r.end + 1
        if cursor < self.top:
            yield cursor, self.top


def validate_map(memory_map: MemoryMap) -> None:
    """
    Check that `memory_map` satisfies the MemoryMap invariants.

    Raises:
        UnalignedRange: start > end, or start / end+1 not page aligned.
        OverlappingRanges: a range starts at or before the previous range's end
            (this also covers ranges that are not sorted by start).
        NoSystemRam: no SystemRam range at all.
    """
    page = memory_map.page_size
    previous_end = -1
    for index, r in enumerate(memory_map.ranges):
        if r.start > r.end:
            raise UnalignedRange(f"start 0x{r.start:x} is after end 0x{r.end:x}", index)
        if r.start % page or (r.end + 1) % page:
            raise UnalignedRange(
                f"0x{r.start:x}-0x{r.end:x} is not aligned to {page}-byte pages", index
            )
        if r.start <= previous_end:
            raise OverlappingRanges(
                f"0x{r.start:x}-0x{r.end:x} overlaps or precedes the previous range", index
            )
        previous_end = r.end
    if not memory_map.system_ram():
        raise NoSystemRam("map has no SystemRam range")
