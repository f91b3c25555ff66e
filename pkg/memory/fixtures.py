"""
Built-in maps and footprint profiles.

- `vm_map()`: the three-range map of the 2 GiB QEMU/OVMF virtual machine
  (640 KiB low RAM, the 128 KiB PCI bus window, 2047 MiB high RAM).
- `default_footprint_profile()`: the firmware footprint observed after a reset.
  The lower region (starting at 16 MiB, about 7 MiB long) is measured; the upper
  region's extent is not, so its 16 MiB below the top of RAM is configuration.
  On smaller maps both regions are fitted to SystemRam.
"""

from __future__ import annotations

from .footprint import FillMode, FootprintProfile, OverwriteRegion
from .ranges import PAGE_SIZE, MemoryMap, MemoryRange, Purpose

MiB = 1024 * 1024

LOWER_FOOTPRINT_START = 0x1000000
LOWER_FOOTPRINT_LENGTH = 7 * MiB
UPPER_FOOTPRINT_LENGTH = 16 * MiB


def vm_map() -> MemoryMap:
    return MemoryMap(
        ranges=(
            MemoryRange(0x00000000, 0x0009FFFF, Purpose.SYSTEM_RAM),
            MemoryRange(0x000A0000, 0x000BFFFF, Purpose.RESERVED),
            MemoryRange(0x00100000, 0x7FFFFFFF, Purpose.SYSTEM_RAM),
        )
    )


def single_range_map(pages: int = 1) -> MemoryMap:
    """One SystemRam range of `pages` pages starting at address 0."""
    return MemoryMap(ranges=(MemoryRange(0, pages * PAGE_SIZE - 1, Purpose.SYSTEM_RAM),))


def default_footprint_profile(memory_map: MemoryMap | None = None) -> FootprintProfile:
    """The observed footprint, fitted to `memory_map`.

    The lower region is dropped when no SystemRam range holds it. The upper
    region covers at most a quarter of the top SystemRam range.
    """
    memory_map = memory_map or vm_map()
    ram = memory_map.system_ram()
    top_ram = ram[-1]
    regions = []
    if any(r.contains(LOWER_FOOTPRINT_START, LOWER_FOOTPRINT_LENGTH) for r in ram):
        regions.append(OverwriteRegion(LOWER_FOOTPRINT_START, LOWER_FOOTPRINT_LENGTH, FillMode.ZERO))
    upper_length = min(UPPER_FOOTPRINT_LENGTH, top_ram.page_count // 4 * PAGE_SIZE)
    if upper_length:
        regions.append(OverwriteRegion(top_ram.end + 1 - upper_length, upper_length, FillMode.PSEUDO_RANDOM))
    return FootprintProfile(overwrite_regions=tuple(regions), decay_bitflip_rate=0.0)
