"""
Errors raised by the memory model.

Map validation errors carry the offending range `index` (None when the problem
is not tied to a single range), address errors carry the `address`.
"""

from __future__ import annotations

from typing import Optional

from core.errors import WorkbenchError


class MemoryModelError(WorkbenchError):
    """Base class for memory map / image failures."""


class MapError(MemoryModelError):
    def __init__(self, message: str, index: Optional[int] = None) -> None:
        self.index = index
        where = f"range #{index}: " if index is not None else ""
        super().__init__(f"{where}{message}")


class OverlappingRanges(MapError):
    pass


class UnalignedRange(MapError):
    pass


class NoSystemRam(MapError):
    pass


class RegionOutOfBounds(MemoryModelError):
    def __init__(self, message: str, index: int) -> None:
        self.index = index
        super().__init__(f"overwrite region #{index}: {message}")


class InvalidFootprintProfile(MemoryModelError):
    pass


class AddressError(MemoryModelError):
    def __init__(self, message: str, address: int) -> None:
        self.address = address
        super().__init__(f"{message} (address 0x{address:x})")


class UnalignedAddress(AddressError):
    pass


class OutOfBounds(AddressError):
    pass


class ReservedBytesNonZero(AddressError):
    pass


class DumpIOError(MemoryModelError):
    """Reading or writing a raw dump failed at the OS level."""


class LengthMismatch(MemoryModelError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"length mismatch: expected {expected} bytes, got {actual}")


class SidecarError(MemoryModelError):
    """Map sidecar or footprint profile JSON is malformed."""
