"""Errors raised while comparing dumps."""

from __future__ import annotations

from core.errors import WorkbenchError


class DiffError(WorkbenchError):
    """Base class for diff failures."""

    stage = "diff"


class LengthMismatch(DiffError):
    def __init__(self, label_a: str, length_a: int, label_b: str, length_b: int) -> None:
        self.lengths = {label_a: length_a, label_b: length_b}
        super().__init__(f"cannot compare {label_a} ({length_a} bytes) with {label_b} ({length_b} bytes)")


class NotEnoughDumps(DiffError):
    def __init__(self, count: int) -> None:
        self.count = count
        super().__init__(f"pairwise comparison needs at least 2 dumps, got {count}")


class DiffIOError(DiffError):
    """A dump file could not be opened or mapped."""


class RenderError(DiffError):
    stage = "render"
