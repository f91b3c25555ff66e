"""
Root of the workbench exception hierarchy.

Each app defines its own base (`MemoryModelError`, `ProtocolError`,
`RuntimeServiceError`, `DiffError`) deriving from `WorkbenchError`, so the
management command layer can turn any domain failure into a non-zero exit.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all domain errors raised by workbench apps."""


class StageFailed(WorkbenchError):
    """A pipeline stage failed; `stage` names it and `error` is the cause."""

    def __init__(self, stage: str, error: BaseException) -> None:
        self.stage = stage
        self.error = error
        super().__init__(str(error))
