"""Errors raised by the runtime-service simulation and the tracer."""

from __future__ import annotations

from typing import Any

from core.errors import WorkbenchError


class RuntimeServiceError(WorkbenchError):
    """Base class for service table, hook, trace and scenario failures."""


class UnknownService(RuntimeServiceError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown runtime service {name!r}")


class AlreadyHooked(RuntimeServiceError):
    def __init__(self, service: str) -> None:
        self.service = service
        super().__init__(f"{service} is already hooked")


class WrongPhase(RuntimeServiceError):
    pass


class AlreadyVirtual(RuntimeServiceError):
    def __init__(self) -> None:
        super().__init__("SetVirtualAddressMap was already called for this table")


class InvalidHook(RuntimeServiceError):
    pass


class InvalidPointer(RuntimeServiceError):
    """A slot points at an address with no handler (an unconverted pointer)."""

    def __init__(self, address: int) -> None:
        self.address = address
        super().__init__(f"no handler at 0x{address:x}")


class UnserializableValue(RuntimeServiceError):
    def __init__(self, key: str, value: Any) -> None:
        self.key = key
        self.value = value
        super().__init__(f"trace value for {key!r} must be an integer or a string, got {type(value).__name__}")


class OversizedValue(RuntimeServiceError):
    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"trace entry {key!r} does not fit into one record")


class UnknownScenario(RuntimeServiceError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown scenario {name!r}")


class ScenarioSpecError(RuntimeServiceError):
    """A scenario spec file is malformed or inconsistent."""


class NotTraced(RuntimeServiceError):
    def __init__(self, service: str) -> None:
        self.service = service
        super().__init__(f"{service} is not hooked with TraceOnly")
