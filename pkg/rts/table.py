"""
Runtime-service table, hooks and pointer conversion.

Model
-----
- Handlers live in a `HandlerSpace`: an address -> callable map standing in
  for the firmware's code. Table slots hold addresses, never callables, so a
  pointer that was not converted after `SetVirtualAddressMap` resolves to
  nothing and dispatch fails with `InvalidPointer`.
- `install_hooks()` runs in the DXE phase: each hooked slot keeps the previous
  address as `original` and points `current` at a per-service dispatcher.
- `set_virtual_address_map()` relocates the handler space by `offset` and
  converts every slot's `current` and `original` exactly once.

Dispatcher
----------
IN arguments are traced, the original handler runs exactly once, OUT arguments
are traced. A ForcedReset hook on GetVariable whose variable name matches
traces the IN arguments and returns `reset_triggered` without calling the
original.

A table models one machine and is not thread-safe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

from django.db import models

from .errors import (
    AlreadyHooked,
    AlreadyVirtual,
    InvalidHook,
    InvalidPointer,
    UnknownService,
    WrongPhase,
)
from .services import (
    CANNED_HANDLERS,
    DEFAULT_TIME,
    DEFAULT_VARIABLES,
    Handler,
    Service,
    ServiceCall,
    ServiceResult,
    Status,
)
from .tracing import NullSink, RecordType, TraceRecord, TraceSink, emit_trace

logger = logging.getLogger("workbench.rts")

HANDLER_BASE = 0x7EE00000
DISPATCHER_BASE = 0x7EF00000
_HANDLER_STRIDE = 0x40


class AddressMode(models.TextChoices):
    PHYSICAL = "Physical"
    VIRTUAL = "Virtual"


class Phase(models.TextChoices):
    DXE = "Dxe"
    RUNTIME = "Runtime"


class HookAction(models.TextChoices):
    TRACE_ONLY = "TraceOnly"
    FORCED_RESET = "ForcedReset"


@dataclass(frozen=True)
class Hook:
    service: str
    action: HookAction = HookAction.TRACE_ONLY
    # ForcedReset: variable name that triggers the reset.
    match: Optional[str] = None
    installed_at: Phase = Phase.DXE

    def __post_init__(self) -> None:
        if self.action == HookAction.FORCED_RESET:
            if self.service != Service.GET_VARIABLE:
                raise InvalidHook(f"ForcedReset only applies to GetVariable, not {self.service}")
            if not self.match:
                raise InvalidHook("ForcedReset needs a variable name to match")

    @classmethod
    def trace_all(cls) -> list["Hook"]:
        return [cls(service) for service in Service.values]


class HandlerSpace:
    """Relocatable address -> handler map."""

    def __init__(self) -> None:
        self._handlers: Dict[int, Handler] = {}

    def place(self, address: int, handler: Handler) -> int:
        self._handlers[address] = handler
        return address

    def resolve(self, address: int) -> Handler:
        try:
            return self._handlers[address]
        except KeyError:
            raise InvalidPointer(address) from None

    def relocate(self, offset: int) -> None:
        self._handlers = {address + offset: handler for address, handler in self._handlers.items()}


@dataclass
class Slot:
    service: str
    current: int
    original: Optional[int] = None
    address_mode: AddressMode = AddressMode.PHYSICAL

    @property
    def hooked(self) -> bool:
        return self.original is not None


@dataclass
class ServiceTable:
    slots: Dict[str, Slot]
    space: HandlerSpace
    mode: AddressMode = AddressMode.PHYSICAL
    hooks: Dict[str, Hook] = field(default_factory=dict)
    virtual_offset: int = 0
    clock: Dict[str, object] = field(default_factory=lambda: dict(DEFAULT_TIME))
    variables: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_VARIABLES))
    high_count: int = 0

    def lookup(self, name: str) -> Optional[Slot]:
        return self.slots.get(name)

    def slot(self, name: str) -> Slot:
        slot = self.slots.get(name)
        if slot is None:
            raise UnknownService(name)
        return slot

    @property
    def hooked_count(self) -> int:
        return sum(1 for s in self.slots.values() if s.hooked)


def _set_virtual_address_map_handler(table: ServiceTable, call: ServiceCall, sink: TraceSink) -> ServiceResult:
    offset = int((call.arg("VirtualMap") or {}).get("Offset", 0))
    set_virtual_address_map(table, offset)
    return ServiceResult()


def new_service_table() -> ServiceTable:
    """Fresh table: 14 slots in Physical mode, canned handlers, no hooks."""
    space = HandlerSpace()
    slots: Dict[str, Slot] = {}
    for index, service in enumerate(Service.values):
        handler = CANNED_HANDLERS.get(service, _set_virtual_address_map_handler)
        address = space.place(HANDLER_BASE + index * _HANDLER_STRIDE, handler)
        slots[service] = Slot(service=service, current=address)
    return ServiceTable(slots=slots, space=space)


# ---------------------------------------------------------------------------
# Hooks
# ---------------------------------------------------------------------------

def _trace_args(sink: TraceSink, call: ServiceCall, record_type: str, args) -> None:
    for name, data in args:
        sink.write_lines(emit_trace(TraceRecord(call.service, call.id, record_type, name, data)))


def _make_dispatcher(hook: Hook) -> Handler:
    def dispatcher(table: ServiceTable, call: ServiceCall, sink: TraceSink) -> ServiceResult:
        _trace_args(sink, call, RecordType.IN, call.in_args)
        if hook.action == HookAction.FORCED_RESET and call.variable_name == hook.match:
            logger.info(
                "forced reset",
                extra={"event_fields": {"service": call.service, "id": call.id, "variable": hook.match}},
            )
            return ServiceResult(status=Status.ABORTED, reset_triggered=True)
        original = table.space.resolve(table.slot(hook.service).original)
        result = original(table, call, sink)
        _trace_args(sink, call, RecordType.OUT, result.out_args)
        return result

    return dispatcher


def install_hooks(table: ServiceTable, hooks: Iterable[Hook]) -> None:
    """
    Raises:
        UnknownService: a hook names a service the table does not have.
        AlreadyHooked: the service already carries a hook.
        WrongPhase: the table was converted already, or the hook is marked Runtime.
    """
    for hook in hooks:
        if table.mode != AddressMode.PHYSICAL or hook.installed_at != Phase.DXE:
            raise WrongPhase(f"hooks must be installed in the DXE phase ({hook.service})")
        slot = table.slot(hook.service)
        if slot.hooked:
            raise AlreadyHooked(hook.service)
        index = list(table.slots).index(hook.service)
        address = table.space.place(DISPATCHER_BASE + index * _HANDLER_STRIDE, _make_dispatcher(hook))
        slot.original, slot.current = slot.current, address
        table.hooks[hook.service] = hook
    logger.debug("hooks installed", extra={"event_fields": {"hooked": table.hooked_count}})


def set_virtual_address_map(table: ServiceTable, offset: int) -> None:
    """
    Convert every handler pointer by `offset` (once per table).

    Raises:
        AlreadyVirtual: the table is in Virtual mode already.
    """
    if table.mode == AddressMode.VIRTUAL:
        raise AlreadyVirtual()
    table.space.relocate(offset)
    for slot in table.slots.values():
        slot.current += offset
        if slot.original is not None:
            slot.original += offset
        slot.address_mode = AddressMode.VIRTUAL
    table.mode = AddressMode.VIRTUAL
    table.virtual_offset = offset
    logger.debug("pointers converted", extra={"event_fields": {"offset": hex(offset)}})


def dispatch(table: ServiceTable, call: ServiceCall, sink: Optional[TraceSink] = None) -> ServiceResult:
    """
    Route `call` through its slot.

    Raises:
        UnknownService: the call names a service the table does not have.
        InvalidPointer: the slot points at an address with no handler.
    """
    slot = table.slot(call.service)
    handler = table.space.resolve(slot.current)
    return handler(table, call, sink if sink is not None else NullSink())
