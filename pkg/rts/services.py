"""
Runtime services: names, call/result types and canned handlers.

The handlers are simulations: they return plausible, deterministic results so
the hook and trace machinery has something to wrap. Argument shapes follow the
UEFI prototypes loosely; every argument is a flat map of integers and strings.

    GetTime              OUT Time{Year..Pad2}, Capabilities{Resolution, Accuracy, SetsToZero}
    GetVariable          IN VariableName, VendorGuid          OUT DataSize
    GetNextVariableName  IN VariableName, VendorGuid          OUT VariableName, VendorGuid
    SetVariable          IN VariableName, VendorGuid, Attributes, DataSize
    ConvertPointer       IN DebugDisposition, Address         OUT Address
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, Mapping, Optional, Tuple, Union

from django.db import models

if TYPE_CHECKING:
    from .table import ServiceTable
    from .tracing import TraceSink

Scalar = Union[int, str]
ArgData = Dict[str, Scalar]
Argument = Tuple[str, ArgData]


class Service(models.TextChoices):
    GET_TIME = "GetTime"
    SET_TIME = "SetTime"
    GET_WAKEUP_TIME = "GetWakeupTime"
    SET_WAKEUP_TIME = "SetWakeupTime"
    SET_VIRTUAL_ADDRESS_MAP = "SetVirtualAddressMap"
    CONVERT_POINTER = "ConvertPointer"
    GET_VARIABLE = "GetVariable"
    GET_NEXT_VARIABLE_NAME = "GetNextVariableName"
    SET_VARIABLE = "SetVariable"
    GET_NEXT_HIGH_MONOTONIC_COUNT = "GetNextHighMonotonicCount"
    RESET_SYSTEM = "ResetSystem"
    UPDATE_CAPSULE = "UpdateCapsule"
    QUERY_CAPSULE_CAPABILITIES = "QueryCapsuleCapabilities"
    QUERY_VARIABLE_INFO = "QueryVariableInfo"


class Status(models.TextChoices):
    SUCCESS = "EFI_SUCCESS"
    NOT_FOUND = "EFI_NOT_FOUND"
    UNSUPPORTED = "EFI_UNSUPPORTED"
    ABORTED = "EFI_ABORTED"


EFI_GLOBAL_VARIABLE_GUID = "8BE4DF61-93CA-11D2-AA0D-00E098032B8C"

DEFAULT_TIME: ArgData = {
    "Year": 2020,
    "Month": 9,
    "Day": 22,
    "Hour": 16,
    "Minute": 12,
    "Second": 49,
    "Pad1": 0,
    "Nanoseconds": 0,
    "TimeZone": 2047,  # EFI_UNSPECIFIED_TIMEZONE
    "Daylight": 0,
    "Pad2": 0,
}

DEFAULT_CAPABILITIES: ArgData = {"Resolution": 0, "Accuracy": 0, "SetsToZero": 0}

# Variables the simulated store holds at power-on, with their data sizes.
DEFAULT_VARIABLES: Dict[str, int] = {
    "Boot0000": 92,
    "Boot0001": 118,
    "BootCurrent": 2,
    "BootOrder": 4,
    "ConIn": 80,
    "ConInDev": 80,
    "ConOut": 80,
    "ConOutDev": 80,
    "ErrOut": 80,
    "ErrOutDev": 80,
    "Key0000": 14,
    "Lang": 4,
    "LangCodes": 4,
    "OsIndicationsSupported": 8,
    "PlatformLang": 6,
    "PlatformLangCodes": 6,
    "SecureBoot": 1,
    "SetupMode": 1,
    "Timeout": 2,
    "db": 1600,
    "dbx": 76,
    "KEK": 1560,
    "PK": 820,
    "MokListRT": 1028,
    "SbatLevelRT": 18,
}


@dataclass(frozen=True)
class ServiceCall:
    service: str
    id: int
    in_args: Tuple[Argument, ...] = ()

    def arg(self, name: str) -> Optional[ArgData]:
        for arg_name, data in self.in_args:
            if arg_name == name:
                return data
        return None

    @property
    def variable_name(self) -> Optional[str]:
        data = self.arg("VariableName")
        return None if data is None else str(data.get("VariableName", ""))


@dataclass(frozen=True)
class ServiceResult:
    status: str = Status.SUCCESS
    out_args: Tuple[Argument, ...] = ()
    reset_triggered: bool = False


Handler = Callable[["ServiceTable", ServiceCall, "TraceSink"], ServiceResult]


# ---------------------------------------------------------------------------
# Call construction
# ---------------------------------------------------------------------------

def _variable_args(name: str) -> Tuple[Argument, ...]:
    return (
        ("VariableName", {"VariableName": name}),
        ("VendorGuid", {"VendorGuid": EFI_GLOBAL_VARIABLE_GUID}),
    )


def make_call(service: str, call_id: int, variable: Optional[str] = None, address: int = 0) -> ServiceCall:
    """Build a call with the canned IN arguments of `service`."""
    if service in (Service.GET_VARIABLE, Service.GET_NEXT_VARIABLE_NAME):
        in_args = _variable_args(variable or "")
    elif service == Service.SET_VARIABLE:
        in_args = _variable_args(variable or "") + (
            ("Attributes", {"Attributes": 0x7}),
            ("DataSize", {"DataSize": 8}),
        )
    elif service == Service.CONVERT_POINTER:
        in_args = (
            ("DebugDisposition", {"DebugDisposition": 0}),
            ("Address", {"Address": address}),
        )
    elif service == Service.SET_TIME:
        in_args = (("Time", dict(DEFAULT_TIME)),)
    elif service == Service.SET_WAKEUP_TIME:
        in_args = (("Enable", {"Enable": 1}), ("Time", dict(DEFAULT_TIME)))
    elif service == Service.SET_VIRTUAL_ADDRESS_MAP:
        in_args = (("VirtualMap", {"Offset": address, "DescriptorVersion": 1}),)
    elif service == Service.RESET_SYSTEM:
        in_args = (("ResetType", {"ResetType": 0, "ResetStatus": "EFI_SUCCESS", "DataSize": 0}),)
    elif service in (Service.UPDATE_CAPSULE, Service.QUERY_CAPSULE_CAPABILITIES):
        in_args = (("CapsuleHeaderArray", {"CapsuleCount": 0}),)
    elif service == Service.QUERY_VARIABLE_INFO:
        in_args = (("Attributes", {"Attributes": 0x7}),)
    else:
        in_args = ()
    return ServiceCall(service=str(service), id=call_id, in_args=in_args)


# ---------------------------------------------------------------------------
# Canned handlers
# ---------------------------------------------------------------------------

def _get_time(table, call, sink) -> ServiceResult:
    return ServiceResult(out_args=(("Time", dict(table.clock)), ("Capabilities", dict(DEFAULT_CAPABILITIES))))


def _set_time(table, call, sink) -> ServiceResult:
    time = call.arg("Time")
    if time:
        table.clock = dict(time)
    return ServiceResult()


def _get_wakeup_time(table, call, sink) -> ServiceResult:
    return ServiceResult(out_args=(("Enabled", {"Enabled": 0, "Pending": 0}), ("Time", dict(table.clock))))


def _set_wakeup_time(table, call, sink) -> ServiceResult:
    return ServiceResult()


def _convert_pointer(table, call, sink) -> ServiceResult:
    address = int((call.arg("Address") or {}).get("Address", 0))
    return ServiceResult(out_args=(("Address", {"Address": address + table.virtual_offset}),))


def _get_variable(table, call, sink) -> ServiceResult:
    size = table.variables.get(call.variable_name or "")
    if size is None:
        return ServiceResult(status=Status.NOT_FOUND, out_args=(("DataSize", {"DataSize": 0}),))
    return ServiceResult(out_args=(("DataSize", {"DataSize": size}),))


def _get_next_variable_name(table, call, sink) -> ServiceResult:
    names = sorted(table.variables)
    current = call.variable_name or ""
    following = [n for n in names if n > current] if current else names
    if not following:
        return ServiceResult(status=Status.NOT_FOUND)
    return ServiceResult(out_args=_variable_args(following[0]))


def _set_variable(table, call, sink) -> ServiceResult:
    name = call.variable_name or ""
    size = int((call.arg("DataSize") or {}).get("DataSize", 0))
    if size:
        table.variables[name] = size
    else:
        table.variables.pop(name, None)
    return ServiceResult()


def _get_next_high_monotonic_count(table, call, sink) -> ServiceResult:
    table.high_count += 1
    return ServiceResult(out_args=(("HighCount", {"HighCount": table.high_count}),))


def _reset_system(table, call, sink) -> ServiceResult:
    return ServiceResult(reset_triggered=True)


def _unsupported(table, call, sink) -> ServiceResult:
    return ServiceResult(status=Status.UNSUPPORTED)


def _query_variable_info(table, call, sink) -> ServiceResult:
    used = sum(table.variables.values())
    return ServiceResult(out_args=((
        "VariableInfo",
        {
            "MaximumVariableStorageSize": 0x40000,
            "RemainingVariableStorageSize": 0x40000 - used,
            "MaximumVariableSize": 0x8400,
        },
    ),))


# SetVirtualAddressMap is provided by the table module: its handler converts the table.
CANNED_HANDLERS: Mapping[str, Handler] = {
    Service.GET_TIME: _get_time,
    Service.SET_TIME: _set_time,
    Service.GET_WAKEUP_TIME: _get_wakeup_time,
    Service.SET_WAKEUP_TIME: _set_wakeup_time,
    Service.CONVERT_POINTER: _convert_pointer,
    Service.GET_VARIABLE: _get_variable,
    Service.GET_NEXT_VARIABLE_NAME: _get_next_variable_name,
    Service.SET_VARIABLE: _set_variable,
    Service.GET_NEXT_HIGH_MONOTONIC_COUNT: _get_next_high_monotonic_count,
    Service.RESET_SYSTEM: _reset_system,
    Service.UPDATE_CAPSULE: _unsupported,
    Service.QUERY_CAPSULE_CAPABILITIES: _unsupported,
    Service.QUERY_VARIABLE_INFO: _query_variable_info,
}

