"""
Tracer output.

Each argument of a hooked call becomes one or more log lines:

    [RTSTracer]{"service":"GetTime","id":0,"type":"OUT","argument":"Time","data":{...}}

- The JSON object text (prefix excluded) is compact and at most 255 characters.
- Key order is fixed: service, id, type, argument, part, data.
- Data too large for one object is split into several objects with ascending
  `part` (0, 1, ...); `part` is omitted when it is 0.
- Data values are integers or strings.

Sinks receive the lines; one sink has one writer.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Protocol, Union

from django.db import models

from .errors import OversizedValue, UnserializableValue
from .services import ArgData

TRACE_PREFIX = "[RTSTracer]"
MAX_RECORD_CHARS = 255


class RecordType(models.TextChoices):
    IN = "IN"
    OUT = "OUT"


@dataclass(frozen=True)
class TraceRecord:
    service: str
    id: int
    type: str
    argument: str
    data: ArgData = field(default_factory=dict)
    part: int = 0

    def to_object(self) -> Dict[str, object]:
        obj: Dict[str, object] = {
            "service": str(self.service),
            "id": self.id,
            "type": str(self.type),
            "argument": self.argument,
        }
        if self.part:
            obj["part"] = self.part
        obj["data"] = self.data
        return obj


def _dumps(obj: Dict[str, object]) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _check_values(data: ArgData) -> None:
    for key, value in data.items():
        if isinstance(value, bool) or not isinstance(value, (int, str)) or not isinstance(key, str):
            raise UnserializableValue(str(key), value)


def render_record(record: TraceRecord) -> str:
    return TRACE_PREFIX + _dumps(record.to_object())


def chunk_record(record: TraceRecord) -> List[TraceRecord]:
    """
    Split `record.data` into records whose JSON text fits `MAX_RECORD_CHARS`.

    Keys keep their order; each chunk takes as many consecutive keys as fit.

    Raises:
        UnserializableValue: a value is not an integer or a string.
        OversizedValue: a single entry is too large for a record of its own.
    """
    _check_values(record.data)
    whole = TraceRecord(record.service, record.id, record.type, record.argument, dict(record.data))
    if len(_dumps(whole.to_object())) <= MAX_RECORD_CHARS:
        return [whole]

    chunks: List[TraceRecord] = []
    current: Dict[str, object] = {}
    for key, value in record.data.items():
        candidate = dict(current)
        candidate[key] = value
        trial = TraceRecord(record.service, record.id, record.type, record.argument, candidate, len(chunks))
        if len(_dumps(trial.to_object())) <= MAX_RECORD_CHARS:
            current = candidate
            continue
        if not current:
            raise OversizedValue(key)
        chunks.append(TraceRecord(record.service, record.id, record.type, record.argument, current, len(chunks)))
        current = {key: value}
        alone = TraceRecord(record.service, record.id, record.type, record.argument, current, len(chunks))
        if len(_dumps(alone.to_object())) > MAX_RECORD_CHARS:
            raise OversizedValue(key)
    chunks.append(TraceRecord(record.service, record.id, record.type, record.argument, current, len(chunks)))
    return chunks


def emit_trace(record: TraceRecord) -> List[str]:
    """Render one logical argument record as `[RTSTracer]{...}` lines."""
    return [render_record(chunk) for chunk in chunk_record(record)]


# ---------------------------------------------------------------------------
# Sinks
# ---------------------------------------------------------------------------

class TraceSink(Protocol):
    def write_lines(self, lines: Iterable[str]) -> None: ...


class NullSink:
    def write_lines(self, lines: Iterable[str]) -> None:
        for _ in lines:
            pass


class ListSink:
    """Collects lines in memory."""

    def __init__(self) -> None:
        self.lines: List[str] = []

    def write_lines(self, lines: Iterable[str]) -> None:
        self.lines.extend(lines)


class FileSink:
    """Appends lines to a UTF-8 text file, one record per line."""

    def __init__(self, path: Union[str, os.PathLike]) -> None:
        self.path = Path(path)
        self._fh: Optional[object] = open(self.path, "w", encoding="utf-8", newline="\n")

    def write_lines(self, lines: Iterable[str]) -> None:
        for line in lines:
            self._fh.write(line + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "FileSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
