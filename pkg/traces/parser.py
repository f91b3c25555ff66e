"""
Lenient RTS trace log parser.

Input is console text: tracer records (`[RTSTracer]{...}`) mixed with anything
else the machine printed. Lines without the prefix are ignored. A record may
span several lines; it ends where its braces balance. Continuation lines must
look like record content (quotes, braces, numbers, literals); any other line is
noise and leaves an open record unterminated, as does exceeding
`MAX_PENDING_LINES` or `MAX_PENDING_CHARS`. Record bodies are JSON,
or Python-literal dicts with single quotes as older tracer builds printed them.

Nothing here raises on bad input: malformed records become `ParseIssue`s
carrying the line number where the record started.

The misspelled key `argmuent` is accepted as `argument`.
"""

from __future__ import annotations

import ast
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Tuple, Union

from rts.tracing import TRACE_PREFIX, RecordType, TraceRecord

logger = logging.getLogger("workbench.traces")

_ARGUMENT_KEYS = ("argument", "argmuent")

# A pending record gives up after this many continuation lines or characters.
MAX_PENDING_LINES = 64
MAX_PENDING_CHARS = 16 * 1024

# Record values are scalars, so `[` never continues a body; kernel timestamps start with it.
_CONTINUATION_START = frozenset("'\"{},:-0123456789")
_LITERALS = ("true", "false", "null", "True", "False", "None")


@dataclass(frozen=True)
class ParseIssue:
    line: Optional[int]
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.message}"


class _BraceScanner:
    """Tracks quotes and brace depth across the lines of one pending record."""

    def __init__(self) -> None:
        self.depth = 0
        self.quote: Optional[str] = None
        self.escaped = False

    def feed(self, text: str) -> int:
        """Index in `text` of the brace closing the record, or -1."""
        for i, ch in enumerate(text):
            if self.quote:
                if self.escaped:
                    self.escaped = False
                elif ch == "\\":
                    self.escaped = True
                elif ch == self.quote:
                    self.quote = None
            elif ch in ("'", '"'):
                self.quote = ch
            elif ch == "{":
                self.depth += 1
            elif ch == "}":
                self.depth -= 1
                if self.depth == 0:
                    return i
        return -1


def _continues_record(line: str) -> bool:
    """Whether an unprefixed line can be part of a pending record body."""
    stripped = line.strip()
    if not stripped:
        return True
    return stripped[0] in _CONTINUATION_START or stripped.startswith(_LITERALS)


def _load_object(text: str) -> Any:
    try:
        return json.loads(text)
    except ValueError:
        pass
    return ast.literal_eval(text)


def _is_scalar(value: Any) -> bool:
    return isinstance(value, (int, str)) and not isinstance(value, bool)


def _to_record(obj: Any) -> Tuple[Optional[TraceRecord], str]:
    if not isinstance(obj, dict):
        return None, "record is not an object"
    service = obj.get("service")
    record_id = obj.get("id")
    record_type = obj.get("type")
    argument = next((obj[k] for k in _ARGUMENT_KEYS if k in obj), None)
    data = obj.get("data")
    part = obj.get("part", 0)
    if not isinstance(service, str) or not service:
        return None, "missing or invalid 'service'"
    if not isinstance(record_id, int) or isinstance(record_id, bool) or record_id < 0:
        return None, "missing or invalid 'id'"
    if record_type not in RecordType.values:
        return None, "missing or invalid 'type'"
    if not isinstance(argument, str):
        return None, "missing or invalid 'argument'"
    if not isinstance(data, dict) or not all(isinstance(k, str) and _is_scalar(v) for k, v in data.items()):
        return None, "missing or invalid 'data'"
    if not isinstance(part, int) or isinstance(part, bool) or part < 0:
        return None, "invalid 'part'"
    return TraceRecord(service, record_id, record_type, argument, dict(data), part), ""


def _parse_body(body: str, line: int, records: List[TraceRecord], issues: List[ParseIssue]) -> None:
    try:
        obj = _load_object(body)
    except Exception as exc:  # literal_eval raises a wide range of errors on junk
        issues.append(ParseIssue(line, f"malformed record: {type(exc).__name__}"))
        return
    record, problem = _to_record(obj)
    if record is None:
        issues.append(ParseIssue(line, problem))
    else:
        records.append(record)


def _decode(raw: Union[str, bytes]) -> str:
    if isinstance(raw, bytes):
        return raw.decode("utf-8", errors="replace")
    return str(raw)


@dataclass
class _PendingRecord:
    line: int
    parts: List[str] = field(default_factory=list)
    chars: int = 0
    scanner: _BraceScanner = field(default_factory=_BraceScanner)

    def feed(self, text: str) -> Optional[str]:
        """Add `text`; the complete body once its braces balance, else None."""
        end = self.scanner.feed(text)
        if end >= 0:
            self.parts.append(text[: end + 1])
            return "\n".join(self.parts)
        self.parts.append(text)
        self.chars += len(text)
        return None

    def exhausted(self) -> bool:
        return len(self.parts) > MAX_PENDING_LINES or self.chars > MAX_PENDING_CHARS


def parse_log(lines: Iterable[Union[str, bytes]]) -> Tuple[List[TraceRecord], List[ParseIssue]]:
    """Return the tracer records found in `lines` and the issues met on the way."""
    records: List[TraceRecord] = []
    issues: List[ParseIssue] = []
    pending: Optional[_PendingRecord] = None

    def abandon() -> None:
        issues.append(ParseIssue(pending.line, "record not terminated"))

    for lineno, raw in enumerate(lines, start=1):
        line = _decode(raw).rstrip("\r\n")
        index = line.find(TRACE_PREFIX)
        if index >= 0:
            if pending is not None:
                abandon()
                pending = None
            body = line[index + len(TRACE_PREFIX):].lstrip()
            if not body.startswith("{"):
                issues.append(ParseIssue(lineno, "record does not start with '{'"))
                continue
            pending = _PendingRecord(lineno)
        elif pending is not None and _continues_record(line):
            body = line
        else:
            # Console noise; it also ends any record still open.
            if pending is not None:
                abandon()
                pending = None
            continue

        complete = pending.feed(body)
        if complete is not None:
            _parse_body(complete, pending.line, records, issues)
            pending = None
        elif pending.exhausted():
            abandon()
            pending = None

    if pending is not None:
        abandon()
    if issues:
        logger.warning(
            "trace parse issues",
            extra={"event_fields": {"records": len(records), "issues": len(issues), "first": str(issues[0])}},
        )
    return records, issues


def parse_file(path) -> Tuple[List[TraceRecord], List[ParseIssue]]:
    with open(path, "rb") as fh:
        return parse_log(fh)
