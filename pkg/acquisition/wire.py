"""
Acquisition wire format.

Framing
-------
Every message is `kind u8 | payload_len u32 | payload`, all integers
little-endian. Kinds:

    Hello (1)  magic "UEFO" | version u16 = 1 | page_size u32 | range_count u32
               | range_count x {start u64 | end u64 | purpose u8}
    Page  (2)  address u64 | timestamp_ns u64 | page data
    End   (3)  page_count u64 | digest[32]   (SHA-256 over page data in send order)

Purpose codes: 1 = SystemRam, 2 = Reserved. Range `end` is inclusive.

After End the receiver answers with its own End (pages received, recomputed
digest) so the agent knows the dump was taken over.

Limits
------
Payloads longer than `ACQUISITION_MAX_PAYLOAD_BYTES` (16 MiB by default) are
rejected with `LengthOverflow` before any payload byte is read.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, ClassVar, Dict, Optional, Tuple, Union

from django.conf import settings
from django.db import models

from memory.ranges import PAGE_SIZE, MemoryMap, MemoryRange, Purpose

from .errors import (
    BadMagic,
    LengthOverflow,
    MalformedPayload,
    PeerClosed,
    Truncated,
    UnknownKind,
    UnsupportedVersion,
)

MAGIC = b"UEFO"
VERSION = 1
DIGEST_SIZE = 32

_HEADER = struct.Struct("<BI")
_HELLO = struct.Struct("<4sHII")
_RANGE = struct.Struct("<QQB")
_PAGE = struct.Struct("<QQ")
_END = struct.Struct("<Q32s")

HEADER_SIZE = _HEADER.size


class MessageKind(models.IntegerChoices):
    HELLO = 1, "Hello"
    PAGE = 2, "Page"
    END = 3, "End"


_PURPOSE_CODES: Dict[Purpose, int] = {Purpose.SYSTEM_RAM: 1, Purpose.RESERVED: 2}
_PURPOSE_BY_CODE = {code: purpose for purpose, code in _PURPOSE_CODES.items()}


@dataclass(frozen=True)
class Hello:
    kind: ClassVar[MessageKind] = MessageKind.HELLO
    ranges: Tuple[MemoryRange, ...]
    page_size: int = PAGE_SIZE
    version: int = VERSION

    @classmethod
    def for_map(cls, memory_map: MemoryMap) -> "Hello":
        return cls(ranges=tuple(memory_map.ranges), page_size=memory_map.page_size)

    def memory_map(self) -> MemoryMap:
        return MemoryMap(ranges=self.ranges, page_size=self.page_size)


@dataclass(frozen=True)
class Page:
    kind: ClassVar[MessageKind] = MessageKind.PAGE
    address: int
    timestamp_ns: int
    data: bytes


@dataclass(frozen=True)
class End:
    kind: ClassVar[MessageKind] = MessageKind.END
    page_count: int
    digest: bytes


WireMessage = Union[Hello, Page, End]


def max_payload_bytes() -> int:
    return int(getattr(settings, "ACQUISITION_MAX_PAYLOAD_BYTES", 16 * 1024 * 1024))


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def _encode_payload(msg: WireMessage) -> bytes:
    if isinstance(msg, Hello):
        parts = [_HELLO.pack(MAGIC, msg.version, msg.page_size, len(msg.ranges))]
        for r in msg.ranges:
            parts.append(_RANGE.pack(r.start, r.end, _PURPOSE_CODES[Purpose(r.purpose)]))
        return b"".join(parts)
    if isinstance(msg, Page):
        return _PAGE.pack(msg.address, msg.timestamp_ns) + bytes(msg.data)
    if isinstance(msg, End):
        if len(msg.digest) != DIGEST_SIZE:
            raise MalformedPayload(f"End digest must be {DIGEST_SIZE} bytes, got {len(msg.digest)}")
        return _END.pack(msg.page_count, bytes(msg.digest))
    raise TypeError(f"not a wire message: {msg!r}")


def encode_message(msg: WireMessage) -> bytes:
    """Frame `msg` as `kind | payload_len | payload`."""
    payload = _encode_payload(msg)
    return _HEADER.pack(int(msg.kind), len(payload)) + payload


def encode_page_header(address: int, timestamp_ns: int, data_length: int) -> bytes:
    """Frame header plus fixed Page fields; the agent sends page data right after."""
    return _HEADER.pack(MessageKind.PAGE, _PAGE.size + data_length) + _PAGE.pack(address, timestamp_ns)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def decode_header(header: bytes, limit: Optional[int] = None) -> Tuple[int, int]:
    """
    Returns `(kind, payload_len)`.

    Raises:
        Truncated: fewer than 5 header bytes.
        UnknownKind: kind is not Hello/Page/End.
        LengthOverflow: payload_len above the configured limit.
    """
    if len(header) < HEADER_SIZE:
        raise Truncated(HEADER_SIZE, len(header))
    kind, length = _HEADER.unpack_from(header)
    if kind not in MessageKind.values:
        raise UnknownKind(kind)
    limit = max_payload_bytes() if limit is None else limit
    if length > limit:
        raise LengthOverflow(length, limit)
    return kind, length


def decode_payload(kind: int, payload: bytes) -> WireMessage:
    if kind == MessageKind.HELLO:
        if len(payload) < _HELLO.size:
            raise Truncated(_HELLO.size, len(payload))
        magic, version, page_size, count = _HELLO.unpack_from(payload)
        if magic != MAGIC:
            raise BadMagic(magic)
        if version != VERSION:
            raise UnsupportedVersion(version)
        needed = _HELLO.size + count * _RANGE.size
        if len(payload) < needed:
            raise Truncated(needed, len(payload))
        if len(payload) > needed:
            raise MalformedPayload(f"Hello has {len(payload) - needed} trailing bytes")
        ranges = []
        for i in range(count):
            start, end, code = _RANGE.unpack_from(payload, _HELLO.size + i * _RANGE.size)
            if code not in _PURPOSE_BY_CODE:
                raise MalformedPayload(f"range #{i} has unknown purpose code {code}")
            ranges.append(MemoryRange(start, end, _PURPOSE_BY_CODE[code]))
        return Hello(ranges=tuple(ranges), page_size=page_size, version=version)
    if kind == MessageKind.PAGE:
        if len(payload) < _PAGE.size:
            raise Truncated(_PAGE.size, len(payload))
        address, timestamp_ns = _PAGE.unpack_from(payload)
        return Page(address=address, timestamp_ns=timestamp_ns, data=bytes(payload[_PAGE.size:]))
    if kind == MessageKind.END:
        if len(payload) < _END.size:
            raise Truncated(_END.size, len(payload))
        if len(payload) > _END.size:
            raise MalformedPayload(f"End has {len(payload) - _END.size} trailing bytes")
        page_count, digest = _END.unpack(payload)
        return End(page_count=page_count, digest=digest)
    raise UnknownKind(kind)


def decode_message(buffer: bytes, limit: Optional[int] = None) -> Tuple[WireMessage, int]:
    """
    Decode the first frame in `buffer`.

    Returns:
        `(message, consumed)` where `consumed` is the frame length in bytes.

    Raises:
        BadMagic, UnknownKind, Truncated, LengthOverflow, MalformedPayload.
    """
    kind, length = decode_header(bytes(buffer[:HEADER_SIZE]), limit)
    end = HEADER_SIZE + length
    if len(buffer) < end:
        raise Truncated(end, len(buffer))
    return decode_payload(kind, bytes(buffer[HEADER_SIZE:end])), end


# ---------------------------------------------------------------------------
# Streams
# ---------------------------------------------------------------------------

def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_message(stream: BinaryIO, limit: Optional[int] = None) -> Optional[WireMessage]:
    """
    Read one frame from a buffered binary stream.

    Returns None on a clean end of stream (no byte of a new frame read).

    Raises:
        PeerClosed: the stream ended inside a frame.
        plus every `decode_message` error.
    """
    header = _read_exact(stream, HEADER_SIZE)
    if not header:
        return None
    if len(header) < HEADER_SIZE:
        raise PeerClosed(f"stream ended inside a frame header ({len(header)} of {HEADER_SIZE} bytes)")
    kind, length = decode_header(header, limit)
    payload = _read_exact(stream, length)
    if len(payload) < length:
        raise PeerClosed(f"stream ended inside a frame payload ({len(payload)} of {length} bytes)")
    return decode_payload(kind, payload)
