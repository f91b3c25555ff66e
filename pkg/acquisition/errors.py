"""
Errors raised by the acquisition path.

Codec errors (`BadMagic`, `UnknownKind`, `Truncated`, `LengthOverflow`) come from
frame decoding; transport errors (`ConnectionFailed`, `PeerClosed`,
`AcquisitionIOError`) from the agent and receiver sockets; `ProtocolViolation`
from the receiver's session checks.
"""

from __future__ import annotations

from typing import Optional

from core.errors import WorkbenchError


class ProtocolError(WorkbenchError):
    """Base class for acquisition failures."""


# ---------------------------------------------------------------------------
# Codec
# ---------------------------------------------------------------------------

class BadMagic(ProtocolError):
    def __init__(self, magic: bytes) -> None:
        self.magic = magic
        super().__init__(f"bad Hello magic {magic!r}")


class UnsupportedVersion(ProtocolError):
    def __init__(self, version: int) -> None:
        self.version = version
        super().__init__(f"unsupported protocol version {version}")


class UnknownKind(ProtocolError):
    def __init__(self, kind: int) -> None:
        self.kind = kind
        super().__init__(f"unknown message kind {kind}")


class Truncated(ProtocolError):
    def __init__(self, needed: int, available: int) -> None:
        self.needed = needed
        self.available = available
        super().__init__(f"truncated frame: need {needed} bytes, have {available}")


class LengthOverflow(ProtocolError):
    def __init__(self, length: int, limit: int) -> None:
        self.length = length
        self.limit = limit
        super().__init__(f"payload length {length} exceeds limit {limit}")


class MalformedPayload(ProtocolError):
    """Payload length is inconsistent with its own fields."""


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------

class ConnectionFailed(ProtocolError):
    stage = "acquire"


class PeerClosed(ProtocolError):
    stage = "acquire"


class AcquisitionIOError(ProtocolError):
    """Socket or file IO failed for a reason other than the peer going away."""


# ---------------------------------------------------------------------------
# Receiver
# ---------------------------------------------------------------------------

class ProtocolViolation(ProtocolError):
    stage = "receive"

    def __init__(self, message: str, address: Optional[int] = None) -> None:
        self.address = address
        where = f" (address 0x{address:x})" if address is not None else ""
        super().__init__(f"{message}{where}")


class DigestMismatch(ProtocolError):
    """Recomputed digest differs from the End digest; recorded, not raised by the receiver."""

    def __init__(self, expected: str, actual: str) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"digest mismatch: expected {expected}, computed {actual}")


class MissingMetadata(ProtocolError):
    def __init__(self, path: object) -> None:
        self.path = path
        super().__init__(f"dump metadata missing or unreadable: {path}")
