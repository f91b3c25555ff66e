"""
Acquisition agent.

`acquire()` connects to a receiver, announces the memory map (Hello), streams
every SystemRam page in strictly ascending address order with a fresh
monotonic timestamp (Page), and closes with the page count and SHA-256 digest
of all page data (End). It then waits for the receiver's End reply.

Sources
-------
Anything with a `map` and a `read_page(address) -> bytes` works as a source.
`ImageSource` wraps a `MemoryImage`; `PerturbedSource` models memory that the
acquisition itself alters while the traversal is in progress: pages below
`switch_address` come from the image before the alteration, the rest from the
image after it.
"""

from __future__ import annotations

import errno
import hashlib
import logging
import socket
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Protocol

from django.conf import settings

from core.config import Endpoint
from core.logging import bind_session
from memory.errors import MemoryModelError
from memory.image import MemoryImage, read_page
from memory.ranges import MemoryMap, MemoryRange

from .errors import AcquisitionIOError, ConnectionFailed, PeerClosed, ProtocolViolation
from .wire import End, Hello, encode_message, encode_page_header, read_message

logger = logging.getLogger("workbench.acquisition")

_PEER_GONE = {errno.EPIPE, errno.ECONNRESET, errno.ENOTCONN}


class PageSource(Protocol):
    map: MemoryMap

    def read_page(self, address: int) -> bytes: ...


@dataclass(frozen=True)
class ImageSource:
    image: MemoryImage

    @property
    def map(self) -> MemoryMap:
        return self.image.map

    def read_page(self, address: int) -> bytes:
        return read_page(self.image, address)


@dataclass(frozen=True)
class PerturbedSource:
    before: MemoryImage
    after: MemoryImage
    switch_address: int

    def __post_init__(self) -> None:
        if self.before.map != self.after.map:
            raise MemoryModelError("before/after images must share one memory map")

    @classmethod
    def at_fraction(cls, before: MemoryImage, after: MemoryImage, fraction: float) -> "PerturbedSource":
        """Switch once `fraction` of the SystemRam pages have been traversed."""
        return cls(before, after, switch_address_for(before.map, fraction))

    @property
    def map(self) -> MemoryMap:
        return self.before.map

    def read_page(self, address: int) -> bytes:
        image = self.before if address < self.switch_address else self.after
        return read_page(image, address)


def switch_address_for(memory_map: MemoryMap, fraction: float) -> int:
    """Address of the SystemRam page at index floor(fraction * pages); `top` at 1.0."""
    if not 0.0 <= fraction <= 1.0:
        raise MemoryModelError(f"switch fraction must be within [0, 1], got {fraction}")
    index = int(fraction * memory_map.system_ram_pages)
    for r in memory_map.system_ram():
        if index < r.page_count:
            return r.start + index * memory_map.page_size
        index -= r.page_count
    return memory_map.top


def as_source(source: "MemoryImage | PageSource") -> PageSource:
    return ImageSource(source) if isinstance(source, MemoryImage) else source


@dataclass(frozen=True)
class AcquisitionSummary:
    pages_sent: int
    bytes_sent: int
    first_ts_ns: int
    last_ts_ns: int
    digest: bytes
    # Digest the receiver recomputed, from its End reply.
    receiver_digest: Optional[bytes] = None
    session_id: str = ""

    @property
    def atomicity_window_ns(self) -> int:
        return self.last_ts_ns - self.first_ts_ns

    @property
    def confirmed(self) -> bool:
        return self.receiver_digest == self.digest

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "pages_sent": self.pages_sent,
            "bytes_sent": self.bytes_sent,
            "first_ts_ns": self.first_ts_ns,
            "last_ts_ns": self.last_ts_ns,
            "atomicity_window_ns": self.atomicity_window_ns,
            "digest": self.digest.hex(),
            "confirmed": self.confirmed,
        }


RangeFilter = Callable[[MemoryRange], bool]


def _pages(memory_map: MemoryMap, ranges_filter: Optional[RangeFilter]) -> Iterator[int]:
    for r in memory_map.system_ram():
        if ranges_filter is None or ranges_filter(r):
            yield from r.page_addresses()


def _connect(endpoint: Endpoint, timeout: float) -> socket.socket:
    try:
        return socket.create_connection(endpoint.as_tuple(), timeout=timeout)
    except OSError as exc:
        raise ConnectionFailed(f"cannot connect to {endpoint}: {exc}") from exc


def acquire(
    source: "MemoryImage | PageSource",
    endpoint: Endpoint,
    *,
    ranges_filter: Optional[RangeFilter] = None,
    throttle: Optional[float] = None,
    clock: Callable[[], int] = time.monotonic_ns,
    session_id: Optional[str] = None,
) -> AcquisitionSummary:
    """
    Stream `source` to the receiver at `endpoint`.

    Args:
        ranges_filter: optional predicate selecting which SystemRam ranges to send.
        throttle: optional cap in pages per second.
        clock: monotonic nanosecond clock stamped onto each page.

    Raises:
        ConnectionFailed: the TCP connection could not be established.
        PeerClosed: the receiver went away before confirming the dump.
        AcquisitionIOError: any other socket failure.
    """
    source = as_source(source)
    memory_map = source.map
    connect_timeout = float(getattr(settings, "ACQUISITION_CONNECT_TIMEOUT_SEC", 10.0))
    socket_timeout = float(getattr(settings, "ACQUISITION_SOCKET_TIMEOUT_SEC", 60.0))

    with bind_session(session_id) as sid:
        sock = _connect(endpoint, connect_timeout)
        sock.settimeout(socket_timeout)
        digest = hashlib.sha256()
        pages = 0
        first_ts = last_ts = 0
        started = time.monotonic()
        try:
            with sock:
                sock.sendall(encode_message(Hello.for_map(memory_map)))
                for address in _pages(memory_map, ranges_filter):
                    data = source.read_page(address)
                    ts = clock()
                    sock.sendall(encode_page_header(address, ts, len(data)) + data)
                    digest.update(data)
                    if not pages:
                        first_ts = ts
                    last_ts = ts
                    pages += 1
                    if throttle:
                        ahead = pages / throttle - (time.monotonic() - started)
                        if ahead > 0:
                            time.sleep(ahead)
                sock.sendall(encode_message(End(page_count=pages, digest=digest.digest())))
                sock.shutdown(socket.SHUT_WR)
                with sock.makefile("rb") as reader:
                    reply = read_message(reader)
        except socket.timeout as exc:
            raise AcquisitionIOError(f"receiver did not answer within {socket_timeout}s") from exc
        except OSError as exc:
            if isinstance(exc, ConnectionError) or exc.errno in _PEER_GONE:
                raise PeerClosed(f"receiver closed the connection: {exc}") from exc
            raise AcquisitionIOError(str(exc)) from exc

        if not isinstance(reply, End):
            raise PeerClosed("receiver closed the connection without confirming the dump")
        if reply.page_count != pages:
            raise ProtocolViolation(f"receiver confirmed {reply.page_count} pages, {pages} were sent")

        summary = AcquisitionSummary(
            pages_sent=pages,
            bytes_sent=pages * memory_map.page_size,
            first_ts_ns=first_ts,
            last_ts_ns=last_ts,
            digest=digest.digest(),
            receiver_digest=reply.digest,
            session_id=sid,
        )
        log = logger.info if summary.confirmed else logger.warning
        log(
            "acquisition finished",
            extra={"event_fields": {
                "endpoint": str(endpoint),
                "pages": pages,
                "window_ns": summary.atomicity_window_ns,
                "confirmed": summary.confirmed,
            }},
        )
        return summary
