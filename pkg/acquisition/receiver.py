"""
Acquisition receiver (forensic workstation side).

Sessions
--------
Each TCP connection is one `ReceiverSession`: Hello, then Pages in strictly
ascending address order, then End. The session writes into `<name>.raw.part`
(preallocated to `map.top` bytes, so non-received bytes read as zero) and, on
End, renames it to `<name>.raw` and writes `<name>.meta.json`. A session that
fails leaves no `.raw` behind.

Checks (ProtocolViolation)
--------------------------
- the first message is Hello and its ranges form a valid map
- Page address is page-aligned, inside an announced SystemRam range and
  greater than the previous one; data is exactly one page; timestamps never
  go backwards
- End.page_count equals the number of pages received

A digest mismatch is not a violation: the dump is kept with
`digest_verified = false` and a WARNING is logged.

Server
------
`ReceiverServer` is a `socketserver.ThreadingTCPServer`; concurrent sessions run
in their own threads and write their own files. `serve_one()` handles a single
connection in the calling thread (CLI one-shot, pipeline, tests).
"""

from __future__ import annotations

import hashlib
import logging
import os
import socket
import socketserver
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from django.conf import settings
from django.utils import timezone

from core.config import Endpoint
from core.logging import bind_session
from memory.errors import MemoryModelError
from memory.ranges import MemoryMap, validate_map
from memory.sidecar import map_to_dict

from .artifacts import DumpArtifact, write_metadata
from .errors import AcquisitionIOError, PeerClosed, ProtocolError, ProtocolViolation
from .wire import End, Hello, Page, encode_message, max_payload_bytes, read_message

logger = logging.getLogger("workbench.acquisition")

PathLike = Union[str, os.PathLike]


class ReceiverSession:
    """One agent connection, processed sequentially."""

    def __init__(self, out_dir: PathLike, name: str, session_id: str, peer: str = "") -> None:
        self.out_dir = Path(out_dir)
        self.name = name
        self.session_id = session_id
        self.peer = peer
        self.raw_path = self.out_dir / f"{name}.raw"
        self.meta_path = self.out_dir / f"{name}.meta.json"
        self._part_path = self.out_dir / f"{name}.raw.part"
        self._map: Optional[MemoryMap] = None
        self._digest = hashlib.sha256()
        self._pages = 0
        self._last_address = -1
        self._first_ts: Optional[int] = None
        self._last_ts: Optional[int] = None
        self._runs: List[List[int]] = []

    # -- message handlers --------------------------------------------------

    def _on_hello(self, hello: Hello) -> MemoryMap:
        memory_map = hello.memory_map()
        try:
            validate_map(memory_map)
        except MemoryModelError as exc:
            raise ProtocolViolation(f"Hello announces an invalid map: {exc}") from exc
        return memory_map

    def _check_page(self, page: Page) -> None:
        memory_map = self._map
        address = page.address
        if address % memory_map.page_size:
            raise ProtocolViolation("page address not aligned", address)
        if address <= self._last_address:
            raise ProtocolViolation("page address not above the previous one", address)
        if not memory_map.is_system_page(address):
            raise ProtocolViolation("page outside the announced SystemRam ranges", address)
        if len(page.data) != memory_map.page_size:
            raise ProtocolViolation(f"page carries {len(page.data)} bytes", address)
        if self._last_ts is not None and page.timestamp_ns < self._last_ts:
            raise ProtocolViolation("page timestamp went backwards", address)

    def _record_run(self, address: int) -> None:
        if self._runs and self._runs[-1][1] == address:
            self._runs[-1][1] = address + self._map.page_size
        else:
            self._runs.append([address, address + self._map.page_size])

    # -- main loop ---------------------------------------------------------

    def run(self, rfile, reply) -> DumpArtifact:
        """
        Consume one session from `rfile`; `reply(bytes)` sends the End answer.

        Raises:
            ProtocolViolation, PeerClosed, codec errors, AcquisitionIOError.
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        started_at = timezone.now()
        limit = max_payload_bytes()
        try:
            first = read_message(rfile, limit)
            if first is None:
                raise PeerClosed("connection closed before Hello")
            if not isinstance(first, Hello):
                raise ProtocolViolation(f"expected Hello, got {first.kind.label}")
            self._map = self._on_hello(first)

            with open(self._part_path, "wb+") as fh:
                fh.truncate(self._map.top)
                while True:
                    msg = read_message(rfile, limit)
                    if msg is None:
                        raise PeerClosed("connection closed before End")
                    if isinstance(msg, Page):
                        self._check_page(msg)
                        fh.seek(msg.address)
                        fh.write(msg.data)
                        self._digest.update(msg.data)
                        self._record_run(msg.address)
                        if self._first_ts is None:
                            self._first_ts = msg.timestamp_ns
                        self._last_ts = msg.timestamp_ns
                        self._last_address = msg.address
                        self._pages += 1
                    elif isinstance(msg, End):
                        end = msg
                        break
                    else:
                        raise ProtocolViolation("second Hello in one session")
            if end.page_count != self._pages:
                raise ProtocolViolation(f"End announces {end.page_count} pages, received {self._pages}")
            os.replace(self._part_path, self.raw_path)
        except BaseException:
            self._part_path.unlink(missing_ok=True)
            raise

        received = self._digest.digest()
        verified = received == end.digest
        first_ts = self._first_ts or 0
        last_ts = self._last_ts if self._last_ts is not None else first_ts
        metadata: Dict[str, Any] = {
            "name": self.name,
            "session_id": self.session_id,
            "peer": self.peer,
            "raw_dump": self.raw_path.name,
            "map": map_to_dict(self._map),
            "page_size": self._map.page_size,
            "pages_received": self._pages,
            "bytes_received": self._pages * self._map.page_size,
            "page_runs": self._runs,
            "first_ts_ns": first_ts,
            "last_ts_ns": last_ts,
            "atomicity_window_ns": last_ts - first_ts,
            "expected_digest": end.digest.hex(),
            "received_digest": received.hex(),
            "digest_verified": verified,
            "started_at": started_at.isoformat(),
            "finished_at": timezone.now().isoformat(),
        }
        write_metadata(self.meta_path, metadata)

        try:
            reply(encode_message(End(page_count=self._pages, digest=received)))
        except OSError:
            # The dump is complete on disk; a vanished agent only loses the confirmation.
            logger.warning("could not confirm dump to agent", extra={"event_fields": {"name": self.name}})

        fields = {
            "name": self.name,
            "peer": self.peer,
            "pages": self._pages,
            "window_ns": last_ts - first_ts,
            "digest_verified": verified,
        }
        if verified:
            logger.info("dump received", extra={"event_fields": fields})
        else:
            logger.warning("dump received with digest mismatch", extra={"event_fields": fields})

        return DumpArtifact(
            raw_dump_path=self.raw_path,
            metadata_path=self.meta_path,
            atomicity_window_ns=last_ts - first_ts,
            digest_verified=verified,
            name=self.name,
            session_id=self.session_id,
            pages_received=self._pages,
            digest=received.hex(),
        )


def _peer_label(peer: Any) -> str:
    if isinstance(peer, tuple) and len(peer) >= 2:
        return f"{peer[0]}:{peer[1]}"
    return str(peer or "")


class ReceiverHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        try:
            self.server.run_session(self.request, self.client_address)
        except (ProtocolError, OSError):
            # Already logged by run_session; the server keeps accepting.
            pass


class ReceiverServer(socketserver.ThreadingTCPServer):
    """
    Receives dumps into `out_dir`.

    Every session is named `name` when given (one-shot use), otherwise
    `<prefix>-<session id>` so concurrent sessions never share files.
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, listen: Endpoint, out_dir: PathLike, *, name: Optional[str] = None, prefix: str = "dump") -> None:
        self.out_dir = Path(out_dir)
        self.name = name
        self.prefix = prefix
        self.artifacts: List[DumpArtifact] = []
        self.failures: List[Tuple[str, Exception]] = []
        self._lock = threading.Lock()
        super().__init__(listen.as_tuple(), ReceiverHandler)

    @property
    def endpoint(self) -> Endpoint:
        host, port = self.server_address[:2]
        return Endpoint(host, port)

    def run_session(self, conn: socket.socket, peer: Any) -> DumpArtifact:
        timeout = float(getattr(settings, "ACQUISITION_SOCKET_TIMEOUT_SEC", 60.0))
        conn.settimeout(timeout)
        with bind_session() as sid:
            name = self.name or f"{self.prefix}-{sid}"
            session = ReceiverSession(self.out_dir, name, sid, _peer_label(peer))
            logger.info("session started", extra={"event_fields": {"name": name, "peer": session.peer}})
            try:
                with conn.makefile("rb") as rfile:
                    artifact = session.run(rfile, conn.sendall)
            except socket.timeout as exc:
                error: Exception = AcquisitionIOError(f"session timed out after {timeout}s")
                self._fail(name, error)
                raise error from exc
            except (ProtocolError, OSError) as exc:
                self._fail(name, exc)
                raise
            with self._lock:
                self.artifacts.append(artifact)
            return artifact

    def _fail(self, name: str, exc: Exception) -> None:
        logger.warning(
            "session failed",
            extra={"event_fields": {"name": name, "error": type(exc).__name__, "detail": str(exc)}},
        )
        with self._lock:
            self.failures.append((name, exc))

    def serve_one(self, timeout: Optional[float] = None) -> DumpArtifact:
        """
        Accept exactly one connection and process it in the calling thread.

        Raises:
            AcquisitionIOError: no agent connected within `timeout` seconds.
            plus every session error.
        """
        self.socket.settimeout(timeout)
        try:
            conn, peer = self.socket.accept()
        except socket.timeout as exc:
            raise AcquisitionIOError(f"no agent connected within {timeout}s") from exc
        with conn:
            return self.run_session(conn, peer)

    def start_in_thread(self) -> threading.Thread:
        """Run `serve_forever` in a daemon thread (stop with `shutdown()`)."""
        thread = threading.Thread(target=self.serve_forever, name="workbench-receiver", daemon=True)
        thread.start()
        return thread


def receive(listen: Endpoint, out_dir: PathLike, *, name: Optional[str] = None, timeout: Optional[float] = None) -> DumpArtifact:
    """Listen on `listen`, receive one dump into `out_dir` and return its artifact."""
    with ReceiverServer(listen, out_dir, name=name) as server:
        logger.info("receiver listening", extra={"event_fields": {"listen": str(server.endpoint)}})
        return server.serve_one(timeout)
