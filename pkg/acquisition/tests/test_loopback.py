"""
Agent / receiver loopback tests.

What these tests verify
-----------------------
- End-to-end fidelity: the received raw dump is byte-identical to
  `write_raw_dump` of the source image (Reserved range and hole zero).
- Metadata: page count, digest_verified, atomicity window, page runs.
- Receiver checks: a descending page address is a ProtocolViolation and leaves
  no dump behind; a page tampered in flight yields digest_verified = false.
- Agent failures: refused connection -> ConnectionFailed; receiver closing
  after Hello -> PeerClosed.
- `PerturbedSource` serves pages below the switch from the "before" image.
- Two concurrent sessions write separate, correct dumps.

Notes
-----
- Images use a small VM-shaped map; the 2 GiB run is gated on
  WORKBENCH_FULL_SCALE=1.
"""

from __future__ import annotations

import hashlib
import json
import os
import socket
import tempfile
import threading
import time
import unittest
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from django.test import SimpleTestCase

from acquisition.agent import PerturbedSource, acquire, switch_address_for
from acquisition.artifacts import DumpArtifact, atomicity_window, load_artifact, verify_artifact
from acquisition.errors import (
    AcquisitionIOError,
    ConnectionFailed,
    DigestMismatch,
    MissingMetadata,
    PeerClosed,
    ProtocolViolation,
)
from acquisition.receiver import ReceiverServer, receive
from acquisition.wire import End, Hello, Page, encode_message, read_message
from core.config import Endpoint
from memory.fixtures import single_range_map, vm_map
from memory.footprint import FillMode, FootprintProfile, OverwriteRegion, apply_footprint
from memory.image import new_image, write_raw_dump
from memory.ranges import MemoryMap, MemoryRange, Purpose

PAGE = 4096
LOCAL = Endpoint("127.0.0.1", 0)


def small_vm_map() -> MemoryMap:
    return MemoryMap(ranges=(
        MemoryRange(0, 4 * PAGE - 1, Purpose.SYSTEM_RAM),
        MemoryRange(4 * PAGE, 6 * PAGE - 1, Purpose.RESERVED),
        MemoryRange(8 * PAGE, 24 * PAGE - 1, Purpose.SYSTEM_RAM),
    ))


class LoopbackMixin:
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.pool = ThreadPoolExecutor(max_workers=2)
        self.addCleanup(self.pool.shutdown)

    def start_one(self, name: str):
        server = ReceiverServer(LOCAL, self.dir / "out", name=name)
        self.addCleanup(server.server_close)
        return server, self.pool.submit(server.serve_one, 10)

    def send_frames(self, endpoint: Endpoint, frames):
        with socket.create_connection(endpoint.as_tuple(), timeout=10) as sock:
            for frame in frames:
                sock.sendall(frame)
            try:
                sock.shutdown(socket.SHUT_WR)
                with sock.makefile("rb") as reader:
                    return read_message(reader)
            except (ConnectionError, PeerClosed):
                return None


class LoopbackTests(LoopbackMixin, SimpleTestCase):
    def test_received_dump_equals_source(self):
        image = new_image(small_vm_map(), seed=21)
        server, future = self.start_one("Q1")
        summary = acquire(image, server.endpoint)
        artifact = future.result(timeout=10)

        self.assertEqual(summary.pages_sent, 4 + 16)
        self.assertEqual(summary.bytes_sent, 20 * PAGE)
        self.assertTrue(summary.confirmed)
        reference = write_raw_dump(image, self.dir / "reference.raw")
        self.assertEqual(artifact.raw_dump_path.read_bytes(), reference.read_bytes())
        self.assertTrue(artifact.digest_verified)
        self.assertEqual(artifact.digest, summary.digest.hex())
        self.assertGreaterEqual(atomicity_window(artifact), 0)
        self.assertFalse((self.dir / "out" / "Q1.raw.part").exists())

        meta = json.loads(artifact.metadata_path.read_text())
        self.assertEqual(meta["pages_received"], 20)
        self.assertEqual(meta["page_runs"], [[0, 4 * PAGE], [8 * PAGE, 24 * PAGE]])
        self.assertEqual(meta["map"]["ranges"][1]["purpose"], "Reserved")
        self.assertTrue(verify_artifact(artifact))
        self.assertEqual(load_artifact(artifact.metadata_path), artifact)

    def test_single_page_window_is_zero(self):
        server, future = self.start_one("one")
        summary = acquire(new_image(single_range_map(1), 0), server.endpoint)
        artifact = future.result(timeout=10)
        self.assertEqual(summary.pages_sent, 1)
        self.assertEqual(summary.first_ts_ns, summary.last_ts_ns)
        self.assertEqual(atomicity_window(artifact), 0)

    def test_timestamps_come_from_clock(self):
        ticks = iter(range(1000, 10**6, 250))
        server, future = self.start_one("clock")
        summary = acquire(new_image(single_range_map(5), 0), server.endpoint, clock=lambda: next(ticks))
        artifact = future.result(timeout=10)
        self.assertEqual((summary.first_ts_ns, summary.last_ts_ns), (1000, 2000))
        self.assertEqual(artifact.atomicity_window_ns, 1000)

    def test_ranges_filter_sends_selected_ranges(self):
        image = new_image(small_vm_map(), seed=2)
        server, future = self.start_one("low")
        summary = acquire(image, server.endpoint, ranges_filter=lambda r: r.start == 0)
        artifact = future.result(timeout=10)
        self.assertEqual(summary.pages_sent, 4)
        data = artifact.raw_dump_path.read_bytes()
        self.assertEqual(len(data), 24 * PAGE)
        self.assertEqual(data[:4 * PAGE], image.content[:4 * PAGE].tobytes())
        self.assertEqual(data[8 * PAGE:], bytes(16 * PAGE))
        self.assertTrue(verify_artifact(artifact))

    def test_perturbed_source(self):
        m = single_range_map(8)
        before = new_image(m, seed=1)
        profile = FootprintProfile(overwrite_regions=(OverwriteRegion(0, 8 * PAGE, FillMode.ZERO),))
        after = apply_footprint(before, profile, seed=0)
        source = PerturbedSource.at_fraction(before, after, 0.5)
        self.assertEqual(source.switch_address, 4 * PAGE)
        server, future = self.start_one("uf")
        acquire(source, server.endpoint)
        data = future.result(timeout=10).raw_dump_path.read_bytes()
        self.assertEqual(data[:4 * PAGE], before.content[:4 * PAGE].tobytes())
        self.assertEqual(data[4 * PAGE:], bytes(4 * PAGE))

    def test_switch_address_crosses_ranges(self):
        m = small_vm_map()
        self.assertEqual(switch_address_for(m, 0.0), 0)
        self.assertEqual(switch_address_for(m, 0.25), 8 * PAGE)
        self.assertEqual(switch_address_for(m, 1.0), m.top)


class ReceiverCheckTests(LoopbackMixin, SimpleTestCase):
    def test_descending_address_is_violation(self):
        m = single_range_map(4)
        server, future = self.start_one("bad")
        reply = self.send_frames(server.endpoint, [
            encode_message(Hello.for_map(m)),
            encode_message(Page(PAGE, 1, bytes(PAGE))),
            encode_message(Page(0, 2, bytes(PAGE))),
        ])
        self.assertIsNone(reply)
        with self.assertRaises(ProtocolViolation) as ctx:
            future.result(timeout=10)
        self.assertEqual(ctx.exception.address, 0)
        self.assertEqual(list((self.dir / "out").glob("bad.raw*")), [])

    def test_unannounced_address_is_violation(self):
        server, future = self.start_one("hole")
        self.send_frames(server.endpoint, [
            encode_message(Hello.for_map(small_vm_map())),
            encode_message(Page(4 * PAGE, 1, bytes(PAGE))),
        ])
        with self.assertRaises(ProtocolViolation):
            future.result(timeout=10)

    def test_page_count_mismatch_is_violation(self):
        server, future = self.start_one("count")
        self.send_frames(server.endpoint, [
            encode_message(Hello.for_map(single_range_map(1))),
            encode_message(End(3, hashlib.sha256(b"").digest())),
        ])
        with self.assertRaises(ProtocolViolation):
            future.result(timeout=10)

    def test_tampered_page_is_recorded(self):
        image = new_image(single_range_map(4), seed=8)
        pages = [image.content[a:a + PAGE].tobytes() for a in range(0, 4 * PAGE, PAGE)]
        digest = hashlib.sha256(b"".join(pages)).digest()
        tampered = bytearray(pages[2])
        tampered[100] ^= 0xFF
        frames = [encode_message(Hello.for_map(image.map))]
        for i, data in enumerate(pages):
            frames.append(encode_message(Page(i * PAGE, i, bytes(tampered) if i == 2 else data)))
        frames.append(encode_message(End(4, digest)))

        server, future = self.start_one("tampered")
        reply = self.send_frames(server.endpoint, frames)
        artifact = future.result(timeout=10)
        self.assertFalse(artifact.digest_verified)
        self.assertEqual(reply.page_count, 4)
        self.assertNotEqual(reply.digest, digest)
        self.assertFalse(verify_artifact(artifact))
        with self.assertRaises(DigestMismatch):
            verify_artifact(artifact, strict=True)

    def test_no_agent_times_out(self):
        with self.assertRaises(AcquisitionIOError):
            receive(LOCAL, self.dir, timeout=0.2)


class AgentFailureTests(SimpleTestCase):
    def test_connection_refused(self):
        spare = socket.socket()
        spare.bind(("127.0.0.1", 0))
        port = spare.getsockname()[1]
        spare.close()
        with self.assertRaises(ConnectionFailed):
            acquire(new_image(single_range_map(1), 0), Endpoint("127.0.0.1", port))

    def test_receiver_closes_after_hello(self):
        listener = socket.socket()
        listener.bind(("127.0.0.1", 0))
        listener.listen(1)
        self.addCleanup(listener.close)

        def close_after_hello():
            conn, _ = listener.accept()
            with conn:
                conn.recv(5 + 14 + 17)

        thread = threading.Thread(target=close_after_hello, daemon=True)
        thread.start()
        endpoint = Endpoint(*listener.getsockname()[:2])
        with self.assertRaises(PeerClosed):
            acquire(new_image(single_range_map(64), 0), endpoint)
        thread.join(5)


class AtomicityTests(SimpleTestCase):
    def test_synthetic_metadata(self):
        with tempfile.TemporaryDirectory() as tmp:
            meta = Path(tmp) / "x.meta.json"
            meta.write_text(json.dumps({"first_ts_ns": 100, "last_ts_ns": 2600}))
            artifact = DumpArtifact(Path(tmp) / "x.raw", meta, 0, True)
            self.assertEqual(atomicity_window(artifact), 2500)

    def test_missing_metadata(self):
        artifact = DumpArtifact(Path("/nonexistent/x.raw"), Path("/nonexistent/x.meta.json"), 0, True)
        with self.assertRaises(MissingMetadata):
            atomicity_window(artifact)


class ConcurrentSessionTests(SimpleTestCase):
    def test_two_sessions_are_isolated(self):
        with tempfile.TemporaryDirectory() as tmp:
            server = ReceiverServer(LOCAL, tmp)
            server.start_in_thread()
            try:
                images = [new_image(small_vm_map(), seed=s) for s in (1, 2)]
                with ThreadPoolExecutor(max_workers=2) as pool:
                    summaries = list(pool.map(lambda img: acquire(img, server.endpoint), images))
                deadline = time.monotonic() + 5
                while len(server.artifacts) < 2 and time.monotonic() < deadline:
                    time.sleep(0.01)
            finally:
                server.shutdown()
                server.server_close()

            self.assertEqual(len(server.artifacts), 2)
            self.assertEqual(len({a.raw_dump_path for a in server.artifacts}), 2)
            by_digest = {a.digest: a for a in server.artifacts}
            for image, summary in zip(images, summaries):
                artifact = by_digest[summary.digest.hex()]
                self.assertEqual(artifact.raw_dump_path.read_bytes(), image.content.tobytes())


@unittest.skipUnless(os.environ.get("WORKBENCH_FULL_SCALE") == "1", "full-scale 2 GiB run")
class FullScaleLoopbackTests(LoopbackMixin, SimpleTestCase):
    def test_vm_map_loopback(self):
        image = new_image(vm_map(), seed=1)
        server = ReceiverServer(LOCAL, self.dir, name="Q2")
        self.addCleanup(server.server_close)
        future = self.pool.submit(server.serve_one, 60)
        summary = acquire(image, server.endpoint)
        artifact = future.result(timeout=600)
        self.assertEqual(summary.pages_sent, 160 + 524032)
        self.assertTrue(artifact.digest_verified)
        self.assertTrue(0 < atomicity_window(artifact) < 60 * 10**9)
