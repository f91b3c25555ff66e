"""
Wire codec tests.

What these tests verify
-----------------------
- A Hello for the VM map encodes to the hand-packed byte string (65-byte payload).
- End for zero pages carries the published empty-input SHA-256 and round-trips.
- Decoding rejects unknown kinds, bad magic, truncated frames and oversized payloads.
- Randomized Page/End/Hello messages decode back to themselves.
"""

from __future__ import annotations

import hashlib
import io
import random
import struct

from django.test import SimpleTestCase, override_settings

from acquisition.errors import (
    BadMagic,
    LengthOverflow,
    PeerClosed,
    Truncated,
    UnknownKind,
    UnsupportedVersion,
)
from acquisition.wire import End, Hello, Page, decode_message, encode_message, encode_page_header, read_message
from memory.fixtures import vm_map
from memory.ranges import MemoryRange, Purpose

EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


class EncodeTests(SimpleTestCase):
    def test_hello_matches_hand_packed_bytes(self):
        expected_payload = (
            b"UEFO"
            + (1).to_bytes(2, "little")
            + (4096).to_bytes(4, "little")
            + (3).to_bytes(4, "little")
            + (0x0).to_bytes(8, "little") + (0x9FFFF).to_bytes(8, "little") + b"\x01"
            + (0xA0000).to_bytes(8, "little") + (0xBFFFF).to_bytes(8, "little") + b"\x02"
            + (0x100000).to_bytes(8, "little") + (0x7FFFFFFF).to_bytes(8, "little") + b"\x01"
        )
        self.assertEqual(len(expected_payload), 4 + 2 + 4 + 4 + 3 * 17)
        frame = encode_message(Hello.for_map(vm_map()))
        self.assertEqual(frame, b"\x01" + len(expected_payload).to_bytes(4, "little") + expected_payload)
        msg, consumed = decode_message(frame)
        self.assertEqual(consumed, len(frame))
        self.assertEqual(msg.memory_map(), vm_map())

    def test_empty_end(self):
        digest = hashlib.sha256(b"").digest()
        self.assertEqual(digest.hex(), EMPTY_SHA256)
        frame = encode_message(End(page_count=0, digest=digest))
        self.assertEqual(len(frame), 5 + 8 + 32)
        self.assertEqual(decode_message(frame)[0], End(0, digest))

    def test_page_header_matches_full_encoding(self):
        data = bytes(range(256)) * 16
        self.assertEqual(
            encode_page_header(0x3000, 42, len(data)) + data,
            encode_message(Page(0x3000, 42, data)),
        )

    def test_two_frames_in_one_buffer(self):
        buf = encode_message(Page(0, 1, b"a" * 4096)) + encode_message(End(1, b"\0" * 32))
        first, n = decode_message(buf)
        second, m = decode_message(buf[n:])
        self.assertIsInstance(first, Page)
        self.assertEqual(second.page_count, 1)
        self.assertEqual(n + m, len(buf))


class DecodeErrorTests(SimpleTestCase):
    def test_unknown_kind(self):
        with self.assertRaises(UnknownKind) as ctx:
            decode_message(b"\x07" + struct.pack("<I", 0))
        self.assertEqual(ctx.exception.kind, 7)

    def test_bad_magic(self):
        frame = bytearray(encode_message(Hello(ranges=(MemoryRange(0, 0xFFF, Purpose.SYSTEM_RAM),))))
        frame[5:9] = b"UEFI"
        with self.assertRaises(BadMagic):
            decode_message(bytes(frame))

    def test_bad_version(self):
        frame = encode_message(Hello(ranges=(MemoryRange(0, 0xFFF),), version=2))
        with self.assertRaises(UnsupportedVersion):
            decode_message(frame)

    def test_truncated_header_and_payload(self):
        frame = encode_message(End(0, b"\0" * 32))
        with self.assertRaises(Truncated):
            decode_message(frame[:3])
        with self.assertRaises(Truncated):
            decode_message(frame[:-1])

    def test_hello_range_count_exceeds_payload(self):
        payload = b"UEFO" + struct.pack("<HII", 1, 4096, 2) + struct.pack("<QQB", 0, 0xFFF, 1)
        with self.assertRaises(Truncated):
            decode_message(b"\x01" + struct.pack("<I", len(payload)) + payload)

    def test_length_overflow(self):
        with self.assertRaises(LengthOverflow):
            decode_message(b"\x02" + struct.pack("<I", 16 * 1024 * 1024 + 1))

    @override_settings(ACQUISITION_MAX_PAYLOAD_BYTES=64)
    def test_limit_follows_settings(self):
        with self.assertRaises(LengthOverflow):
            decode_message(encode_message(Page(0, 0, bytes(4096))))


class StreamTests(SimpleTestCase):
    def test_clean_eof_returns_none(self):
        self.assertIsNone(read_message(io.BytesIO(b"")))

    def test_eof_inside_frame(self):
        frame = encode_message(Page(0, 0, bytes(4096)))
        with self.assertRaises(PeerClosed):
            read_message(io.BytesIO(frame[:100]))

    def test_reads_consecutive_frames(self):
        stream = io.BytesIO(encode_message(Page(0, 5, bytes(4096))) + encode_message(End(1, b"\1" * 32)))
        self.assertEqual(read_message(stream).timestamp_ns, 5)
        self.assertEqual(read_message(stream).digest, b"\1" * 32)
        self.assertIsNone(read_message(stream))


class RandomizedRoundTripTests(SimpleTestCase):
    def test_decode_inverts_encode(self):
        rnd = random.Random(1234)
        for _ in range(200):
            choice = rnd.randrange(3)
            if choice == 0:
                n = rnd.randrange(0, 6)
                ranges, cursor = [], 0
                for _ in range(n):
                    start = cursor + rnd.randrange(0, 4) * 4096
                    end = start + rnd.randrange(1, 16) * 4096 - 1
                    ranges.append(MemoryRange(start, end, rnd.choice([Purpose.SYSTEM_RAM, Purpose.RESERVED])))
                    cursor = end + 1
                msg = Hello(ranges=tuple(ranges))
            elif choice == 1:
                msg = Page(rnd.randrange(1 << 52) * 4096, rnd.getrandbits(64), rnd.randbytes(rnd.randrange(0, 8192)))
            else:
                msg = End(rnd.getrandbits(64), rnd.randbytes(32))
            decoded, consumed = decode_message(encode_message(msg))
            self.assertEqual(decoded, msg)
            self.assertEqual(consumed, len(encode_message(msg)))
