"""
Memory image and raw dump tests.

What these tests verify
-----------------------
- `new_image` is deterministic per (map, seed), fills SystemRam with non-zero
  data and keeps Reserved ranges and holes zero.
- `read_page` returns page content and rejects unaligned / out-of-range addresses.
- Raw dumps round-trip byte-exactly; wrong-length files raise `LengthMismatch`.
- Images are immutable.

Notes
-----
- A small "VM-shaped" map (low RAM, Reserved window, hole, high RAM) stands in
  for the 2 GiB map; the full-size file check runs only with WORKBENCH_FULL_SCALE=1.
"""

from __future__ import annotations

import os
import tempfile
import unittest
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from memory.errors import LengthMismatch, OutOfBounds, ReservedBytesNonZero, UnalignedAddress
from memory.fixtures import single_range_map, vm_map
from memory.image import load_raw_dump, new_image, read_page, write_raw_dump
from memory.ranges import MemoryMap, MemoryRange, Purpose

PAGE = 4096


def small_vm_map() -> MemoryMap:
    """Same shape as the VM map, scaled down: 4 pages RAM, 2 Reserved, 2-page hole, 8 pages RAM."""
    return MemoryMap(ranges=(
        MemoryRange(0, 4 * PAGE - 1, Purpose.SYSTEM_RAM),
        MemoryRange(4 * PAGE, 6 * PAGE - 1, Purpose.RESERVED),
        MemoryRange(8 * PAGE, 16 * PAGE - 1, Purpose.SYSTEM_RAM),
    ))


class NewImageTests(SimpleTestCase):
    def test_same_seed_same_bytes(self):
        a = new_image(small_vm_map(), seed=1)
        b = new_image(small_vm_map(), seed=1)
        self.assertEqual(a, b)
        self.assertEqual(a.sha256(), b.sha256())

    def test_different_seed_differs(self):
        self.assertNotEqual(new_image(small_vm_map(), 1), new_image(small_vm_map(), 2))

    def test_minimal_map_not_all_zero(self):
        image = new_image(single_range_map(1), seed=0)
        self.assertEqual(len(image), PAGE)
        self.assertTrue(np.any(image.content))
        # Oracle: the same stream generator run standalone.
        expected = np.random.default_rng(0).bytes(PAGE)
        self.assertEqual(image.content.tobytes(), expected)

    def test_reserved_and_holes_are_zero(self):
        image = new_image(small_vm_map(), seed=5)
        self.assertFalse(np.any(image.content[4 * PAGE:8 * PAGE]))
        self.assertTrue(np.any(image.content[8 * PAGE:9 * PAGE]))

    def test_image_is_immutable(self):
        image = new_image(single_range_map(1), seed=0)
        with self.assertRaises(ValueError):
            image.content[0] = 1


class ReadPageTests(SimpleTestCase):
    def setUp(self):
        self.image = new_image(small_vm_map(), seed=3)

    def test_reads_page_content(self):
        self.assertEqual(read_page(self.image, 8 * PAGE), self.image.content[8 * PAGE:9 * PAGE].tobytes())

    def test_reserved_page_is_zero(self):
        self.assertEqual(read_page(self.image, 4 * PAGE), bytes(PAGE))

    def test_zeroed_image_page(self):
        m = single_range_map(2)
        zero = new_image(m, 0)
        zero = type(zero)(m, np.zeros(m.top, dtype=np.uint8))
        self.assertEqual(read_page(zero, 0), bytes(PAGE))

    def test_top_is_out_of_bounds(self):
        with self.assertRaises(OutOfBounds):
            read_page(self.image, self.image.map.top)

    def test_unaligned(self):
        with self.assertRaises(UnalignedAddress):
            read_page(self.image, 10)


class RawDumpTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_round_trip(self):
        image = new_image(small_vm_map(), seed=9)
        path = write_raw_dump(image, self.dir / "q1.raw")
        self.assertEqual(path.stat().st_size, small_vm_map().top)
        loaded = load_raw_dump(path, small_vm_map())
        self.assertEqual(loaded, image)
        self.assertEqual(loaded.provenance, "q1")

    def test_wrong_length(self):
        path = self.dir / "short.raw"
        path.write_bytes(bytes(PAGE))
        with self.assertRaises(LengthMismatch) as ctx:
            load_raw_dump(path, small_vm_map())
        self.assertEqual(ctx.exception.expected, 16 * PAGE)

    def test_nonzero_reserved_rejected(self):
        data = bytearray(16 * PAGE)
        data[4 * PAGE + 7] = 0xFF
        path = self.dir / "dirty.raw"
        path.write_bytes(bytes(data))
        with self.assertRaises(ReservedBytesNonZero) as ctx:
            load_raw_dump(path, small_vm_map())
        self.assertEqual(ctx.exception.address, 4 * PAGE + 7)

    @unittest.skipUnless(os.environ.get("WORKBENCH_FULL_SCALE") == "1", "full-scale 2 GiB run")
    def test_vm_map_dump_is_two_gib(self):
        image = new_image(vm_map(), seed=1)
        path = write_raw_dump(image, self.dir / "vm.raw")
        self.assertEqual(path.stat().st_size, 0x80000000)
