"""
Memory map validation tests.

What these tests verify
-----------------------
- The built-in VM map validates and reports the expected page counts per range
  (160 / 32 / 524032) and a 2 GiB flat size.
- The minimal one-page map validates.
- Overlapping, unaligned and SystemRam-less maps are rejected with the index of
  the offending range.
"""

from __future__ import annotations

from django.test import SimpleTestCase

from memory.errors import NoSystemRam, OverlappingRanges, UnalignedRange
from memory.fixtures import single_range_map, vm_map
from memory.ranges import MemoryMap, MemoryRange, Purpose, validate_map


class ValidateMapTests(SimpleTestCase):
    def test_vm_map_is_valid(self):
        m = vm_map()
        validate_map(m)
        self.assertEqual([r.page_count for r in m.ranges], [160, 32, 524032])
        self.assertEqual(m.top, 0x80000000)
        self.assertEqual(m.system_ram_pages, 524192)
        self.assertEqual(m.total_pages, 524288)

    def test_minimal_map_is_valid(self):
        m = MemoryMap(ranges=(MemoryRange(0x0, 0xFFF, Purpose.SYSTEM_RAM),))
        validate_map(m)
        self.assertEqual(m, single_range_map(1))

    def test_overlapping_ranges_name_index(self):
        m = MemoryMap(ranges=(MemoryRange(0x0, 0x1FFF), MemoryRange(0x1000, 0x2FFF)))
        with self.assertRaises(OverlappingRanges) as ctx:
            validate_map(m)
        self.assertEqual(ctx.exception.index, 1)

    def test_unsorted_ranges_are_rejected(self):
        m = MemoryMap(ranges=(MemoryRange(0x2000, 0x2FFF), MemoryRange(0x0, 0xFFF)))
        with self.assertRaises(OverlappingRanges):
            validate_map(m)

    def test_unaligned_range(self):
        m = MemoryMap(ranges=(MemoryRange(0x0, 0xFFF), MemoryRange(0x1800, 0x2FFF)))
        with self.assertRaises(UnalignedRange) as ctx:
            validate_map(m)
        self.assertEqual(ctx.exception.index, 1)

    def test_unaligned_end(self):
        with self.assertRaises(UnalignedRange) as ctx:
            validate_map(MemoryMap(ranges=(MemoryRange(0x0, 0xFFE),)))
        self.assertEqual(ctx.exception.index, 0)

    def test_no_system_ram(self):
        with self.assertRaises(NoSystemRam):
            validate_map(MemoryMap(ranges=(MemoryRange(0x0, 0xFFF, Purpose.RESERVED),)))

    def test_zero_spans_cover_hole_and_reserved(self):
        spans = list(vm_map().zero_spans())
        self.assertEqual(spans, [(0xA0000, 0x100000)])
