"""
Trace emission tests.

What these tests verify
-----------------------
- The GetTime/Time record renders as one compact line with fixed key order and
  parses back to the same record.
- Empty data renders `"data":{}`.
- Oversized data splits into parts 0..n that reassemble to the input; every
  line stays within 255 characters (prefix excluded).
- Non-scalar values are rejected.
- A file sink log with console noise parses back to its records.
"""

from __future__ import annotations

import json
import random
import string
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from rts.errors import OversizedValue, UnserializableValue
from rts.services import DEFAULT_TIME
from rts.tracing import MAX_RECORD_CHARS, TRACE_PREFIX, FileSink, TraceRecord, emit_trace
from traces.calls import reassemble_calls
from traces.parser import parse_file, parse_log


class EmitTraceTests(SimpleTestCase):
    def test_time_record_is_one_line(self):
        record = TraceRecord("GetTime", 0, "OUT", "Time", dict(DEFAULT_TIME))
        lines = emit_trace(record)
        self.assertEqual(len(lines), 1)
        self.assertTrue(lines[0].startswith(TRACE_PREFIX + '{"service":"GetTime","id":0,"type":"OUT","argument":"Time","data":{'))
        obj = json.loads(lines[0][len(TRACE_PREFIX):])
        self.assertEqual(list(obj), ["service", "id", "type", "argument", "data"])
        self.assertEqual(obj["data"], DEFAULT_TIME)
        records, issues = parse_log(lines)
        self.assertEqual(records, [record])
        self.assertEqual(issues, [])

    def test_empty_data(self):
        lines = emit_trace(TraceRecord("GetTime", 1, "IN", "Nothing", {}))
        self.assertEqual(len(lines), 1)
        self.assertTrue(lines[0].endswith('"data":{}}'))

    def test_forty_keys_split_and_reassemble(self):
        data = {f"Field{i:05d}": i * 1000 for i in range(40)}
        self.assertTrue(all(len(k) == 10 for k in data))
        lines = emit_trace(TraceRecord("GetVariable", 7, "OUT", "Blob", data))
        self.assertGreater(len(lines), 1)
        objs = [json.loads(line[len(TRACE_PREFIX):]) for line in lines]
        self.assertEqual([o.get("part", 0) for o in objs], list(range(len(lines))))
        self.assertNotIn("part", objs[0])
        self.assertEqual(list(objs[1])[:5], ["service", "id", "type", "argument", "part"])
        for line in lines:
            self.assertLessEqual(len(line) - len(TRACE_PREFIX), MAX_RECORD_CHARS)
        calls, issues = reassemble_calls(parse_log(lines)[0])
        self.assertEqual(issues, [])
        self.assertEqual(calls[0].out_args["Blob"], data)

    def test_random_maps_round_trip(self):
        rnd = random.Random(99)
        alphabet = string.ascii_letters + string.digits
        for i in range(1000):
            data = {}
            for _ in range(rnd.randrange(0, 30)):
                key = "".join(rnd.choice(alphabet) for _ in range(rnd.randrange(1, 20)))
                data[key] = rnd.randrange(-10**9, 10**9) if rnd.random() < 0.5 else "".join(
                    rnd.choice(alphabet) for _ in range(rnd.randrange(0, 40)))
            lines = emit_trace(TraceRecord("SetVariable", i, "IN", "Arg", data))
            for line in lines:
                self.assertLessEqual(len(line) - len(TRACE_PREFIX), MAX_RECORD_CHARS)
            calls, issues = reassemble_calls(parse_log(lines)[0])
            self.assertEqual(issues, [])
            self.assertEqual(calls[0].in_args["Arg"], data)

    def test_unserializable(self):
        for bad in (1.5, None, [1], {"a": 1}, True):
            with self.assertRaises(UnserializableValue):
                emit_trace(TraceRecord("GetTime", 0, "OUT", "Time", {"x": bad}))

    def test_single_entry_too_large(self):
        with self.assertRaises(OversizedValue):
            emit_trace(TraceRecord("GetTime", 0, "OUT", "Time", {"x": "y" * 300}))


class FileSinkTests(SimpleTestCase):
    def test_writes_one_line_per_record(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "trace.log"
            with FileSink(path) as sink:
                sink.write_lines(emit_trace(TraceRecord("GetTime", 0, "OUT", "Time", dict(DEFAULT_TIME))))
                sink.write_lines(["noise"])
            self.assertEqual(len(path.read_text(encoding="utf-8").splitlines()), 2)
            records, issues = parse_file(path)
            self.assertEqual([(r.service, r.argument) for r in records], [("GetTime", "Time")])
            self.assertEqual(issues, [])
