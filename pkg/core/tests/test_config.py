"""
Pipeline configuration and logging plumbing.

What these tests verify
-----------------------
- Defaults come from settings; a JSON config file overrides them and flags
  override the file.
- Relative paths in a config file resolve against the file's directory; missing
  referenced files, invalid JSON and schema violations raise ConfigError.
- Endpoint parsing accepts host:port and rejects malformed values.
- The session filter always provides `session_id` and rendered `fields`.
"""

from __future__ import annotations

import json
import logging
import tempfile
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from core.config import ConfigError, Endpoint, load_pipeline_config
from core.logging import SessionIDFilter, bind_session


@override_settings(WORKBENCH_SEED=5, ACQUISITION_LISTEN="127.0.0.1:7171", WORKBENCH_OUTPUT_DIR=Path("/tmp/wb"))
class PipelineConfigTests(SimpleTestCase):
    def test_defaults_from_settings(self):
        config = load_pipeline_config()
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.listen, Endpoint("127.0.0.1", 7171))
        self.assertEqual(config.output_dir, Path("/tmp/wb"))
        self.assertIsNone(config.map_file)
        self.assertTrue(config.footprint_enabled)
        self.assertEqual(config.scenario, "boot")

    def test_file_then_flags(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, "map.json").write_text("{}", encoding="utf-8")
            path = Path(tmp, "cfg.json")
            path.write_text(json.dumps({
                "seed": 9,
                "map": "map.json",
                "scenario": "reboot",
                "footprint_enabled": False,
                "connect": "10.0.0.2:7070",
            }), encoding="utf-8")
            config = load_pipeline_config(str(path), {"seed": 11, "scenario": None})
            self.assertEqual(config.seed, 11)
            self.assertEqual(config.scenario, "reboot")
            self.assertFalse(config.footprint_enabled)
            self.assertEqual(config.map_file, Path(tmp).resolve() / "map.json")
            self.assertEqual(config.connect, Endpoint("10.0.0.2", 7070))

    def test_rejections(self):
        with tempfile.TemporaryDirectory() as tmp:
            missing_ref = Path(tmp, "a.json")
            missing_ref.write_text(json.dumps({"map": "nope.json"}), encoding="utf-8")
            bad_json = Path(tmp, "b.json")
            bad_json.write_text("{", encoding="utf-8")
            bad_schema = Path(tmp, "c.json")
            bad_schema.write_text(json.dumps({"seed": -1}), encoding="utf-8")
            unknown_key = Path(tmp, "d.json")
            unknown_key.write_text(json.dumps({"colour": "red"}), encoding="utf-8")
            for path in (missing_ref, bad_json, bad_schema, unknown_key, Path(tmp, "absent.json")):
                with self.assertRaises(ConfigError, msg=path.name):
                    load_pipeline_config(str(path))

    def test_endpoint_parse(self):
        self.assertEqual(Endpoint.parse("[::1]:80"), Endpoint("::1", 80))
        self.assertEqual(str(Endpoint.parse("host:1")), "host:1")
        for bad in ("host", ":80", "host:x", "host:70000"):
            with self.assertRaises(ConfigError, msg=bad):
                Endpoint.parse(bad)


class SessionFilterTests(SimpleTestCase):
    def _record(self, **extra):
        record = logging.LogRecord("workbench.test", logging.INFO, __file__, 1, "hello", None, None)
        for key, value in extra.items():
            setattr(record, key, value)
        return record

    def test_defaults_outside_session(self):
        record = self._record()
        self.assertTrue(SessionIDFilter().filter(record))
        self.assertEqual(record.session_id, "-")
        self.assertEqual(record.fields, "")

    def test_bound_session_and_fields(self):
        with bind_session("abc123") as sid:
            record = self._record(event_fields={"pages": 160, "name": "Q 1", "empty": ""})
            SessionIDFilter().filter(record)
        self.assertEqual(sid, "abc123")
        self.assertEqual(record.session_id, "abc123")
        self.assertEqual(record.fields, ' pages=160 name="Q 1" empty=""')
