"""
Request correlation middleware tests.

What these tests verify
-----------------------
- A safe client `X-Request-ID` is echoed back and used as the log session id.
- An unsafe or missing id is replaced by a generated one.
- One `request` line is logged per request with its status.
"""

from django.test import TestCase


class RequestLogMiddlewareTests(TestCase):
    def test_client_id_is_echoed_and_logged(self):
        with self.assertLogs("workbench.request", level="INFO") as logs:
            response = self.client.get("/health/", HTTP_X_REQUEST_ID="case-42.a")
        self.assertEqual(response["X-Request-ID"], "case-42.a")
        record = logs.records[0]
        self.assertEqual(record.getMessage(), "request")
        self.assertEqual(record.event_fields["status"], 200)
        self.assertEqual(record.event_fields["user"], "-")

    def test_unsafe_id_is_replaced(self):
        response = self.client.get("/health/", HTTP_X_REQUEST_ID="bad id; drop")
        generated = response["X-Request-ID"]
        self.assertNotEqual(generated, "bad id; drop")
        self.assertRegex(generated, r"^[0-9a-f]{32}$")
        self.assertRegex(self.client.get("/health/")["X-Request-ID"], r"^[0-9a-f]{32}$")
