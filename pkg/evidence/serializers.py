"""Read-only serializers for the evidence ledger."""

from __future__ import annotations

from rest_framework import serializers

from .models import Acquisition, DiffPair, DiffRun, TraceRun


class AcquisitionSerializer(serializers.ModelSerializer):
    class Meta:
        model = Acquisition
        fields = [
            "id",
            "name",
            "session_id",
            "peer",
            "raw_dump_path",
            "metadata_path",
            "pages_received",
            "bytes_received",
            "digest",
            "digest_verified",
            "atomicity_window_ns",
            "created_at",
        ]
        read_only_fields = fields


class DiffPairSerializer(serializers.ModelSerializer):
    class Meta:
        model = DiffPair
        fields = [
            "index",
            "dump_a",
            "dump_b",
            "pages_differing",
            "bytes_differing",
            "total_bytes",
            "proportion",
            "pixmap_path",
        ]
        read_only_fields = fields


class DiffRunSerializer(serializers.ModelSerializer):
    pairs = DiffPairSerializer(many=True, read_only=True)

    class Meta:
        model = DiffRun
        fields = ["id", "label", "output_dir", "created_at", "pairs"]
        read_only_fields = fields


class TraceRunSerializer(serializers.ModelSerializer):
    class Meta:
        model = TraceRun
        fields = ["id", "scenario", "seed", "total", "counts", "segment_starts", "log_path", "created_at"]
        read_only_fields = fields
