"""
Evidence ledger: one row per received dump, pairwise diff run and trace run.

Rows point at artifacts on disk (raw dumps, metadata, pixmaps, trace logs);
the files stay the source of truth and the ledger only indexes them. Rows are
written by the management commands and read through the API and the admin.
"""

from __future__ import annotations

from django.db import models


class Acquisition(models.Model):
    name = models.CharField(max_length=200, db_index=True)
    session_id = models.CharField(max_length=64, blank=True, db_index=True)
    peer = models.CharField(max_length=100, blank=True)
    raw_dump_path = models.CharField(max_length=500)
    metadata_path = models.CharField(max_length=500)
    pages_received = models.PositiveBigIntegerField(default=0)
    bytes_received = models.PositiveBigIntegerField(default=0)
    digest = models.CharField(max_length=64, blank=True)
    digest_verified = models.BooleanField(default=False)
    atomicity_window_ns = models.BigIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:
        return f"{self.name} ({self.pages_received} pages)"


class DiffRun(models.Model):
    label = models.CharField(max_length=200, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:
        return self.label or f"diff run #{self.pk}"


class DiffPair(models.Model):
    run = models.ForeignKey(DiffRun, on_delete=models.CASCADE, related_name="pairs")
    index = models.PositiveIntegerField()
    dump_a = models.CharField(max_length=100)
    dump_b = models.CharField(max_length=100)
    pages_differing = models.PositiveBigIntegerField()
    bytes_differing = models.PositiveBigIntegerField()
    total_bytes = models.PositiveBigIntegerField()
    proportion = models.FloatField()
    pixmap_path = models.CharField(max_length=500, blank=True)

    class Meta:
        ordering = ["run", "index"]
        constraints = [
            models.UniqueConstraint(fields=["run", "index"], name="uniq_diff_pair_per_run_index"),
        ]

    def __str__(self) -> str:
        return f"{self.dump_a} vs {self.dump_b}"


class TraceRun(models.Model):
    scenario = models.CharField(max_length=100, db_index=True)
    seed = models.BigIntegerField(default=0)
    total = models.PositiveIntegerField()
    counts = models.JSONField(default=dict)
    segment_starts = models.JSONField(default=list)
    log_path = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:
        return f"{self.scenario} ({self.total} calls)"
