"""Django admin registrations for the evidence ledger (staff browsing only)."""

from __future__ import annotations

from django.contrib import admin

from .models import Acquisition, DiffPair, DiffRun, TraceRun


@admin.register(Acquisition)
class AcquisitionAdmin(admin.ModelAdmin):
    list_display = ("id", "name", "pages_received", "digest_verified", "atomicity_window_ns", "created_at")
    search_fields = ("name", "session_id", "digest")
    list_filter = ("digest_verified",)


class DiffPairInline(admin.TabularInline):
    model = DiffPair
    extra = 0
    readonly_fields = ("index", "dump_a", "dump_b", "pages_differing", "bytes_differing", "proportion", "pixmap_path")


@admin.register(DiffRun)
class DiffRunAdmin(admin.ModelAdmin):
    list_display = ("id", "label", "output_dir", "created_at")
    search_fields = ("label",)
    inlines = [DiffPairInline]


@admin.register(TraceRun)
class TraceRunAdmin(admin.ModelAdmin):
    list_display = ("id", "scenario", "seed", "total", "created_at")
    list_filter = ("scenario",)
