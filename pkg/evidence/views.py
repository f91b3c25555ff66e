"""
Read-only API over the evidence ledger.

- Session authentication and `IsAuthenticated` come from the DRF defaults.
- All three viewsets share the `evidence-read` throttle scope.
- Filtering uses django-filter `filterset_fields`; `ordering` is accepted on
  the listed fields.
"""

from __future__ import annotations

from drf_spectacular.utils import extend_schema, extend_schema_view
from rest_framework import viewsets
from rest_framework.permissions import IsAuthenticated

from .models import Acquisition, DiffRun, TraceRun
from .serializers import AcquisitionSerializer, DiffRunSerializer, TraceRunSerializer


class LedgerViewSet(viewsets.ReadOnlyModelViewSet):
    permission_classes = [IsAuthenticated]
    throttle_scope = "evidence-read"


@extend_schema_view(
    list=extend_schema(tags=["Acquisitions"], description="List received dumps."),
    retrieve=extend_schema(tags=["Acquisitions"], description="Retrieve one received dump."),
)
class AcquisitionViewSet(LedgerViewSet):
    queryset = Acquisition.objects.all()
    serializer_class = AcquisitionSerializer
    filterset_fields = ["name", "session_id", "digest_verified"]
    ordering_fields = ["created_at", "pages_received", "atomicity_window_ns"]
    ordering = ["-created_at"]


@extend_schema_view(
    list=extend_schema(tags=["Diff runs"], description="List pairwise diff runs with their pairs."),
    retrieve=extend_schema(tags=["Diff runs"], description="Retrieve one diff run."),
)
class DiffRunViewSet(LedgerViewSet):
    queryset = DiffRun.objects.prefetch_related("pairs")
    serializer_class = DiffRunSerializer
    filterset_fields = ["label"]
    ordering_fields = ["created_at"]
    ordering = ["-created_at"]


@extend_schema_view(
    list=extend_schema(tags=["Trace runs"], description="List scenario trace runs."),
    retrieve=extend_schema(tags=["Trace runs"], description="Retrieve one trace run."),
)
class TraceRunViewSet(LedgerViewSet):
    queryset = TraceRun.objects.all()
    serializer_class = TraceRunSerializer
    filterset_fields = ["scenario", "seed"]
    ordering_fields = ["created_at", "total"]
    ordering = ["-created_at"]
