"""
Ledger writes used by the management commands.

Every writer is a no-op returning None when `EVIDENCE_LEDGER_ENABLED` is off.
A database failure is logged and swallowed: the artifacts on disk are already
complete when the ledger is written.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

from django.conf import settings
from django.db import DatabaseError, transaction

from acquisition.artifacts import DumpArtifact
from diffing.engine import DiffReport
from rts.scenarios import ScenarioRun

from .models import Acquisition, DiffPair, DiffRun, TraceRun

logger = logging.getLogger("workbench.evidence")


def ledger_enabled() -> bool:
    return bool(getattr(settings, "EVIDENCE_LEDGER_ENABLED", False))


def _failed(kind: str, exc: Exception) -> None:
    logger.warning("ledger write failed", extra={"event_fields": {"kind": kind, "error": str(exc)}})


def record_acquisition(artifact: DumpArtifact, peer: str = "", page_size: int = 4096) -> Optional[Acquisition]:
    if not ledger_enabled():
        return None
    try:
        return Acquisition.objects.create(
            name=artifact.name or Path(artifact.raw_dump_path).stem,
            session_id=artifact.session_id,
            peer=peer,
            raw_dump_path=str(artifact.raw_dump_path),
            metadata_path=str(artifact.metadata_path),
            pages_received=artifact.pages_received,
            bytes_received=artifact.pages_received * page_size,
            digest=artifact.digest,
            digest_verified=artifact.digest_verified,
            atomicity_window_ns=artifact.atomicity_window_ns,
        )
    except DatabaseError as exc:
        _failed("acquisition", exc)
        return None


def record_diff_run(
    reports: Sequence[DiffReport],
    *,
    label: str = "",
    output_dir: str = "",
    pixmaps: Optional[Mapping[int, str]] = None,
) -> Optional[DiffRun]:
    """`pixmaps` maps a report's position in `reports` to its pixmap path."""
    if not ledger_enabled():
        return None
    pixmaps = pixmaps or {}
    try:
        with transaction.atomic():
            run = DiffRun.objects.create(label=label, output_dir=str(output_dir))
            DiffPair.objects.bulk_create([
                DiffPair(
                    run=run,
                    index=index,
                    dump_a=report.dump_a,
                    dump_b=report.dump_b,
                    pages_differing=report.total_pages_differing,
                    bytes_differing=report.total_bytes_differing,
                    total_bytes=report.total_bytes,
                    proportion=report.proportion,
                    pixmap_path=str(pixmaps.get(index, "")),
                )
                for index, report in enumerate(reports)
            ])
        return run
    except DatabaseError as exc:
        _failed("diff", exc)
        return None


def record_trace_run(run: ScenarioRun, *, seed: int = 0, log_path: str = "") -> Optional[TraceRun]:
    if not ledger_enabled():
        return None
    try:
        return TraceRun.objects.create(
            scenario=run.scenario,
            seed=seed,
            total=run.stats.total,
            counts=dict(run.stats.counts),
            segment_starts=list(run.segment_starts),
            log_path=str(log_path),
        )
    except DatabaseError as exc:
        _failed("trace", exc)
        return None
