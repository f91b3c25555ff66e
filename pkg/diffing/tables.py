"""Text and JSON renderings of pairwise diff reports."""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Sequence

import numpy as np

from .engine import DiffReport
from .errors import DiffError

MiB = 1024 * 1024

_ONE_DECIMAL = Decimal("0.1")
_HEADER = ("#", "Dump 1", "Dump 2", "Total Pages", "Total Size", "Proportion")


def _one_decimal(value: Decimal) -> str:
    return str(value.quantize(_ONE_DECIMAL, rounding=ROUND_HALF_UP))


def format_mib(n_bytes: int) -> str:
    return f"{_one_decimal(Decimal(n_bytes) / Decimal(MiB))} MiB"


def format_percent(numerator: int, denominator: int) -> str:
    if not denominator:
        return "0.0 %"
    return f"{_one_decimal(Decimal(numerator) * 100 / Decimal(denominator))} %"


def report_row(index: int, report: DiffReport) -> tuple:
    return (
        str(index),
        report.dump_a,
        report.dump_b,
        str(report.total_pages_differing),
        format_mib(report.total_bytes_differing),
        format_percent(report.total_bytes_differing, report.total_bytes),
    )


def format_table(reports: Sequence[DiffReport]) -> str:
    """
    Aligned table, one row per report:

        #  Dump 1  Dump 2  Total Pages  Total Size  Proportion
        1  Q1      Q2             8143    24.6 MiB       1.2 %
    """
    rows = [_HEADER] + [report_row(i, r) for i, r in enumerate(reports, start=1)]
    widths = [max(len(row[c]) for row in rows) for c in range(len(_HEADER))]
    # Labels are left-aligned, numbers right-aligned.
    left = {1, 2}
    lines = []
    for row in rows:
        cells = [cell.ljust(w) if c in left else cell.rjust(w) for c, (cell, w) in enumerate(zip(row, widths))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def reports_to_dict(reports: Sequence[DiffReport]) -> Dict[str, Any]:
    return {"pairs": [r.to_dict() for r in reports]}


def report_to_json(reports: Sequence[DiffReport]) -> str:
    return json.dumps(reports_to_dict(reports), indent=2)


def reports_from_dict(data: Dict[str, Any]) -> List[DiffReport]:
    """Rebuild metric-only reports (no page bitmap) from `reports_to_dict` output."""
    try:
        return [
            DiffReport(
                dump_a=str(pair["a"]),
                dump_b=str(pair["b"]),
                total_pages_differing=int(pair["pages"]),
                total_bytes_differing=int(pair["bytes"]),
                total_bytes=int(pair["total_bytes"]),
                page_bitmap=np.zeros(0, dtype=bool),
            )
            for pair in data["pairs"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise DiffError(f"not a diff report: {exc}") from None
