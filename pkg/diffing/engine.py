"""
Byte-wise and page-wise comparison of memory dumps.

Overview
--------
- `diff(a, b)` compares two dumps of equal length. A dump is a `MemoryImage`,
  a raw dump path, a numpy `uint8` array or `bytes`.
- A page differs iff at least one of its bytes differs. The proportion is
  differing bytes over the total length.
- Inputs are walked in chunks of `DIFF_CHUNK_PAGES` pages. Chunks may be
  compared on a thread pool (`DIFF_WORKERS`); results are reduced in chunk
  order, so a report never depends on the worker count.
- `pairwise_report()` compares every unordered pair in input order:
  (Q1, Q2, UF, Q3) gives Q1Q2, Q1UF, Q1Q3, Q2UF, Q2Q3, UFQ3.

PERF:
    Raw dumps are opened with `np.memmap`, so only the chunks being compared
    are resident.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings

from memory.image import MemoryImage
from memory.ranges import PAGE_SIZE

from .errors import DiffIOError, LengthMismatch, NotEnoughDumps

logger = logging.getLogger("workbench.diffing")

DumpLike = Union[MemoryImage, str, os.PathLike, np.ndarray, bytes]


@dataclass(frozen=True, eq=False)
class DiffReport:
    dump_a: str
    dump_b: str
    total_pages_differing: int
    total_bytes_differing: int
    total_bytes: int
    # One flag per page, True where the page differs.
    page_bitmap: np.ndarray
    page_size: int = PAGE_SIZE

    @property
    def total_pages(self) -> int:
        return int(self.page_bitmap.shape[0])

    @property
    def proportion(self) -> float:
        return self.total_bytes_differing / self.total_bytes if self.total_bytes else 0.0

    @property
    def metrics(self) -> Tuple[int, int, int]:
        return self.total_pages_differing, self.total_bytes_differing, self.total_bytes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffReport):
            return NotImplemented
        return (
            (self.dump_a, self.dump_b, self.page_size) == (other.dump_a, other.dump_b, other.page_size)
            and self.metrics == other.metrics
            and np.array_equal(self.page_bitmap, other.page_bitmap)
        )

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {
            "a": self.dump_a,
            "b": self.dump_b,
            "pages": self.total_pages_differing,
            "bytes": self.total_bytes_differing,
            "proportion": self.proportion,
            "total_bytes": self.total_bytes,
        }


def _open(dump: DumpLike) -> Tuple[np.ndarray, str]:
    if isinstance(dump, MemoryImage):
        return dump.content, dump.provenance
    if isinstance(dump, np.ndarray):
        return dump.reshape(-1).view(np.uint8), ""
    if isinstance(dump, (bytes, bytearray, memoryview)):
        return np.frombuffer(dump, dtype=np.uint8), ""
    path = Path(dump)
    try:
        size = path.stat().st_size
        content = np.memmap(path, dtype=np.uint8, mode="r") if size else np.zeros(0, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise DiffIOError(f"cannot open dump {path}: {exc}") from exc
    return content, path.name.removesuffix(".raw")


def _compare_chunk(a: np.ndarray, b: np.ndarray, page_size: int) -> Tuple[int, np.ndarray]:
    unequal = a != b
    pages = -(-unequal.shape[0] // page_size)
    if unequal.shape[0] != pages * page_size:
        unequal = np.concatenate([unequal, np.zeros(pages * page_size - unequal.shape[0], dtype=bool)])
    return int(np.count_nonzero(unequal)), unequal.reshape(pages, page_size).any(axis=1)


def _chunk_pages() -> int:
    return max(1, int(getattr(settings, "DIFF_CHUNK_PAGES", 4096)))


def _workers() -> int:
    return max(1, int(getattr(settings, "DIFF_WORKERS", 1)))


def diff(
    a: DumpLike,
    b: DumpLike,
    page_size: int = PAGE_SIZE,
    *,
    labels: Optional[Tuple[str, str]] = None,
    chunk_pages: Optional[int] = None,
    workers: Optional[int] = None,
) -> DiffReport:
    """
    Compare two dumps of equal length.

    Raises:
        LengthMismatch: the dumps differ in length.
        DiffIOError: a dump path cannot be opened.
    """
    content_a, label_a = _open(a)
    content_b, label_b = _open(b)
    if labels is not None:
        label_a, label_b = labels
    label_a, label_b = label_a or "a", label_b or "b"
    if content_a.shape[0] != content_b.shape[0]:
        raise LengthMismatch(label_a, content_a.shape[0], label_b, content_b.shape[0])

    length = int(content_a.shape[0])
    step = (chunk_pages or _chunk_pages()) * page_size
    spans = [(offset, min(offset + step, length)) for offset in range(0, length, step)]

    def compare(span: Tuple[int, int]) -> Tuple[int, np.ndarray]:
        start, end = span
        return _compare_chunk(content_a[start:end], content_b[start:end], page_size)

    pool_size = workers or _workers()
    if pool_size > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="diff") as pool:
            results = list(pool.map(compare, spans))
    else:
        results = [compare(span) for span in spans]

    bitmap = np.concatenate([flags for _, flags in results]) if results else np.zeros(0, dtype=bool)
    report = DiffReport(
        dump_a=label_a,
        dump_b=label_b,
        total_pages_differing=int(np.count_nonzero(bitmap)),
        total_bytes_differing=sum(count for count, _ in results),
        total_bytes=length,
        page_bitmap=bitmap,
        page_size=page_size,
    )
    logger.info(
        "diff finished",
        extra={"event_fields": {
            "a": label_a,
            "b": label_b,
            "pages": report.total_pages_differing,
            "bytes": report.total_bytes_differing,
        }},
    )
    return report


def diff_files(path_a: Union[str, os.PathLike], path_b: Union[str, os.PathLike], **kwargs) -> DiffReport:
    """`diff()` over two raw dump files, streamed through memory maps."""
    return diff(Path(path_a), Path(path_b), **kwargs)


def pairwise_report(dumps: Sequence[Tuple[str, DumpLike]], page_size: int = PAGE_SIZE, **kwargs) -> List[DiffReport]:
    """
    Compare every unordered pair of labelled dumps, in input order.

    Raises:
        NotEnoughDumps: fewer than two dumps.
        LengthMismatch: the dumps do not all have one length.
    """
    if len(dumps) < 2:
        raise NotEnoughDumps(len(dumps))
    opened = [(label, _open(dump)[0]) for label, dump in dumps]
    first_label, first = opened[0]
    for label, content in opened[1:]:
        if content.shape[0] != first.shape[0]:
            raise LengthMismatch(first_label, first.shape[0], label, content.shape[0])
    return [
        diff(content_a, content_b, page_size, labels=(label_a, label_b), **kwargs)
        for (label_a, content_a), (label_b, content_b) in itertools.combinations(opened, 2)
    ]


def differing_page_indices(report: DiffReport) -> List[int]:
    return [int(i) for i in np.flatnonzero(report.page_bitmap)]
