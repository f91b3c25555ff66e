"""
Page-wise diff pixmaps.

One pixel per page, 512 pages per row. Addresses grow from left to right and
from the bottom row to the top: page `i` sits at `x = i % 512`,
`y = height - 1 - i // 512`. Equal pages are blue, differing pages red, and
pixels past the last page black. Files are binary PPM (P6, maxval 255).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from PIL import Image

from .engine import DiffReport
from .errors import RenderError

logger = logging.getLogger("workbench.diffing")

PIXMAP_WIDTH = 512
EQUAL_COLOR = (0, 0, 255)
DIFFERENT_COLOR = (255, 0, 0)
PADDING_COLOR = (0, 0, 0)


def pixmap_height(total_pages: int) -> int:
    # An empty report still renders one (black) row.
    return max(1, -(-total_pages // PIXMAP_WIDTH))


def page_to_pixel(index: int, height: int) -> Tuple[int, int]:
    return index % PIXMAP_WIDTH, height - 1 - index // PIXMAP_WIDTH


def pixel_to_page(x: int, y: int, height: int) -> int:
    return (height - 1 - y) * PIXMAP_WIDTH + x


@dataclass(frozen=True, eq=False)
class DiffPixmap:
    # (height, width, 3) uint8, row 0 at the top.
    pixels: np.ndarray
    total_pages: int

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def pixel(self, x: int, y: int) -> Tuple[int, int, int]:
        r, g, b = self.pixels[y, x]
        return int(r), int(g), int(b)

    def to_image(self) -> Image.Image:
        return Image.fromarray(self.pixels)

    def save(self, path: Union[str, os.PathLike]) -> Path:
        target = Path(path)
        try:
            self.to_image().save(target, format="PPM")
        except OSError as exc:
            raise RenderError(f"cannot write pixmap {target}: {exc}") from exc
        return target


def render_diff(report: DiffReport, path: Optional[Union[str, os.PathLike]] = None) -> DiffPixmap:
    """Build the pixmap of `report`; also write it to `path` when given."""
    pages = report.total_pages
    height = pixmap_height(pages)
    flat = np.empty((height * PIXMAP_WIDTH, 3), dtype=np.uint8)
    flat[:] = PADDING_COLOR
    flat[:pages] = EQUAL_COLOR
    flat[:pages][report.page_bitmap.astype(bool, copy=False)] = DIFFERENT_COLOR
    # Page rows run bottom-up, image rows top-down.
    pixels = np.ascontiguousarray(flat.reshape(height, PIXMAP_WIDTH, 3)[::-1])
    pixmap = DiffPixmap(pixels=pixels, total_pages=pages)
    if path is not None:
        pixmap.save(path)
        logger.info(
            "pixmap written",
            extra={"event_fields": {"a": report.dump_a, "b": report.dump_b, "path": str(path), "rows": height}},
        )
    return pixmap
