"""Compass-style 3x3 composition of the eight directional views."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np
from PIL import Image

from ..errors import MismatchedSizes, MissingView
from ..geometry import RasterImage
from .draw import draw_line, draw_ring, draw_text, fill_disk, fill_polygon

DIRECTIONS = (
    "front", "front-right", "right", "rear-right",
    "rear", "rear-left", "left", "front-left",
)
ABBREVIATIONS = {
    "front": "F", "front-right": "FR", "right": "R", "rear-right": "BR",
    "rear": "B", "rear-left": "BL", "left": "L", "front-left": "FL",
}
# (row, col) of each direction in the 3x3 layout; clockwise from top-center
CELL_OF = {
    "front": (0, 1), "front-right": (0, 2), "right": (1, 2), "rear-right": (2, 2),
    "rear": (2, 1), "rear-left": (2, 0), "left": (1, 0), "front-left": (0, 0),
}

GUTTER = (0, 0, 0, 255)
ROSE_BACKGROUND = (245, 245, 245, 255)
ROSE_INK = (30, 30, 30, 255)
ROSE_FRONT = (210, 30, 30, 255)


@dataclass(frozen=True)
class CompassConfig:
    output_size: int = 1024
    cell: int = 341

    def __post_init__(self):
        if not 3 * self.cell <= self.output_size <= 3 * self.cell + 3:
            raise ValueError("output_size must lie in [3*cell, 3*cell + 3]")

    @property
    def spans(self) -> Tuple[Tuple[int, int], ...]:
        """(start, size) of the three cells along either axis; 1-px gutters between."""
        last = self.output_size - 2 - 2 * self.cell
        sizes = (self.cell, self.cell, last)
        starts = (0, self.cell + 1, 2 * self.cell + 2)
        return tuple(zip(starts, sizes))


ViewSet = Mapping[str, RasterImage]


def _check_views(views: ViewSet) -> Tuple[int, int]:
    missing = [d for d in DIRECTIONS if d not in views]
    if missing:
        raise MissingView(f"missing views: {', '.join(missing)}")
    shapes = {(views[d].width, views[d].height) for d in DIRECTIONS}
    if len(shapes) != 1:
        raise MismatchedSizes(f"views differ in size: {sorted(shapes)}")
    return shapes.pop()


def _resize(img: RasterImage, width: int, height: int) -> np.ndarray:
    if img.width == width and img.height == height:
        return img.pixels
    pil = Image.fromarray(img.pixels, mode="RGBA")
    return np.asarray(pil.resize((width, height), Image.BILINEAR))


def draw_compass_rose(width: int, height: int) -> np.ndarray:
    px = np.empty((height, width, 4), dtype=np.uint8)
    px[...] = ROSE_BACKGROUND
    cx, cy = width // 2, height // 2
    radius = 0.30 * min(width, height)
    draw_ring(px, cx, cy, radius, 3, ROSE_INK)
    label_r = 0.42 * min(width, height)
    for k, d in enumerate(DIRECTIONS):
        # clockwise from image-up
        ang = k * math.pi / 4
        ux, uy = math.sin(ang), -math.cos(ang)
        tip = (cx + ux * radius, cy + uy * radius)
        if d != "front":
            draw_line(px, cx, cy, tip[0], tip[1], 3, ROSE_INK)
        draw_text(px, ABBREVIATIONS[d], int(round(cx + ux * label_r)), int(round(cy + uy * label_r)), 3,
                  ROSE_FRONT if d == "front" else ROSE_INK)
    # front arrow points up
    shaft_top = cy - radius + 0.18 * radius
    draw_line(px, cx, cy, cx, shaft_top, 6, ROSE_FRONT)
    head = 0.16 * radius
    fill_polygon(px, [(cx, cy - radius), (cx + head, shaft_top), (cx - head, shaft_top)], ROSE_FRONT)
    fill_disk(px, cx, cy, 6, ROSE_INK)
    return px


def compose_compass(views: ViewSet, cfg: CompassConfig = CompassConfig()) -> RasterImage:
    """Place the eight views clockwise around a compass rose; front is top-center."""
    _check_views(views)
    out = np.empty((cfg.output_size, cfg.output_size, 4), dtype=np.uint8)
    out[...] = GUTTER
    spans = cfg.spans
    for d in DIRECTIONS:
        r, c = CELL_OF[d]
        (y0, h), (x0, w) = spans[r], spans[c]
        out[y0:y0 + h, x0:x0 + w] = _resize(views[d], w, h)
    (y0, h), (x0, w) = spans[1], spans[1]
    out[y0:y0 + h, x0:x0 + w] = draw_compass_rose(w, h)
    return RasterImage(out)


def cell_centers(cfg: CompassConfig = CompassConfig()) -> Dict[str, Tuple[int, int]]:
    """Pixel (x, y) at the center of each direction's cell."""
    spans = cfg.spans
    out = {}
    for d, (r, c) in CELL_OF.items():
        (y0, h), (x0, w) = spans[r], spans[c]
        out[d] = (x0 + w // 2, y0 + h // 2)
    return out


def placeholder_views(size: int = 256, palette=None) -> Dict[str, RasterImage]:
    """Solid-color stand-ins with the direction abbreviation, for when no
    imagery exists for a viewpoint."""
    from .spatial_map import PALETTE_16

    views = {}
    for k, d in enumerate(DIRECTIONS):
        rgb = (palette or PALETTE_16)[k % 16]
        px = np.empty((size, size, 4), dtype=np.uint8)
        px[...] = (*rgb[:3], 255)
        draw_text(px, ABBREVIATIONS[d], size // 2, size // 2, max(size // 32, 1), (255, 255, 255, 255))
        views[d] = RasterImage(px)
    return views
