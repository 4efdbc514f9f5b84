"""Agent-centric top-down map of the rooms around the agent."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..geometry import Pose, RasterImage, pixel_offsets_to_world, world_to_map
from ..query import LocalContext
from .draw import draw_ring, draw_text, fill_disk, fill_polygon

# 16-color qualitative palette (tab20 subset, light/dark alternating)
PALETTE_16 = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (188, 189, 34),
    (23, 190, 207), (174, 199, 232), (255, 187, 120), (152, 223, 138),
    (255, 152, 150), (197, 176, 213), (196, 156, 148), (219, 219, 141),
)
BACKGROUND = (128, 128, 128, 255)
UNLABELED_ROOM = (235, 235, 235, 255)
OUTLINE = (20, 20, 20, 255)
AGENT_COLOR = (230, 20, 20, 255)
PLACE_FILL = (255, 255, 255, 255)
PLACE_RING = (0, 0, 0, 255)
LABEL_COLOR = (0, 0, 0, 255)

AGENT_HALF_WIDTH = 9
AGENT_APEX = 12
AGENT_BASE = 8
PLACE_RADIUS = 18


def category_color(category: Optional[str]) -> Tuple[int, int, int, int]:
    if not category:
        return UNLABELED_ROOM
    r, g, b = PALETTE_16[zlib.crc32(category.encode("utf-8")) % len(PALETTE_16)]
    return (r, g, b, 255)


@dataclass(frozen=True)
class MapConfig:
    map_size: int = 1024
    resolution: float = 0.015
    palette: Dict[str, Tuple[int, int, int, int]] = field(default_factory=dict)
    draw_labels: bool = True

    def __post_init__(self):
        if self.map_size <= 0 or self.map_size % 2:
            raise ValueError("map_size must be a positive even number")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    @property
    def half_extent(self) -> float:
        return self.map_size / 2 * self.resolution

    def color_for(self, category: Optional[str]):
        if category in self.palette:
            return tuple(self.palette[category])
        return category_color(category)


def agent_marker_box(cfg: MapConfig) -> Tuple[int, int, int, int]:
    """(row0, row1, col0, col1) half-open box covering the agent triangle."""
    c = cfg.map_size // 2
    return c - AGENT_APEX, c + AGENT_BASE + 1, c - AGENT_HALF_WIDTH, c + AGENT_HALF_WIDTH + 1


def _room_label_image(ctx: LocalContext, cfg: MapConfig) -> np.ndarray:
    """Room index + 1 for every pixel, with a one-pixel margin around the map."""
    n = cfg.map_size
    center = n // 2
    idx = np.arange(-1, n + 1)
    right = idx - center
    up = center - idx
    offsets = np.empty((n + 2, n + 2, 2), dtype=np.float64)
    offsets[..., 0] = right[None, :]
    offsets[..., 1] = up[:, None]
    if not ctx.rooms:
        return np.zeros((n + 2, n + 2), dtype=np.int32)
    world = pixel_offsets_to_world(ctx.agent, offsets, cfg.resolution)
    grid = ctx.grid
    rows, cols, inside = grid.cell_indices(world.reshape(-1, 2))
    cell_labels = np.zeros(grid.shape, dtype=np.int32)
    for i, (_, clipped) in enumerate(ctx.rooms, start=1):
        cell_labels[clipped] = i
    out = np.zeros(rows.shape, dtype=np.int32)
    out[inside] = cell_labels[rows[inside], cols[inside]]
    return out.reshape(n + 2, n + 2)


def render_spatial_map(ctx: LocalContext, cfg: MapConfig = MapConfig()) -> RasterImage:
    """Heading-up map: rooms filled by category and outlined, navigable places
    as circles, the agent as an upward triangle on the center pixel."""
    n = cfg.map_size
    px = np.empty((n, n, 4), dtype=np.uint8)
    px[...] = BACKGROUND

    labels_m = _room_label_image(ctx, cfg)
    labels = labels_m[1:-1, 1:-1]
    colors = np.array([BACKGROUND] + [cfg.color_for(r.category) for r, _ in ctx.rooms], dtype=np.uint8)
    px[...] = colors[labels]
    edge = np.zeros((n, n), dtype=bool)
    for shifted in (labels_m[:-2, 1:-1], labels_m[2:, 1:-1], labels_m[1:-1, :-2], labels_m[1:-1, 2:]):
        edge |= shifted != labels
    px[edge & (labels > 0)] = OUTLINE

    agent: Pose = ctx.agent
    if cfg.draw_labels:
        for room, _ in ctx.rooms:
            pos = world_to_map(agent, room.centroid, cfg.resolution, n)
            if pos is not None:
                draw_text(px, (room.category or room.id).upper(), pos[0], pos[1], 3, LABEL_COLOR)

    for pid, xyz in ctx.places:
        pos = world_to_map(agent, xyz[:2], cfg.resolution, n)
        if pos is None:
            continue
        fill_disk(px, pos[0], pos[1], PLACE_RADIUS, PLACE_FILL)
        draw_ring(px, pos[0], pos[1], PLACE_RADIUS, 3, PLACE_RING)
        if cfg.draw_labels:
            draw_text(px, pid, pos[0], pos[1], 1, LABEL_COLOR)

    c = n // 2
    fill_polygon(px, [(c, c - AGENT_APEX), (c + AGENT_HALF_WIDTH, c + AGENT_BASE),
                      (c - AGENT_HALF_WIDTH, c + AGENT_BASE)], AGENT_COLOR)
    px[c, c] = AGENT_COLOR
    return RasterImage(px)
