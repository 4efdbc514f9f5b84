"""Coordinate conventions, occupancy grids and raster buffers.

World frame is Z-up, meters. Headings are radians counterclockwise from +X,
normalized to [0, 2*pi). Top-down maps are agent-centric: the agent sits on
the center pixel and its heading points to image-up.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def normalize_heading(heading: float) -> float:
    h = math.fmod(float(heading), TWO_PI)
    if h < 0.0:
        h += TWO_PI
    if h >= TWO_PI:
        h = 0.0
    return h


def round_half_away(value):
    """Round to nearest integer, ties away from zero. Works on scalars and arrays."""
    if np.ndim(value) == 0:
        v = float(value)
        return int(math.copysign(math.floor(abs(v) + 0.5), v))
    arr = np.asarray(value, dtype=np.float64)
    return (np.sign(arr) * np.floor(np.abs(arr) + 0.5)).astype(np.int64)


@dataclass(frozen=True)
class Pose:
    position: Tuple[float, float, float]
    heading: float = 0.0

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        if len(pos) != 3 or not all(math.isfinite(v) for v in pos):
            raise ValueError(f"pose position must be 3 finite floats, got {self.position!r}")
        if not math.isfinite(self.heading):
            raise ValueError("pose heading must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    @property
    def xy(self) -> Tuple[float, float]:
        return self.position[0], self.position[1]

    @property
    def z(self) -> float:
        return self.position[2]


class CellState(enum.IntEnum):
    UNKNOWN = 0
    FREE = 1
    WALL = 2


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Row-major 2-D grid. Cell (row, col) covers
    ``[ox + col*res, ox + (col+1)*res) x [oy + row*res, oy + (row+1)*res)``."""

    origin_xy: Tuple[float, float]
    resolution: float
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("grid resolution must be positive")
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if cells.ndim != 2:
            raise ValueError("grid cells must be a 2-D array")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin_xy", (float(self.origin_xy[0]), float(self.origin_xy[1])))
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape

    def cell_index(self, xy: Sequence[float]) -> Optional[Tuple[int, int]]:
        """(row, col) of the cell containing ``xy``, or None outside the grid."""
        col = math.floor((xy[0] - self.origin_xy[0]) / self.resolution)
        row = math.floor((xy[1] - self.origin_xy[1]) / self.resolution)
        if 0 <= row < self.height and 0 <= col < self.width:
            return row, col
        return None

    def cell_indices(self, xy: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized :meth:`cell_index`: returns (rows, cols, inside)."""
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        cols = np.floor((xy[:, 0] - self.origin_xy[0]) / self.resolution).astype(np.int64)
        rows = np.floor((xy[:, 1] - self.origin_xy[1]) / self.resolution).astype(np.int64)
        inside = (rows >= 0) & (rows < self.height) & (cols >= 0) & (cols < self.width)
        return rows, cols, inside

    def cell_center(self, row: int, col: int) -> Tuple[float, float]:
        return (
            self.origin_xy[0] + (col + 0.5) * self.resolution,
            self.origin_xy[1] + (row + 0.5) * self.resolution,
        )

    def cell_centers(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        x = self.origin_xy[0] + (np.asarray(cols) + 0.5) * self.resolution
        y = self.origin_xy[1] + (np.asarray(rows) + 0.5) * self.resolution
        return np.stack([x, y], axis=-1)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.origin_xy == other.origin_xy
            and self.resolution == other.resolution
            and np.array_equal(self.cells, other.cells)
        )

    __hash__ = None


@dataclass(eq=False)
class RasterImage:
    """RGBA image; ``pixels`` has shape (height, width, 4) and dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 4 or px.dtype != np.uint8:
            raise ValueError("RasterImage pixels must be a (H, W, 4) uint8 array")
        self.pixels = px

    @classmethod
    def blank(cls, width: int, height: int, rgba=(0, 0, 0, 255)) -> "RasterImage":
        px = np.empty((height, width, 4), dtype=np.uint8)
        px[...] = np.asarray(rgba, dtype=np.uint8)
        return cls(px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def tobytes(self) -> bytes:
        return np.ascontiguousarray(self.pixels).tobytes()

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None


# -- agent-centric map transform ---------------------------------------------
#
# The heading is split into k quarter turns plus a residual in [0, pi/2).
# Quarter turns are applied as exact coordinate swaps, so headings that
# differ by multiples of pi/2 produce exactly lattice-rotated maps.


def split_heading(heading: float) -> Tuple[int, float]:
    q = normalize_heading(heading) / HALF_PI
    k = math.floor(q)
    frac = q - k
    if frac > 1.0 - 1e-9:
        k, frac = k + 1, 0.0
    elif frac < 1e-9:
        frac = 0.0
    return k % 4, round(frac * HALF_PI, 12)


def _residual_cos_sin(residual: float) -> Tuple[float, float]:
    # rotation by (pi/2 - residual): maps the residual heading onto image-up
    if residual == 0.0:
        return 0.0, 1.0
    a = HALF_PI - residual
    return math.cos(a), math.sin(a)


def _quarter_cw(x, y, k: int):
    """Rotate (x, y) clockwise by k quarter turns, exactly."""
    for _ in range(k % 4):
        x, y = y, -x
    return x, y


def _quarter_ccw(x, y, k: int):
    for _ in range(k % 4):
        x, y = -y, x
    return x, y


def world_to_map_offset(agent: Pose, target_xy: Sequence[float], resolution: float) -> Tuple[int, int]:
    """Integer (right, up) cell offsets of ``target_xy`` from the agent."""
    k, residual = split_heading(agent.heading)
    dx = float(target_xy[0]) - agent.position[0]
    dy = float(target_xy[1]) - agent.position[1]
    wx, wy = _quarter_cw(dx, dy, k)
    c, s = _residual_cos_sin(residual)
    vx = c * wx - s * wy
    vy = s * wx + c * wy
    return round_half_away(vx / resolution), round_half_away(vy / resolution)


def world_to_map(
    agent: Pose, target_xy: Sequence[float], resolution: float, map_size: int
) -> Optional[Tuple[int, int]]:
    """Pixel ``(x, y)`` = (column, row) of a world point, or None when off the map."""
    if not resolution > 0 or not map_size > 0:
        raise ValueError("resolution and map_size must be positive")
    right, up = world_to_map_offset(agent, target_xy, resolution)
    center = map_size // 2
    col, row = center + right, center - up
    if 0 <= col < map_size and 0 <= row < map_size:
        return col, row
    return None


def map_to_world(agent: Pose, pixel: Sequence[int], resolution: float, map_size: int) -> Tuple[float, float]:
    """World XY of a pixel center (inverse of :func:`world_to_map`)."""
    center = map_size // 2
    xy = pixel_offsets_to_world(agent, np.array([[pixel[0] - center, center - pixel[1]]], dtype=np.float64), resolution)
    return float(xy[0, 0]), float(xy[0, 1])


def pixel_offsets_to_world(agent: Pose, offsets: np.ndarray, resolution: float) -> np.ndarray:
    """World XY for an (N, 2) array of integer (right, up) pixel offsets."""
    k, residual = split_heading(agent.heading)
    c, s = _residual_cos_sin(residual)
    ox = offsets[..., 0] * resolution
    oy = offsets[..., 1] * resolution
    # inverse residual rotation, then undo the quarter turns
    wx = c * ox + s * oy
    wy = c * oy - s * ox
    dx, dy = _quarter_ccw(wx, wy, k)
    return np.stack([dx + agent.position[0], dy + agent.position[1]], axis=-1)


def point_in_region(grid: OccupancyGrid, mask: np.ndarray, xy: Sequence[float]) -> bool:
    """True iff the grid cell containing ``xy`` belongs to ``mask``."""
    idx = grid.cell_index(xy)
    if idx is None:
        return False
    return bool(mask[idx])
