"""Occupancy rasterization and room partitioning of a floor."""

from __future__ import annotations

import heapq
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy import ndimage

from ..errors import EmptyInput, NoFreeSpace
from ..geometry import CellState, OccupancyGrid
from ..pointcloud import PointCloud
from .types import FloorSlab, RoomRegion, SegmentationParams, region_centroid

_NEIGHBORS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def build_occupancy(
    cloud: PointCloud, floor: FloorSlab, params: SegmentationParams = SegmentationParams()
) -> OccupancyGrid:
    """Rasterize one floor slab into Free / Wall / Unknown cells."""
    pts = cloud.points
    surface_tol = 2.0 * params.histogram_bin
    in_slab = (pts[:, 2] >= floor.z_base - surface_tol) & (pts[:, 2] < floor.z_ceiling)
    slab = pts[in_slab]
    if len(slab) == 0:
        raise EmptyInput(f"no points in floor slab {floor.index}")

    res = params.grid_resolution
    ox = math.floor(slab[:, 0].min() / res) * res
    oy = math.floor(slab[:, 1].min() / res) * res
    width = int(math.floor((slab[:, 0].max() - ox) / res)) + 1
    height = int(math.floor((slab[:, 1].max() - oy) / res)) + 1
    cols = np.clip(np.floor((slab[:, 0] - ox) / res).astype(np.int64), 0, width - 1)
    rows = np.clip(np.floor((slab[:, 1] - oy) / res).astype(np.int64), 0, height - 1)
    flat = rows * width + cols

    rel_z = slab[:, 2] - floor.z_base
    lo, hi = params.wall_band
    wall_hits = np.bincount(flat[(rel_z >= lo) & (rel_z <= hi)], minlength=width * height)
    floor_hits = np.bincount(flat[np.abs(rel_z) <= surface_tol], minlength=width * height)

    cells = np.full(width * height, CellState.UNKNOWN, dtype=np.uint8)
    cells[floor_hits > 0] = CellState.FREE
    cells[wall_hits >= params.wall_point_threshold] = CellState.WALL
    return OccupancyGrid((ox, oy), res, cells.reshape(height, width))


def free_space_distance(free: np.ndarray) -> np.ndarray:
    """Euclidean distance (cells) from each Free cell to the nearest non-Free
    cell; the grid border counts as non-Free."""
    padded = np.pad(free, 1, constant_values=False)
    return ndimage.distance_transform_edt(padded)[1:-1, 1:-1]


def persistent_maxima(dist: np.ndarray, free: np.ndarray, min_prominence: float) -> List[Tuple[int, int]]:
    """Maxima of ``dist`` whose basin survives a descent of ``min_prominence``.

    Cells are swept from high to low; when two basins meet, the lower peak
    is kept only if it rises at least ``min_prominence`` above the meeting
    level. Plateaus and shallow ripples therefore yield a single maximum.
    """
    h, w = dist.shape
    rows, cols = np.nonzero(free)
    order = np.lexsort((cols, rows, -dist[rows, cols]))
    parent: Dict[int, int] = {}
    peak: Dict[int, int] = {}
    kept: List[int] = []

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    flat_dist = dist.ravel()
    for i in order:
        r, c = int(rows[i]), int(cols[i])
        cell = r * w + c
        level = flat_dist[cell]
        roots = set()
        for dr, dc in _NEIGHBORS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w:
                n = rr * w + cc
                if n in parent:
                    roots.add(find(n))
        parent[cell] = cell
        if not roots:
            peak[cell] = cell
            continue
        # highest peak first; ties by cell index for determinism
        ranked = sorted(roots, key=lambda rt: (-flat_dist[peak[rt]], peak[rt]))
        top = ranked[0]
        for other in ranked[1:]:
            if flat_dist[peak[other]] - level >= min_prominence:
                kept.append(peak[other])
            parent[other] = top
        parent[cell] = top
    for cell in parent:
        if find(cell) == cell:
            kept.append(peak[cell])
    return [divmod(k, w) for k in kept]


def select_markers(
    dist: np.ndarray, free: np.ndarray, res: float, separation: float, min_prominence: float
) -> List[Tuple[int, int]]:
    """Persistent maxima thinned so markers in one free component are at least
    ``separation`` meters apart. Returned in row-major order."""
    components, _ = ndimage.label(free)
    candidates = persistent_maxima(dist, free, min_prominence / res)
    candidates.sort(key=lambda rc: (-dist[rc], rc))
    chosen: List[Tuple[int, int]] = []
    sep_cells = separation / res
    for r, c in candidates:
        comp = components[r, c]
        if any(
            components[q] == comp and math.hypot(r - q[0], c - q[1]) < sep_cells
            for q in chosen
        ):
            continue
        chosen.append((r, c))
    chosen.sort()
    return chosen


def marker_watershed(dist: np.ndarray, free: np.ndarray, markers: List[Tuple[int, int]]) -> np.ndarray:
    """Flood Free cells from markers in order of descending distance.

    Returns labels (1-based marker index, 0 for non-Free). On equal distance
    the lower marker id claims the cell first.
    """
    h, w = dist.shape
    labels = np.zeros((h, w), dtype=np.int32)
    heap = []
    for i, (r, c) in enumerate(markers, start=1):
        labels[r, c] = i
        heapq.heappush(heap, (-dist[r, c], i, r, c))
    while heap:
        _, lab, r, c = heapq.heappop(heap)
        for dr, dc in _NEIGHBORS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and free[rr, cc] and labels[rr, cc] == 0:
                labels[rr, cc] = lab
                heapq.heappush(heap, (-dist[rr, cc], lab, rr, cc))
    return labels


def _shared_boundaries(labels: np.ndarray) -> Dict[Tuple[int, int], int]:
    pairs = []
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        m = (a != b) & (a > 0) & (b > 0)
        lo = np.minimum(a[m], b[m])
        hi = np.maximum(a[m], b[m])
        pairs.append(np.stack([lo, hi], axis=1))
    allp = np.concatenate(pairs)
    if len(allp) == 0:
        return {}
    uniq, counts = np.unique(allp, axis=0, return_counts=True)
    return {(int(a), int(b)): int(n) for (a, b), n in zip(uniq, counts)}


def merge_small_regions(labels: np.ndarray, min_cells: int) -> np.ndarray:
    """Fold regions smaller than ``min_cells`` into the neighbor sharing the
    longest boundary. Regions without neighbors are left alone."""
    labels = labels.copy()
    isolated = set()
    while True:
        sizes = np.bincount(labels.ravel())
        small = [
            (int(sizes[lab]), lab)
            for lab in range(1, len(sizes))
            if 0 < sizes[lab] < min_cells and lab not in isolated
        ]
        if not small:
            return labels
        _, lab = min(small)
        best = None
        for (a, b), n in _shared_boundaries(labels).items():
            if lab not in (a, b):
                continue
            other = b if a == lab else a
            key = (-n, other)
            if best is None or key < best:
                best = key
        if best is None:
            isolated.add(lab)
            continue
        labels[labels == lab] = best[1]


def segment_rooms(
    grid: OccupancyGrid, floor_index: int, params: SegmentationParams = SegmentationParams()
) -> List[RoomRegion]:
    """Partition the Free cells of ``grid`` into rooms.

    Distance-transform markers seed a watershed; fragments under
    ``min_room_area`` are merged away and rooms over ``review_area`` are
    flagged for manual review.
    """
    free = grid.cells == CellState.FREE
    if not free.any():
        raise NoFreeSpace(f"floor {floor_index} has no free cells")
    res = grid.resolution
    dist = free_space_distance(free)
    markers = select_markers(dist, free, res, params.marker_separation, params.marker_prominence)
    labels = marker_watershed(dist, free, markers)
    labels = merge_small_regions(labels, int(math.ceil(params.min_room_area / res ** 2 - 1e-9)))

    regions = []
    for lab in np.unique(labels):
        if lab == 0:
            continue
        mask = labels == lab
        rows, cols = np.nonzero(mask)
        regions.append(((float(rows.mean()), float(cols.mean())), mask))
    regions.sort(key=lambda item: item[0])

    rooms = []
    for k, (_, mask) in enumerate(regions):
        mask.setflags(write=False)
        area = int(mask.sum()) * res ** 2
        rooms.append(
            RoomRegion(
                id=f"room_{floor_index}_{k}",
                floor_index=floor_index,
                mask=mask,
                area=area,
                centroid=region_centroid(grid, mask),
                review_flag=area > params.review_area,
            )
        )
    return rooms
