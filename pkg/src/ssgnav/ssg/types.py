from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import DanglingReference
from ..geometry import OccupancyGrid

# Standing agents sit above the floor surface; a slab matches a query height
# in [z_base - FLOOR_TOLERANCE_BELOW, z_base + STANDING_TOLERANCE] as well as
# within [z_base, z_ceiling).
STANDING_TOLERANCE = 2.0
FLOOR_TOLERANCE_BELOW = 0.1


@dataclass(frozen=True)
class SegmentationParams:
    histogram_bin: float = 0.05
    dbscan_eps: float = 0.30
    dbscan_min_pts: int = 1
    peak_fraction: float = 0.10
    grid_resolution: float = 0.05
    wall_band: Tuple[float, float] = (0.5, 1.8)
    wall_point_threshold: int = 5
    min_room_area: float = 2.0
    review_area: float = 20.0
    marker_separation: float = 1.0
    marker_prominence: float = 0.25

    def __post_init__(self):
        values = {
            "histogram_bin": self.histogram_bin,
            "dbscan_eps": self.dbscan_eps,
            "dbscan_min_pts": self.dbscan_min_pts,
            "peak_fraction": self.peak_fraction,
            "grid_resolution": self.grid_resolution,
            "wall_point_threshold": self.wall_point_threshold,
            "min_room_area": self.min_room_area,
            "review_area": self.review_area,
            "marker_separation": self.marker_separation,
            "marker_prominence": self.marker_prominence,
        }
        for name, v in values.items():
            if not v > 0:
                raise ValueError(f"{name} must be strictly positive, got {v!r}")
        lo, hi = self.wall_band
        if not 0 < lo < hi:
            raise ValueError(f"wall_band must satisfy 0 < lower < upper, got {self.wall_band!r}")
        object.__setattr__(self, "wall_band", (float(lo), float(hi)))


@dataclass(frozen=True)
class FloorSlab:
    index: int
    z_base: float
    z_ceiling: float
    support_count: int

    def __post_init__(self):
        if not self.z_base < self.z_ceiling:
            raise ValueError(f"slab {self.index}: z_base must be below z_ceiling")

    def contains_z(self, z: float) -> bool:
        return self.z_base <= z < self.z_ceiling

    def matches_z(self, z: float) -> bool:
        """Containment widened for standing agents and floor-level noise."""
        return (
            self.contains_z(z)
            or self.z_base - FLOOR_TOLERANCE_BELOW <= z <= self.z_base + STANDING_TOLERANCE
        )


@dataclass(eq=False)
class RoomRegion:
    id: str
    floor_index: int
    mask: np.ndarray = field(repr=False)
    area: float
    centroid: Tuple[float, float]
    category: Optional[str] = None
    review_flag: bool = False

    def __eq__(self, other):
        if not isinstance(other, RoomRegion):
            return NotImplemented
        return (
            self.id == other.id
            and self.floor_index == other.floor_index
            and np.array_equal(self.mask, other.mask)
            and self.area == other.area
            and self.centroid == other.centroid
            and self.category == other.category
            and self.review_flag == other.review_flag
        )

    __hash__ = None


@dataclass(frozen=True)
class SceneObject:
    id: str
    category: str
    center: Tuple[float, float, float]
    size: Tuple[float, float, float]
    heading: float = 0.0
    room_id: Optional[str] = None

    def __post_init__(self):
        if any(not s > 0 for s in self.size):
            raise ValueError(f"object {self.id}: size components must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))


def floor_node_id(index: int) -> str:
    return f"floor_{index}"


@dataclass(eq=False)
class SpatialSceneGraph:
    """Floors contain rooms, rooms contain objects. Objects whose center falls
    in no room are kept per floor in ``unassigned``."""

    floors: List[FloorSlab]
    rooms: List[RoomRegion]
    objects: List[SceneObject]
    grids: List[OccupancyGrid]
    unassigned: Dict[int, List[str]] = field(default_factory=dict)

    @property
    def edges(self) -> List[Tuple[str, str]]:
        out = [(floor_node_id(r.floor_index), r.id) for r in self.rooms]
        out += [(o.room_id, o.id) for o in self.objects if o.room_id is not None]
        return out

    @cached_property
    def room_by_id(self) -> Dict[str, RoomRegion]:
        return {r.id: r for r in self.rooms}

    @cached_property
    def object_by_id(self) -> Dict[str, SceneObject]:
        return {o.id: o for o in self.objects}

    def rooms_on_floor(self, floor_index: int) -> List[RoomRegion]:
        return [r for r in self.rooms if r.floor_index == floor_index]

    @cached_property
    def objects_by_room(self) -> Dict[str, List[SceneObject]]:
        out: Dict[str, List[SceneObject]] = {r.id: [] for r in self.rooms}
        for o in self.objects:
            if o.room_id is not None:
                out[o.room_id].append(o)
        return out

    @cached_property
    def label_maps(self) -> List[np.ndarray]:
        """Per floor, int32 grid holding 1 + room position (0 = no room)."""
        maps = [np.zeros(g.shape, dtype=np.int32) for g in self.grids]
        for i, r in enumerate(self.rooms):
            maps[r.floor_index][r.mask] = i + 1
        return maps

    @cached_property
    def room_cells(self) -> Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Per room: (rows, cols, cell-center XY) of its mask cells."""
        out = {}
        for r in self.rooms:
            rows, cols = np.nonzero(r.mask)
            out[r.id] = (rows, cols, self.grids[r.floor_index].cell_centers(rows, cols))
        return out

    def validate(self) -> None:
        """Raise DanglingReference (or ValueError) if the graph is inconsistent."""
        if len(self.grids) != len(self.floors):
            raise DanglingReference("one occupancy grid per floor is required")
        for i, f in enumerate(self.floors):
            if f.index != i:
                raise DanglingReference(f"floor at position {i} has index {f.index}")
        seen = {}
        for r in self.rooms:
            if not 0 <= r.floor_index < len(self.floors):
                raise DanglingReference(f"room {r.id} cites missing floor {r.floor_index}")
            if r.id in seen:
                raise ValueError(f"duplicate room id {r.id}")
            seen[r.id] = r
            grid = self.grids[r.floor_index]
            if r.mask.shape != grid.shape:
                raise ValueError(f"room {r.id}: mask shape does not match its floor grid")
            count = int(r.mask.sum())
            if count == 0:
                raise ValueError(f"room {r.id}: empty mask")
            if r.area != count * grid.resolution ** 2:
                raise ValueError(f"room {r.id}: area does not match mask size")
        per_floor = [np.zeros(g.shape, dtype=np.int32) for g in self.grids]
        for r in self.rooms:
            per_floor[r.floor_index] += r.mask
        if any(int(m.max(initial=0)) > 1 for m in per_floor):
            raise ValueError("room masks on the same floor overlap")
        ids = set()
        for o in self.objects:
            if o.id in ids:
                raise ValueError(f"duplicate object id {o.id}")
            ids.add(o.id)
            if o.room_id is not None and o.room_id not in seen:
                raise DanglingReference(f"object {o.id} cites missing room {o.room_id}")
        for fi, obj_ids in self.unassigned.items():
            if not 0 <= fi < len(self.floors):
                raise DanglingReference(f"unassigned bucket for missing floor {fi}")
            for oid in obj_ids:
                if oid not in ids:
                    raise DanglingReference(f"unassigned bucket cites missing object {oid}")


def region_centroid(grid: OccupancyGrid, mask: np.ndarray) -> Tuple[float, float]:
    rows, cols = np.nonzero(mask)
    c = grid.cell_centers(rows, cols).mean(axis=0)
    return float(c[0]), float(c[1])


def find_floor(floors: List[FloorSlab], z: float) -> Optional[int]:
    """Index of the slab containing height ``z``; falls back to the widened
    standing range. None when no slab matches."""
    for f in floors:
        if f.contains_z(z):
            return f.index
    for f in floors:
        if f.matches_z(z):
            return f.index
    return None
