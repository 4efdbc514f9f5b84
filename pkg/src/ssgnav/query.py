"""Navigation-time reads of a scene graph: localization, the agent-centric
receptive field and per-place object summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import OutOfBounds
from .geometry import Pose
from .ssg.types import RoomRegion, SpatialSceneGraph, find_floor

DEFAULT_PERCEPTION_RADIUS = 7.68


@dataclass(frozen=True)
class Localization:
    floor_index: int
    room_id: Optional[str] = None


@dataclass(eq=False)
class LocalContext:
    agent: Pose
    radius: float
    floor_index: int
    grid: object
    rooms: List[Tuple[RoomRegion, np.ndarray]] = field(default_factory=list)
    places: List[Tuple[str, Tuple[float, float, float]]] = field(default_factory=list)

    @property
    def room_ids(self) -> List[str]:
        return [r.id for r, _ in self.rooms]


@dataclass(frozen=True)
class ObjectGroup:
    category: str
    distances: Tuple[float, ...]


@dataclass(frozen=True)
class RemoteObjectReport:
    place_id: str
    room_id: Optional[str]
    room_category: Optional[str]
    groups: Tuple[ObjectGroup, ...] = ()


def localize(graph: SpatialSceneGraph, pose) -> Localization:
    """Floor from the height, then the room whose mask holds the XY cell."""
    position = pose.position if isinstance(pose, Pose) else tuple(pose)
    fi = find_floor(graph.floors, position[2])
    if fi is None:
        raise OutOfBounds(f"height {position[2]:.3f} m lies outside every floor slab")
    idx = graph.grids[fi].cell_index(position[:2])
    if idx is None:
        return Localization(fi, None)
    label = int(graph.label_maps[fi][idx])
    return Localization(fi, graph.rooms[label - 1].id if label else None)


def query_receptive_field(
    graph: SpatialSceneGraph,
    pose: Pose,
    radius: float = DEFAULT_PERCEPTION_RADIUS,
    places: Sequence[Tuple[str, Sequence[float]]] = (),
) -> LocalContext:
    """Same-floor rooms with at least one cell center within ``radius`` of the
    agent, each clipped to the disk."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    loc = localize(graph, pose)
    ax, ay = pose.xy
    included = []
    for room in graph.rooms_on_floor(loc.floor_index):
        rows, cols, centers = graph.room_cells[room.id]
        d = np.hypot(centers[:, 0] - ax, centers[:, 1] - ay)
        near = d <= radius
        if not near.any():
            continue
        clipped = np.zeros_like(room.mask, dtype=bool)
        clipped[rows[near], cols[near]] = True
        included.append((room, clipped))
    included.sort(key=lambda item: item[0].id)
    return LocalContext(
        agent=pose,
        radius=float(radius),
        floor_index=loc.floor_index,
        grid=graph.grids[loc.floor_index],
        rooms=included,
        places=[(str(pid), tuple(float(c) for c in xyz)) for pid, xyz in places],
    )


def remote_objects(graph: SpatialSceneGraph, place_xyz: Sequence[float], place_id: str = "") -> RemoteObjectReport:
    """Objects in the room of a navigable place, grouped by category, with
    3-D distances from the place to each object center."""
    loc = localize(graph, tuple(place_xyz))
    if loc.room_id is None:
        return RemoteObjectReport(place_id, None, None, ())
    room = graph.room_by_id[loc.room_id]
    by_cat: Dict[str, List[float]] = {}
    for obj in graph.objects_by_room[room.id]:
        by_cat.setdefault(obj.category, []).append(math.dist(place_xyz, obj.center))
    groups = [ObjectGroup(cat, tuple(sorted(ds))) for cat, ds in by_cat.items()]
    groups.sort(key=lambda g: (g.distances[0], g.category))
    return RemoteObjectReport(place_id, room.id, room.category, tuple(groups))


def format_remote_report(report: RemoteObjectReport) -> str:
    """One-line text summary, e.g. ``Place B3 (bedroom): lamp x2 (0.8m, 2.1m); bed x1 (1.2m)``."""
    where = report.room_category if report.room_category else "unknown area"
    head = f"Place {report.place_id} ({where})"
    if not report.groups:
        return f"{head}: no detected objects"
    parts = []
    for g in report.groups:
        ds = ", ".join(f"{d:.1f}m" for d in g.distances)
        parts.append(f"{g.category} x{len(g.distances)} ({ds})")
    return f"{head}: " + "; ".join(parts)
