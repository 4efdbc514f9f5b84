from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

from ..errors import DanglingReference
from ..geometry import OccupancyGrid, point_in_region
from ..pointcloud import PointCloud
from .annotations import AnnotationResult, ingest_annotations
from .floors import segment_floors
from .rooms import build_occupancy, segment_rooms
from .types import (
    FloorSlab,
    RoomRegion,
    SceneObject,
    SegmentationParams,
    SpatialSceneGraph,
    find_floor,
)

log = logging.getLogger(__name__)


def assemble_ssg(
    floors: Sequence[FloorSlab],
    rooms: Sequence[RoomRegion],
    objects: Sequence[SceneObject],
    grids: Sequence[OccupancyGrid],
    unassigned: Optional[Dict[int, List[str]]] = None,
) -> SpatialSceneGraph:
    """Link floors, rooms and objects into a scene graph, checking references
    and object containment."""
    floors, rooms, objects, grids = list(floors), list(rooms), list(objects), list(grids)
    n_floors = len(floors)
    for r in rooms:
        if not 0 <= r.floor_index < n_floors:
            raise DanglingReference(f"room {r.id} cites floor {r.floor_index}, graph has {n_floors}")
    room_ids = {r.id: r for r in rooms}
    for o in objects:
        if o.room_id is None:
            continue
        room = room_ids.get(o.room_id)
        if room is None:
            raise DanglingReference(f"object {o.id} cites missing room {o.room_id}")
        grid = grids[room.floor_index]
        if not point_in_region(grid, room.mask, o.center[:2]):
            raise ValueError(f"object {o.id} center is outside room {o.room_id}")
        if not floors[room.floor_index].matches_z(o.center[2]):
            raise ValueError(f"object {o.id} center height is outside floor {room.floor_index}")

    if unassigned is None:
        unassigned = {}
        for o in objects:
            if o.room_id is None:
                fi = find_floor(floors, o.center[2])
                unassigned.setdefault(0 if fi is None else fi, []).append(o.id)
    graph = SpatialSceneGraph(floors, rooms, objects, grids, {int(k): list(v) for k, v in unassigned.items()})
    graph.validate()
    return graph


def build_ssg(
    cloud: PointCloud,
    annotation=None,
    params: SegmentationParams = SegmentationParams(),
    categories=None,
) -> tuple[SpatialSceneGraph, Optional[AnnotationResult]]:
    """Run the whole pipeline: floors, occupancy, rooms, annotations."""
    floors = segment_floors(cloud, params)
    grids, rooms = [], []
    for floor in floors:
        grid = build_occupancy(cloud, floor, params)
        grids.append(grid)
        rooms.extend(segment_rooms(grid, floor.index, params))
    log.info("segmented %d floor(s), %d room(s)", len(floors), len(rooms))
    result = None
    objects: List[SceneObject] = []
    unassigned = None
    if annotation is not None:
        result = ingest_annotations(rooms, floors, grids, annotation, categories)
        rooms, objects, unassigned = result.rooms, result.objects, result.unassigned
        for w in result.warnings:
            log.warning("%s", w)
    return assemble_ssg(floors, rooms, objects, grids, unassigned), result
