"""Spatial scene graph: floors -> rooms -> objects built from a point cloud."""

from .annotations import AnnotationResult, ingest_annotations, load_room_categories
from .assemble import assemble_ssg, build_ssg
from .floors import dbscan_1d, segment_floors
from .io import graphs_equal, load_ssg, save_ssg
from .rooms import build_occupancy, segment_rooms
from .types import (
    FloorSlab,
    RoomRegion,
    SceneObject,
    SegmentationParams,
    SpatialSceneGraph,
    find_floor,
)

__all__ = [
    "AnnotationResult",
    "FloorSlab",
    "RoomRegion",
    "SceneObject",
    "SegmentationParams",
    "SpatialSceneGraph",
    "assemble_ssg",
    "build_occupancy",
    "build_ssg",
    "dbscan_1d",
    "find_floor",
    "graphs_equal",
    "ingest_annotations",
    "load_room_categories",
    "load_ssg",
    "save_ssg",
    "segment_floors",
    "segment_rooms",
]
