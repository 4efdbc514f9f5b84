"""JSON persistence of scene graphs. Grids and masks are run-length encoded."""

from __future__ import annotations

import json
import os
from typing import List

import numpy as np

from ..errors import SchemaError, VersionMismatch
from ..geometry import OccupancyGrid
from .assemble import assemble_ssg
from .types import FloorSlab, RoomRegion, SceneObject, SpatialSceneGraph

SSG_SCHEMA_VERSION = 1


def rle_encode(values: np.ndarray) -> List[List[int]]:
    """Row-major runs as ``[[value, length], ...]``."""
    flat = np.asarray(values).ravel()
    if len(flat) == 0:
        return []
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [len(flat)]]))
    return [[int(flat[s]), int(n)] for s, n in zip(starts, lengths)]


def rle_decode(runs, shape, dtype=np.uint8) -> np.ndarray:
    try:
        values = np.array([r[0] for r in runs], dtype=dtype)
        lengths = np.array([r[1] for r in runs], dtype=np.int64)
    except (TypeError, IndexError, ValueError):
        raise SchemaError("malformed run-length encoding") from None
    if np.any(lengths < 0) or lengths.sum() != int(np.prod(shape)):
        raise SchemaError("run lengths do not match the declared shape")
    return np.repeat(values, lengths).reshape(shape)


def ssg_to_dict(graph: SpatialSceneGraph) -> dict:
    return {
        "schema_version": SSG_SCHEMA_VERSION,
        "floors": [
            {"index": f.index, "z_base": f.z_base, "z_ceiling": f.z_ceiling, "support_count": f.support_count}
            for f in graph.floors
        ],
        "grids": [
            {
                "origin": list(g.origin_xy),
                "resolution": g.resolution,
                "width": g.width,
                "height": g.height,
                "cells": rle_encode(g.cells),
            }
            for g in graph.grids
        ],
        "rooms": [
            {
                "id": r.id,
                "floor_index": r.floor_index,
                "area": r.area,
                "centroid": list(r.centroid),
                "category": r.category,
                "review_flag": r.review_flag,
                "mask": rle_encode(r.mask.astype(np.uint8)),
            }
            for r in graph.rooms
        ],
        "objects": [
            {
                "id": o.id,
                "category": o.category,
                "center": list(o.center),
                "size": list(o.size),
                "heading": o.heading,
                "room_id": o.room_id,
            }
            for o in graph.objects
        ],
        "unassigned": {str(k): v for k, v in sorted(graph.unassigned.items())},
        "edges": [list(e) for e in graph.edges],
    }


def ssg_from_dict(doc: dict) -> SpatialSceneGraph:
    if not isinstance(doc, dict):
        raise SchemaError("scene graph document must be an object")
    version = doc.get("schema_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise SchemaError("scene graph schema_version must be an integer")
    if version != SSG_SCHEMA_VERSION:
        raise VersionMismatch(f"scene graph schema_version {version!r} unsupported (expected {SSG_SCHEMA_VERSION})")
    try:
        floors = [FloorSlab(int(f["index"]), float(f["z_base"]), float(f["z_ceiling"]), int(f["support_count"]))
                  for f in doc["floors"]]
        grids = []
        for g in doc["grids"]:
            shape = (int(g["height"]), int(g["width"]))
            grids.append(OccupancyGrid(tuple(g["origin"]), float(g["resolution"]),
                                       rle_decode(g["cells"], shape)))
        rooms = []
        for r in doc["rooms"]:
            fi = int(r["floor_index"])
            shape = grids[fi].shape if 0 <= fi < len(grids) else (0, 0)
            mask = rle_decode(r["mask"], shape).astype(bool)
            mask.setflags(write=False)
            rooms.append(RoomRegion(
                id=r["id"], floor_index=fi, mask=mask, area=float(r["area"]),
                centroid=tuple(float(v) for v in r["centroid"]), category=r["category"],
                review_flag=bool(r["review_flag"]),
            ))
        objects = [SceneObject(o["id"], o["category"], tuple(o["center"]), tuple(o["size"]),
                               float(o["heading"]), o["room_id"]) for o in doc["objects"]]
        unassigned = {int(k): list(v) for k, v in doc.get("unassigned", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed scene graph document: {exc}") from None
    graph = assemble_ssg(floors, rooms, objects, grids, unassigned)
    if "edges" in doc and [tuple(e) for e in doc["edges"]] != graph.edges:
        raise SchemaError("stored edges disagree with containment fields")
    return graph


def dumps_ssg(graph: SpatialSceneGraph) -> str:
    return json.dumps(ssg_to_dict(graph), sort_keys=True, separators=(",", ":")) + "\n"


def save_ssg(graph: SpatialSceneGraph, path) -> None:
    text = dumps_ssg(graph)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_ssg(path) -> SpatialSceneGraph:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scene graph file is not valid JSON: {exc}") from None
    return ssg_from_dict(doc)


def graphs_equal(a: SpatialSceneGraph, b: SpatialSceneGraph) -> bool:
    """Deep structural equality, masks and grids included."""
    return (
        a.floors == b.floors
        and a.grids == b.grids
        and a.rooms == b.rooms
        and a.objects == b.objects
        and a.unassigned == b.unassigned
        and a.edges == b.edges
    )
