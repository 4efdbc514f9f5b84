"""Room labels and object boxes read from annotation files."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence

from ..errors import AnchorNotFound, SchemaError, VersionMismatch
from ..geometry import OccupancyGrid, point_in_region
from .types import FloorSlab, RoomRegion, SceneObject, find_floor

ANNOTATION_SCHEMA_VERSION = 1


def load_room_categories(path=None) -> List[str]:
    """One category per line; blank lines and ``#`` comments are skipped.
    Without ``path`` the bundled Matterport3D-style list is returned."""
    if path is None:
        text = resources.files("ssgnav").joinpath("data/room_categories.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def _vec(value, n, what):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SchemaError(f"{what} must be a list of {n} numbers")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SchemaError(f"{what} must be a list of {n} numbers") from None
    if not all(math.isfinite(v) for v in out):
        raise SchemaError(f"{what} must be finite")
    return out


def parse_annotations(doc) -> dict:
    """Validate an annotation document and normalize its records."""
    if not isinstance(doc, dict):
        raise SchemaError("annotation document must be an object")
    version = doc.get("schema_version")
    if not isinstance(version, int):
        raise SchemaError("schema_version must be an integer")
    if version != ANNOTATION_SCHEMA_VERSION:
        raise VersionMismatch(f"annotation schema_version {version} unsupported")
    labels = doc.get("room_labels", [])
    objects = doc.get("objects", [])
    if not isinstance(labels, list) or not isinstance(objects, list):
        raise SchemaError("room_labels and objects must be lists")

    out_labels = []
    for i, rec in enumerate(labels):
        if not isinstance(rec, dict) or not isinstance(rec.get("category"), str):
            raise SchemaError(f"room_labels[{i}] needs a string category")
        out_labels.append({"anchor": _vec(rec.get("anchor"), 3, f"room_labels[{i}].anchor"),
                           "category": rec["category"]})
    out_objects = []
    for i, rec in enumerate(objects):
        if not isinstance(rec, dict) or not isinstance(rec.get("category"), str):
            raise SchemaError(f"objects[{i}] needs a string category")
        size = _vec(rec.get("size"), 3, f"objects[{i}].size")
        if any(s <= 0 for s in size):
            raise SchemaError(f"objects[{i}].size components must be positive")
        heading = rec.get("heading", 0.0)
        if not isinstance(heading, (int, float)) or isinstance(heading, bool):
            raise SchemaError(f"objects[{i}].heading must be a number")
        oid = rec.get("id", f"obj_{i}")
        if not isinstance(oid, str):
            raise SchemaError(f"objects[{i}].id must be a string")
        out_objects.append({
            "id": oid,
            "category": rec["category"],
            "center": _vec(rec.get("center"), 3, f"objects[{i}].center"),
            "size": size,
            "heading": float(heading),
        })
    return {"room_labels": out_labels, "objects": out_objects}


@dataclass
class AnnotationResult:
    rooms: List[RoomRegion]
    objects: List[SceneObject]
    unassigned: Dict[int, List[str]]
    warnings: List[AnchorNotFound] = field(default_factory=list)
    unlisted_categories: List[str] = field(default_factory=list)


def _room_at(rooms: Sequence[RoomRegion], grids: Sequence[OccupancyGrid], floor: int, xy) -> Optional[int]:
    for i, r in enumerate(rooms):
        if r.floor_index == floor and point_in_region(grids[floor], r.mask, xy):
            return i
    return None


def ingest_annotations(
    rooms: Sequence[RoomRegion],
    floors: Sequence[FloorSlab],
    grids: Sequence[OccupancyGrid],
    annotation,
    categories: Optional[Sequence[str]] = None,
) -> AnnotationResult:
    """Attach room categories and place objects into rooms.

    ``annotation`` is a path or an already-parsed document. Objects whose
    center hits no room land in their floor's unassigned bucket; anchors
    that hit no room are reported in ``warnings``.
    """
    if isinstance(annotation, (dict, list)):
        doc = annotation
    else:
        try:
            with open(annotation) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"annotation file is not valid JSON: {exc}") from None
    parsed = parse_annotations(doc)

    rooms = list(rooms)
    warnings: List[AnchorNotFound] = []
    unlisted = []
    known = set(categories) if categories is not None else None
    for rec in parsed["room_labels"]:
        x, y, z = rec["anchor"]
        fi = find_floor(list(floors), z)
        idx = _room_at(rooms, grids, fi, (x, y)) if fi is not None else None
        if idx is None:
            warnings.append(AnchorNotFound(f"anchor {rec['anchor']} ({rec['category']}) lies in no room"))
            continue
        rooms[idx] = dataclasses.replace(rooms[idx], category=rec["category"])
        if known is not None and rec["category"] not in known and rec["category"] not in unlisted:
            unlisted.append(rec["category"])

    objects = []
    unassigned: Dict[int, List[str]] = {}
    for rec in parsed["objects"]:
        x, y, z = rec["center"]
        fi = find_floor(list(floors), z)
        if fi is None:
            below = [f.index for f in floors if f.z_base <= z]
            fi = below[-1] if below else 0
        idx = _room_at(rooms, grids, fi, (x, y))
        room_id = rooms[idx].id if idx is not None else None
        if room_id is None:
            unassigned.setdefault(fi, []).append(rec["id"])
        objects.append(SceneObject(rec["id"], rec["category"], rec["center"], rec["size"],
                                   rec["heading"], room_id))
    return AnnotationResult(rooms, objects, unassigned, warnings, unlisted)
