"""Deterministic synthetic indoor scenes for tests, demos and the CLI.

A layout lists axis-aligned rooms per floor, door openings, objects and
either explicit viewpoints or a viewpoint spacing. From it we sample a point
cloud (floor surfaces plus walls with door gaps), write the matching
annotation file, a navigation graph and a set of episodes, and keep the
ground-truth room partition for comparisons.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .errors import SpecError
from .nav.graph import Episode, NavGraph
from .pointcloud import PointCloud, save_point_cloud

WALL_HEIGHT = 2.5
WALL_THICKNESS = 0.1
CAMERA_HEIGHT = 1.5
FLOOR_SPACING = 0.025
WALL_DENSITY = 1000.0  # points per m^2 of wall face
FLOOR_NOISE = 0.01


@dataclass
class SyntheticScene:
    cloud: PointCloud
    annotations: dict
    nav: NavGraph
    episodes: List[Episode]
    ground_truth: dict


def _rect(r, what):
    if not isinstance(r, (list, tuple)) or len(r) != 4:
        raise SpecError(f"{what} must be [x0, y0, x1, y1]")
    x0, y0, x1, y1 = (float(v) for v in r)
    if not (x1 > x0 and y1 > y0):
        raise SpecError(f"{what} must have positive extent")
    return x0, y0, x1, y1


def _overlap(a, b) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    return max(w, 0.0) * max(h, 0.0)


def _floor_points(rng, rect, z0):
    x0, y0, x1, y1 = rect
    nx = max(1, int(round((x1 - x0) / FLOOR_SPACING)))
    ny = max(1, int(round((y1 - y0) / FLOOR_SPACING)))
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    sx, sy = (x1 - x0) / nx, (y1 - y0) / ny
    x = x0 + (gx.ravel() + rng.random(gx.size)) * sx
    y = y0 + (gy.ravel() + rng.random(gy.size)) * sy
    z = z0 + rng.normal(0.0, FLOOR_NOISE, x.size)
    return np.stack([x, y, z], axis=1)


def _wall_points(rng, rect, z0):
    x0, y0, x1, y1 = rect
    segments = [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]
    out = []
    for (ax, ay), (bx, by) in segments:
        length = math.hypot(bx - ax, by - ay)
        n = int(length * WALL_HEIGHT * WALL_DENSITY)
        t = rng.random(n)
        off = (rng.random(n) - 0.5) * WALL_THICKNESS
        nxv, nyv = -(by - ay) / length, (bx - ax) / length
        x = ax + t * (bx - ax) + off * nxv
        y = ay + t * (by - ay) + off * nyv
        z = z0 + rng.random(n) * WALL_HEIGHT
        out.append(np.stack([x, y, z], axis=1))
    return np.concatenate(out)


def _inside(pts, rect):
    return (pts[:, 0] >= rect[0]) & (pts[:, 0] <= rect[2]) & (pts[:, 1] >= rect[1]) & (pts[:, 1] <= rect[3])


def _room_viewpoints(rect, spacing):
    x0, y0, x1, y1 = rect
    nx = max(1, int(round((x1 - x0) / spacing)))
    ny = max(1, int(round((y1 - y0) / spacing)))
    return [
        [(x0 + (i + 0.5) * (x1 - x0) / nx, y0 + (j + 0.5) * (y1 - y0) / ny) for i in range(nx)]
        for j in range(ny)
    ]


def make_scene(spec: dict) -> SyntheticScene:
    """Build a scene from a layout dictionary (see module docstring)."""
    seed = int(spec.get("seed", 0))
    rng = np.random.default_rng(seed)
    floors_z = [float(f.get("z", 3.0 * i)) for i, f in enumerate(spec.get("floors", [{"z": 0.0}]))]
    rooms = []
    for i, r in enumerate(spec.get("rooms", [])):
        fi = int(r.get("floor", 0))
        if not 0 <= fi < len(floors_z):
            raise SpecError(f"room {i} cites missing floor {fi}")
        rooms.append({
            "name": str(r.get("name", f"R{i}")),
            "floor": fi,
            "rect": _rect(r.get("rect"), f"rooms[{i}].rect"),
            "category": r.get("category"),
        })
    if not rooms:
        raise SpecError("layout needs at least one room")
    for i, a in enumerate(rooms):
        for b in rooms[i + 1:]:
            if a["floor"] == b["floor"] and _overlap(a["rect"], b["rect"]) > 1e-9:
                raise SpecError(f"rooms {a['name']} and {b['name']} overlap")
    doors = [{"floor": int(d.get("floor", 0)), "rect": _rect(d.get("rect"), f"doors[{i}].rect")}
             for i, d in enumerate(spec.get("doors", []))]

    chunks = []
    for fi, z0 in enumerate(floors_z):
        for room in (r for r in rooms if r["floor"] == fi):
            chunks.append(_floor_points(rng, room["rect"], z0))
        walls = [_wall_points(rng, room["rect"], z0) for room in rooms if room["floor"] == fi]
        if walls:
            w = np.concatenate(walls)
            keep = np.ones(len(w), dtype=bool)
            for d in doors:
                if d["floor"] == fi:
                    keep &= ~_inside(w, d["rect"])
            chunks.append(w[keep])
    cloud = PointCloud(np.concatenate(chunks).astype(np.float32).astype(np.float64))

    annotations = {
        "schema_version": 1,
        "room_labels": [
            {
                "anchor": [
                    0.5 * (r["rect"][0] + r["rect"][2]),
                    0.5 * (r["rect"][1] + r["rect"][3]),
                    floors_z[r["floor"]] + 0.1,
                ],
                "category": r["category"],
            }
            for r in rooms
            if r["category"]
        ],
        "objects": [
            {
                "id": o.get("id", f"obj_{i}"),
                "category": o["category"],
                "center": [float(c) for c in o["center"]],
                "size": [float(c) for c in o.get("size", (0.5, 0.5, 0.5))],
                "heading": float(o.get("heading", 0.0)),
            }
            for i, o in enumerate(spec.get("objects", []))
        ],
    }

    nav = _make_nav(spec, rooms, doors, floors_z)
    episodes = _make_episodes(spec, nav, rooms, floors_z, rng)
    ground_truth = {
        "floors": floors_z,
        "rooms": [{**r, "rect": list(r["rect"]), "area": (r["rect"][2] - r["rect"][0]) * (r["rect"][3] - r["rect"][1])}
                  for r in rooms],
        "doors": [{**d, "rect": list(d["rect"])} for d in doors],
    }
    return SyntheticScene(cloud, annotations, nav, episodes, ground_truth)


def _make_nav(spec, rooms, doors, floors_z) -> NavGraph:
    if "viewpoints" in spec:
        vps = {str(v["id"]): [float(c) for c in v["position"]] for v in spec["viewpoints"]}
        return NavGraph(vps, [tuple(e) for e in spec.get("edges", [])])
    spacing = float(spec.get("viewpoint_spacing", 2.0))
    vps: Dict[str, List[float]] = {}
    edges = []
    room_vps: List[List[str]] = []
    counter = 0
    for room in rooms:
        z = floors_z[room["floor"]] + CAMERA_HEIGHT
        lattice = _room_viewpoints(room["rect"], spacing)
        ids = [[None] * len(lattice[0]) for _ in lattice]
        for j, row in enumerate(lattice):
            for i, (x, y) in enumerate(row):
                vid = f"vp{counter:03d}"
                counter += 1
                vps[vid] = [x, y, z]
                ids[j][i] = vid
                if i > 0:
                    edges.append((ids[j][i - 1], vid))
                if j > 0:
                    edges.append((ids[j - 1][i], vid))
        room_vps.append([v for row in ids for v in row])
    for d in doors:
        cx = 0.5 * (d["rect"][0] + d["rect"][2])
        cy = 0.5 * (d["rect"][1] + d["rect"][3])
        grown = (d["rect"][0] - WALL_THICKNESS, d["rect"][1] - WALL_THICKNESS,
                 d["rect"][2] + WALL_THICKNESS, d["rect"][3] + WALL_THICKNESS)
        touching = [k for k, r in enumerate(rooms) if r["floor"] == d["floor"] and _overlap(r["rect"], grown) > 0]
        nearest = []
        for k in touching:
            nearest.append(min(room_vps[k], key=lambda v: (math.hypot(vps[v][0] - cx, vps[v][1] - cy), v)))
        for a_i in range(len(nearest)):
            for b_i in range(a_i + 1, len(nearest)):
                edges.append((nearest[a_i], nearest[b_i]))
    for a, b in spec.get("extra_edges", []):
        edges.append((a, b))
    return NavGraph(vps, edges)


def _make_episodes(spec, nav: NavGraph, rooms, floors_z, rng) -> List[Episode]:
    ep_spec = spec.get("episodes", {})
    if isinstance(ep_spec, list):
        return [Episode(e["id"], e["instruction"], e["start_viewpoint"], float(e.get("start_heading", 0.0)),
                        tuple(e["goal"]), tuple(e["reference_path"])) for e in ep_spec]
    count = int(ep_spec.get("count", 10))
    min_dist = float(ep_spec.get("min_distance", 0.0))
    ids = nav.ids
    episodes = []
    attempts = 0
    while len(episodes) < count and attempts < 1000 * max(count, 1):
        attempts += 1
        a, b = (ids[int(k)] for k in rng.integers(0, len(ids), size=2))
        d = nav.distance(a, b)
        if a == b and min_dist > 0 or not math.isfinite(d) or d < min_dist:
            continue
        goal = nav.position(b)
        category = _category_at(rooms, floors_z, goal)
        where = f"the {category}" if category else f"viewpoint {b}"
        heading = round(float(rng.random()) * 2 * math.pi, 6)
        episodes.append(Episode(f"ep{len(episodes):03d}", f"Walk to {where} and stop there.", a, heading,
                                goal, tuple(nav.shortest_path(a, b))))
    return episodes


def _category_at(rooms, floors_z, xyz) -> Optional[str]:
    for r in rooms:
        x0, y0, x1, y1 = r["rect"]
        if x0 <= xyz[0] <= x1 and y0 <= xyz[1] <= y1 and abs(xyz[2] - floors_z[r["floor"]] - CAMERA_HEIGHT) < 1.0:
            return r["category"]
    return None


def write_scene(scene: SyntheticScene, out_dir, binary: bool = True) -> Dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "cloud": os.path.join(out_dir, "cloud.ply"),
        "annotations": os.path.join(out_dir, "annotations.json"),
        "nav_graph": os.path.join(out_dir, "nav_graph.json"),
        "episodes": os.path.join(out_dir, "episodes.json"),
        "ground_truth": os.path.join(out_dir, "ground_truth.json"),
    }
    save_point_cloud(scene.cloud, paths["cloud"], binary=binary)
    docs = {
        "annotations": scene.annotations,
        "nav_graph": scene.nav.to_dict(),
        "episodes": [e.to_dict() for e in scene.episodes],
        "ground_truth": scene.ground_truth,
    }
    for key, doc in docs.items():
        with open(paths[key], "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return paths


def generate_synthetic_scene(spec: dict, out_dir, binary: bool = True) -> Dict[str, str]:
    """Build and write a scene; returns the written file paths by role."""
    return write_scene(make_scene(spec), out_dir, binary=binary)


# -- stock layouts ---------------------------------------------------------------


def two_room_layout(seed: int = 0) -> dict:
    """Two 4x4 m rooms sharing a wall with a 1 m door."""
    return {
        "seed": seed,
        "rooms": [
            {"name": "A", "rect": [0, 0, 4, 4], "category": "bedroom"},
            {"name": "B", "rect": [4, 0, 8, 4], "category": "kitchen"},
        ],
        "doors": [{"rect": [3.85, 1.5, 4.15, 2.5]}],
        "objects": [
            {"category": "bed", "center": [1.5, 1.5, 0.4], "size": [2.0, 1.6, 0.6]},
            {"category": "lamp", "center": [0.6, 3.4, 0.8], "size": [0.3, 0.3, 1.2]},
            {"category": "table", "center": [6.0, 2.0, 0.4], "size": [1.2, 0.8, 0.75]},
            {"category": "chair", "center": [6.8, 2.0, 0.45], "size": [0.5, 0.5, 0.9]},
            {"category": "doormat", "center": [4.0, 2.0, 0.01], "size": [0.8, 0.5, 0.02]},
        ],
        "viewpoint_spacing": 2.0,
        "episodes": {"count": 6},
    }


def hall_layout(seed: int = 0) -> dict:
    """A single enclosed 5x5 m hall (exceeds the 20 m^2 review threshold)."""
    return {
        "seed": seed,
        "rooms": [{"name": "H", "rect": [0, 0, 5, 5], "category": "living room"}],
        "viewpoint_spacing": 2.5,
        "episodes": {"count": 2},
    }


def apartment_layout(seed: int = 0) -> dict:
    """Five rooms and 20 viewpoints on one floor."""
    return {
        "seed": seed,
        "rooms": [
            {"name": "living", "rect": [0, 0, 6, 4], "category": "living room"},
            {"name": "kitchen", "rect": [6, 0, 10, 4], "category": "kitchen"},
            {"name": "hall", "rect": [0, 4, 10, 6], "category": "hallway"},
            {"name": "bed", "rect": [0, 6, 4, 10], "category": "bedroom"},
            {"name": "bath", "rect": [4, 6, 6, 8], "category": "bathroom"},
        ],
        "doors": [
            {"rect": [5.85, 1.5, 6.15, 2.5]},
            {"rect": [2.0, 3.85, 3.0, 4.15]},
            {"rect": [7.5, 3.85, 8.5, 4.15]},
            {"rect": [1.5, 5.85, 2.5, 6.15]},
            {"rect": [4.5, 5.85, 5.5, 6.15]},
        ],
        "objects": [
            {"category": "sofa", "center": [1.5, 1.0, 0.4], "size": [2.0, 0.9, 0.8]},
            {"category": "tv", "center": [4.5, 0.3, 1.0], "size": [1.2, 0.1, 0.7]},
            {"category": "lamp", "center": [0.5, 3.5, 0.8], "size": [0.3, 0.3, 1.5]},
            {"category": "refrigerator", "center": [9.5, 0.5, 0.9], "size": [0.8, 0.7, 1.8]},
            {"category": "table", "center": [8.0, 2.0, 0.4], "size": [1.2, 0.8, 0.75]},
            {"category": "chair", "center": [7.2, 2.0, 0.45], "size": [0.5, 0.5, 0.9]},
            {"category": "chair", "center": [8.8, 2.0, 0.45], "size": [0.5, 0.5, 0.9]},
            {"category": "bed", "center": [2.0, 8.5, 0.4], "size": [2.0, 1.6, 0.6]},
            {"category": "nightstand", "center": [3.4, 9.5, 0.3], "size": [0.5, 0.4, 0.6]},
            {"category": "toilet", "center": [5.5, 7.5, 0.4], "size": [0.4, 0.6, 0.8]},
            {"category": "sink", "center": [4.4, 7.6, 0.85], "size": [0.5, 0.4, 0.2]},
        ],
        "viewpoint_spacing": 2.0,
        "episodes": {"count": 10, "min_distance": 4.0},
    }
