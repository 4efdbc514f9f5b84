"""Navigation graphs and episode records."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import DanglingViewpoint, DisconnectedEpisode, SchemaError


class NavGraph:
    """Undirected viewpoint graph with Euclidean edge weights and an
    all-pairs shortest-path table."""

    def __init__(self, viewpoints: Dict[str, Sequence[float]], edges: Sequence[Tuple[str, str]]):
        self.viewpoints = {str(k): tuple(float(c) for c in v) for k, v in viewpoints.items()}
        for vid, pos in self.viewpoints.items():
            if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
                raise SchemaError(f"viewpoint {vid} needs a finite [x, y, z] position")
        self.ids: List[str] = sorted(self.viewpoints)
        self.index = {vid: i for i, vid in enumerate(self.ids)}
        pairs = set()
        for a, b in edges:
            for v in (a, b):
                if v not in self.viewpoints:
                    raise DanglingViewpoint(f"edge endpoint {v!r} is not a viewpoint")
            if a != b:
                pairs.add((min(a, b), max(a, b)))
        self.edges: List[Tuple[str, str]] = sorted(pairs)
        self._adj: Dict[str, List[str]] = {vid: [] for vid in self.ids}
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for nbrs in self._adj.values():
            nbrs.sort()
        self._positions = np.array([self.viewpoints[v] for v in self.ids], dtype=np.float64).reshape(-1, 3)
        self.dist, self._pred = self._all_pairs()

    def _all_pairs(self):
        n = len(self.ids)
        if not self.edges:
            d = np.full((n, n), np.inf)
            np.fill_diagonal(d, 0.0)
            return d, np.full((n, n), -9999, dtype=np.int32)
        i = np.array([self.index[a] for a, _ in self.edges])
        j = np.array([self.index[b] for _, b in self.edges])
        w = np.linalg.norm(self._positions[i] - self._positions[j], axis=1)
        # zero-length edges would vanish from a sparse matrix
        w = np.where(w > 0, w, np.finfo(float).tiny)
        m = csr_matrix((w, (i, j)), shape=(n, n))
        return dijkstra(m, directed=False, return_predecessors=True)

    def position(self, vid: str) -> Tuple[float, float, float]:
        return self.viewpoints[vid]

    def neighbors(self, vid: str) -> List[str]:
        return list(self._adj[vid])

    def distance(self, a: str, b: str) -> float:
        return float(self.dist[self.index[a], self.index[b]])

    def shortest_path(self, a: str, b: str) -> List[str]:
        ia, ib = self.index[a], self.index[b]
        if not math.isfinite(self.dist[ia, ib]):
            raise DisconnectedEpisode(f"{a} and {b} are not connected")
        path = [ib]
        while path[-1] != ia:
            path.append(int(self._pred[ia, path[-1]]))
        return [self.ids[k] for k in reversed(path)]

    def nearest_viewpoint(self, xyz: Sequence[float]) -> str:
        """Closest viewpoint to a world point; ties go to the smaller id."""
        d = np.linalg.norm(self._positions - np.asarray(xyz, dtype=np.float64), axis=1)
        return self.ids[int(np.argmin(d))]  # argmin returns the first, ids are sorted

    def to_dict(self) -> dict:
        return {
            "viewpoints": [{"id": v, "position": list(self.viewpoints[v])} for v in self.ids],
            "edges": [list(e) for e in self.edges],
        }


@dataclass(frozen=True)
class Episode:
    id: str
    instruction: str
    start_viewpoint: str
    start_heading: float
    goal: Tuple[float, float, float]
    reference_path: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "instruction": self.instruction,
            "start_viewpoint": self.start_viewpoint,
            "start_heading": self.start_heading,
            "goal": list(self.goal),
            "reference_path": list(self.reference_path),
        }


def nav_graph_from_dict(doc) -> NavGraph:
    try:
        vps = {}
        for rec in doc["viewpoints"]:
            if rec["id"] in vps:
                raise SchemaError(f"duplicate viewpoint id {rec['id']!r}")
            vps[str(rec["id"])] = rec["position"]
        edges = [(str(a), str(b)) for a, b in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed nav-graph document: {exc}") from None
    return NavGraph(vps, edges)


def load_nav_graph(path) -> NavGraph:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"nav-graph file is not valid JSON: {exc}") from None
    return nav_graph_from_dict(doc)


def episodes_from_list(docs, nav: NavGraph) -> List[Episode]:
    if not isinstance(docs, list):
        raise SchemaError("episode file must hold a list")
    out = []
    for rec in docs:
        try:
            ep = Episode(
                id=str(rec["id"]),
                instruction=str(rec["instruction"]),
                start_viewpoint=str(rec["start_viewpoint"]),
                start_heading=float(rec.get("start_heading", 0.0)),
                goal=tuple(float(c) for c in rec["goal"]),
                reference_path=tuple(str(v) for v in rec["reference_path"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed episode record: {exc}") from None
        if len(ep.goal) != 3:
            raise SchemaError(f"episode {ep.id}: goal must be [x, y, z]")
        for vid in (ep.start_viewpoint,) + ep.reference_path:
            if vid not in nav.viewpoints:
                raise DanglingViewpoint(f"episode {ep.id}: viewpoint {vid!r} not in graph")
        if not ep.reference_path or ep.reference_path[0] != ep.start_viewpoint:
            raise SchemaError(f"episode {ep.id}: reference path must begin at the start viewpoint")
        target = nav.nearest_viewpoint(ep.goal)
        if not math.isfinite(nav.distance(ep.start_viewpoint, target)):
            raise DisconnectedEpisode(f"episode {ep.id}: goal unreachable from {ep.start_viewpoint}")
        out.append(ep)
    return out


def load_episodes(path, nav: NavGraph) -> List[Episode]:
    with open(path) as fh:
        try:
            docs = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"episode file is not valid JSON: {exc}") from None
    return episodes_from_list(docs, nav)
