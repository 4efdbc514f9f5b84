"""Navigation metrics: TL, NE, SR, OSR, SPL and nDTW, plus aggregation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyInput, EmptyPath, NegativeLength

SUCCESS_RADIUS = 3.0
NDTW_THRESHOLD = 3.0


def _points(path) -> np.ndarray:
    pts = getattr(path, "positions", path)
    return np.asarray(pts, dtype=np.float64).reshape(-1, 3)


def trajectory_length(traj) -> float:
    pts = _points(traj)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def navigation_error(traj, goal) -> float:
    pts = _points(traj)
    if not len(pts):
        raise EmptyPath("trajectory has no poses")
    return float(math.dist(pts[-1], goal))


def success(ne: float, radius: float = SUCCESS_RADIUS) -> bool:
    return bool(ne <= radius)


def oracle_success(traj, goal, radius: float = SUCCESS_RADIUS) -> bool:
    pts = _points(traj)
    return bool(len(pts)) and bool((np.linalg.norm(pts - np.asarray(goal, dtype=float), axis=1) <= radius).any())


def spl(succeeded: bool, shortest: float, actual: float) -> float:
    """S * l / max(p, l); a successful zero-length episode scores 1."""
    if shortest < 0 or actual < 0:
        raise NegativeLength(f"path lengths must be non-negative (shortest={shortest}, actual={actual})")
    if not succeeded:
        return 0.0
    denom = max(actual, shortest)
    return 1.0 if denom == 0 else float(shortest / denom)


def dtw(path, reference) -> float:
    p, r = _points(path), _points(reference)
    if not len(p) or not len(r):
        raise EmptyPath("dtw needs two non-empty paths")
    d = cdist(p, r)
    acc = np.full((len(p) + 1, len(r) + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, len(p) + 1):
        for j in range(1, len(r) + 1):
            acc[i, j] = d[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[-1, -1])


def ndtw(traj, reference, threshold: float = NDTW_THRESHOLD) -> float:
    """exp(-DTW(P, R) / (|R| * threshold))."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    r = _points(reference)
    return float(math.exp(-dtw(traj, r) / (len(r) * threshold)))


@dataclass(frozen=True)
class EpisodeResult:
    episode_id: str
    tl: float
    ne: float
    success: bool
    oracle_success: bool
    spl: float
    ndtw: float
    steps: int = 0
    reason: str = ""


@dataclass(frozen=True)
class Summary:
    count: int
    tl: float
    ne: float
    sr: float
    osr: float
    spl: float
    ndtw: float


def evaluate_episode(traj, episode, nav, radius: float = SUCCESS_RADIUS,
                     threshold: float = NDTW_THRESHOLD) -> EpisodeResult:
    """Score one trajectory. The SPL reference length is the graph distance
    from the start to the viewpoint nearest the goal."""
    tl = trajectory_length(traj)
    ne = navigation_error(traj, episode.goal)
    ok = success(ne, radius)
    shortest = nav.distance(episode.start_viewpoint, nav.nearest_viewpoint(episode.goal))
    reference = [nav.position(v) for v in episode.reference_path]
    return EpisodeResult(
        episode_id=episode.id,
        tl=tl,
        ne=ne,
        success=ok,
        oracle_success=oracle_success(traj, episode.goal, radius),
        spl=spl(ok, shortest, tl),
        ndtw=ndtw(traj, reference, threshold),
        steps=getattr(traj, "steps", len(_points(traj)) - 1),
        reason=getattr(traj, "reason", ""),
    )


def aggregate(results: Sequence[EpisodeResult]) -> Summary:
    results = list(results)
    if not results:
        raise EmptyInput("no episode results to aggregate")
    n = len(results)

    def mean(vals):
        return math.fsum(vals) / n

    return Summary(
        count=n,
        tl=mean(r.tl for r in results),
        ne=mean(r.ne for r in results),
        sr=round(100 * mean(float(r.success) for r in results), 1),
        osr=round(100 * mean(float(r.oracle_success) for r in results), 1),
        spl=round(100 * mean(r.spl for r in results), 1),
        ndtw=round(100 * mean(r.ndtw for r in results), 1),
    )


def aggregate_by(results: Iterable[EpisodeResult], key) -> Dict[str, Summary]:
    """Summaries per group, where ``key(result)`` names the group."""
    groups: Dict[str, List[EpisodeResult]] = {}
    for r in results:
        groups.setdefault(str(key(r)), []).append(r)
    return {k: aggregate(v) for k, v in sorted(groups.items())}


TABLE_COLUMNS = ("TL", "NE", "OSR", "SR", "SPL", "nDTW")


def format_table(rows: Dict[str, Summary]) -> str:
    """Aligned plain-text table; columns in the usual TL, NE, OSR, SR, SPL order."""
    name_w = max([len("Method")] + [len(k) for k in rows])
    head = f"{'Method':<{name_w}}  " + "  ".join(f"{c:>6}" for c in TABLE_COLUMNS)
    lines = [head, "-" * len(head)]
    for name, s in rows.items():
        vals = (f"{s.tl:.2f}", f"{s.ne:.2f}", f"{s.osr:.1f}", f"{s.sr:.1f}", f"{s.spl:.1f}", f"{s.ndtw:.1f}")
        lines.append(f"{name:<{name_w}}  " + "  ".join(f"{v:>6}" for v in vals))
    return "\n".join(lines) + "\n"


def build_report(results: Sequence[EpisodeResult], label: str = "run", radius: float = SUCCESS_RADIUS,
                 threshold: float = NDTW_THRESHOLD, groups: Optional[Dict[str, Summary]] = None) -> dict:
    summary = aggregate(results)
    doc = {
        "success_radius_m": radius,
        "ndtw_threshold_m": threshold,
        "label": label,
        "summary": asdict(summary),
        "episodes": [asdict(r) for r in results],
    }
    if groups:
        doc["groups"] = {k: asdict(v) for k, v in groups.items()}
    return doc


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
