"""Episode loop over a discrete navigation graph."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Tuple

from ..errors import PolicyFailure
from ..geometry import Pose, RasterImage, normalize_heading
from ..query import DEFAULT_PERCEPTION_RADIUS, format_remote_report, query_receptive_field, remote_objects
from ..render import (
    DIRECTIONS,
    CompassConfig,
    MapConfig,
    compose_compass,
    load_view_dir,
    placeholder_views,
    render_spatial_map,
)
from ..ssg.types import SpatialSceneGraph
from .graph import Episode, NavGraph

log = logging.getLogger(__name__)

SECTOR_WIDTH = math.pi / 4


@dataclass(frozen=True)
class Action:
    kind: str  # "move" or "stop"
    target: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("move", "stop"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if (self.kind == "move") != (self.target is not None):
            raise ValueError("move needs a target; stop takes none")

    def __str__(self):
        return "stop" if self.kind == "stop" else f"move:{self.target}"

    @classmethod
    def parse(cls, text: str) -> "Action":
        if text == "stop":
            return STOP
        kind, _, target = text.partition(":")
        return cls(kind, target or None)


def MoveTo(target: str) -> Action:
    return Action("move", target)


STOP = Action("stop")


@dataclass(frozen=True)
class RunConfig:
    max_steps: int = 20
    success_radius: float = 3.0
    perception_radius: float = DEFAULT_PERCEPTION_RADIUS
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not (self.success_radius > 0 and self.perception_radius > 0):
            raise ValueError("radii must be positive")


def relative_sector(heading: float, from_xy, to_xy) -> int:
    """Index into DIRECTIONS of the 45-degree sector holding ``to_xy``
    as seen from ``from_xy`` facing ``heading``; sectors run clockwise."""
    bearing = math.atan2(to_xy[1] - from_xy[1], to_xy[0] - from_xy[0])
    clockwise = normalize_heading(heading - bearing)
    return int(math.floor((clockwise + SECTOR_WIDTH / 2) / SECTOR_WIDTH)) % 8


@dataclass(frozen=True)
class Candidate:
    place_id: str
    direction: str
    remote_text: str
    position: Tuple[float, float, float]


@dataclass(eq=False)
class Environment:
    ssg: SpatialSceneGraph
    nav: NavGraph
    map_config: MapConfig = field(default_factory=MapConfig)
    compass_config: CompassConfig = field(default_factory=CompassConfig)
    views_root: Optional[str] = None
    _compass_cache: dict = field(default_factory=dict, init=False, repr=False)

    def compass_for(self, viewpoint: str) -> RasterImage:
        # depends only on the viewpoint; shared across steps and episodes
        img = self._compass_cache.get(viewpoint)
        if img is None:
            img = compose_compass(self.views_for(viewpoint), self.compass_config)
            self._compass_cache[viewpoint] = img
        return img

    def views_for(self, viewpoint: str):
        if self.views_root:
            d = os.path.join(self.views_root, viewpoint)
            if os.path.isdir(d):
                views = load_view_dir(d)
                if len(views) == len(DIRECTIONS):
                    return views
                log.warning("incomplete view directory %s; using placeholders", d)
        return placeholder_views()


class ObservationBundle:
    """Per-step policy input. Images are rendered on first access."""

    def __init__(self, env: Environment, step: int, viewpoint: str, pose: Pose, episode: Episode,
                 candidates: List[Candidate], history: List[Tuple[str, str]], perception_radius: float):
        self.env = env
        self.step = step
        self.viewpoint = viewpoint
        self.pose = pose
        self.episode = episode
        self.instruction = episode.instruction
        self.candidates = candidates
        self.history = list(history)
        self.perception_radius = perception_radius

    @property
    def candidate_ids(self) -> List[str]:
        return [c.place_id for c in self.candidates]

    @cached_property
    def map_image(self) -> RasterImage:
        ctx = query_receptive_field(
            self.env.ssg, self.pose, self.perception_radius,
            [(c.place_id, c.position) for c in self.candidates],
        )
        return render_spatial_map(ctx, self.env.map_config)

    @cached_property
    def compass_image(self) -> RasterImage:
        return self.env.compass_for(self.viewpoint)


def build_observation(env: Environment, viewpoint: str, pose: Pose, episode: Episode,
                      history, cfg: RunConfig = RunConfig(), step: int = 0) -> ObservationBundle:
    candidates = []
    for nb in env.nav.neighbors(viewpoint):
        pos = env.nav.position(nb)
        sector = relative_sector(pose.heading, pose.xy, pos[:2])
        report = remote_objects(env.ssg, pos, nb)
        candidates.append(Candidate(nb, DIRECTIONS[sector], format_remote_report(report), pos))
    return ObservationBundle(env, step, viewpoint, pose, episode, candidates, history, cfg.perception_radius)


@dataclass
class Trajectory:
    episode_id: str
    viewpoints: List[str]
    positions: List[Tuple[float, float, float]]
    headings: List[float]
    actions: List[Action] = field(default_factory=list)
    reason: str = "Stopped"  # Stopped | MaxSteps | PolicyFailure

    @property
    def steps(self) -> int:
        return len(self.viewpoints) - 1

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "viewpoints": list(self.viewpoints),
            "positions": [list(p) for p in self.positions],
            "headings": list(self.headings),
            "actions": [str(a) for a in self.actions],
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Trajectory":
        return cls(
            episode_id=doc["episode_id"],
            viewpoints=list(doc["viewpoints"]),
            positions=[tuple(p) for p in doc["positions"]],
            headings=list(doc["headings"]),
            actions=[Action.parse(a) for a in doc["actions"]],
            reason=doc["reason"],
        )


def run_episode(env: Environment, policy, episode: Episode, cfg: RunConfig = RunConfig(),
                on_step=None) -> Trajectory:
    """Observe, ask the policy, teleport; until Stop, the step budget, or a
    policy failure. ``on_step(obs, action)`` is called after every decision."""
    if hasattr(policy, "reset"):
        policy.reset(episode)
    vp = episode.start_viewpoint
    pose = Pose(env.nav.position(vp), episode.start_heading)
    traj = Trajectory(episode.id, [vp], [pose.position], [pose.heading])
    history: List[Tuple[str, str]] = []
    for step in range(cfg.max_steps):
        obs = build_observation(env, vp, pose, episode, history, cfg, step)
        try:
            action = policy.act(obs)
            if action.kind == "move" and action.target not in obs.candidate_ids:
                raise PolicyFailure(f"{action.target!r} is not a candidate of {vp}")
        except PolicyFailure as exc:
            log.info("episode %s: policy failure at step %d: %s", episode.id, step, exc)
            traj.reason = "PolicyFailure"
            return traj
        if on_step is not None:
            on_step(obs, action)
        traj.actions.append(action)
        if action.kind == "stop":
            traj.reason = "Stopped"
            return traj
        direction = next(c.direction for c in obs.candidates if c.place_id == action.target)
        history.append((vp, direction))
        new_pos = env.nav.position(action.target)
        dx, dy = new_pos[0] - pose.position[0], new_pos[1] - pose.position[1]
        heading = math.atan2(dy, dx) if (dx or dy) else pose.heading
        vp = action.target
        pose = Pose(new_pos, heading)
        traj.viewpoints.append(vp)
        traj.positions.append(pose.position)
        traj.headings.append(pose.heading)
    traj.reason = "MaxSteps"
    return traj
