"""Deterministic policies: an oracle, mocks, and a seeded random walk."""

from __future__ import annotations

import math
import random
from typing import Optional, Sequence

from .env import STOP, Action, MoveTo, ObservationBundle
from .graph import Episode, NavGraph


class Policy:
    """Anything with ``act(obs) -> Action``; ``reset(episode)`` is optional."""

    def reset(self, episode: Episode) -> None:
        pass

    def act(self, obs: ObservationBundle) -> Action:
        raise NotImplementedError


class OraclePolicy(Policy):
    """Greedy descent of the shortest-path table toward the viewpoint nearest
    the goal. Stops once within ``success_radius`` of the goal."""

    def __init__(self, nav: NavGraph, goal: Optional[Sequence[float]] = None, success_radius: float = 3.0):
        self.nav = nav
        self.success_radius = success_radius
        self._goal = None if goal is None else tuple(goal)
        self.goal = self._goal

    def reset(self, episode: Episode) -> None:
        self.goal = self._goal if self._goal is not None else episode.goal

    def act(self, obs: ObservationBundle) -> Action:
        here = obs.viewpoint
        if math.dist(self.nav.position(here), self.goal) <= self.success_radius:
            return STOP
        target = self.nav.nearest_viewpoint(self.goal)
        if here == target or not obs.candidates:
            return STOP
        # remaining distance alone is not enough: a long edge to a neighbor
        # close to the target can leave the shortest path
        here_xyz = self.nav.position(here)

        def cost(c):
            total = math.dist(here_xyz, self.nav.position(c)) + self.nav.distance(c, target)
            return (round(total, 9), c)

        best = min(obs.candidate_ids, key=cost)
        if not math.isfinite(self.nav.distance(best, target)):
            return STOP
        return MoveTo(best)


def oracle_policy(nav: NavGraph, goal=None, success_radius: float = 3.0) -> OraclePolicy:
    return OraclePolicy(nav, goal, success_radius)


class StopPolicy(Policy):
    def act(self, obs):
        return STOP


class FirstCandidatePolicy(Policy):
    """Always moves to the first listed candidate; never stops by itself."""

    def act(self, obs):
        return MoveTo(obs.candidate_ids[0]) if obs.candidates else STOP


class ReferencePolicy(Policy):
    """Replays the episode's reference path, then stops."""

    def reset(self, episode):
        self._path = list(episode.reference_path)

    def act(self, obs):
        i = obs.step + 1
        return MoveTo(self._path[i]) if i < len(self._path) else STOP


class ScriptedPolicy(Policy):
    """Seeded random walk. The stream depends only on (seed, episode id), so
    results do not depend on episode order or parallelism."""

    def __init__(self, seed: int = 0, stop_probability: float = 0.15):
        if not 0.0 <= stop_probability <= 1.0:
            raise ValueError("stop_probability must lie in [0, 1]")
        self.seed = seed
        self.stop_probability = stop_probability
        self._rng = random.Random(seed)

    def reset(self, episode):
        self._rng = random.Random(f"{self.seed}:{episode.id}")

    def act(self, obs):
        if not obs.candidates or self._rng.random() < self.stop_probability:
            return STOP
        return MoveTo(self._rng.choice(sorted(obs.candidate_ids)))
