import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SECTOR_NAMES, floyd_warshall, sector_oracle
from ssgnav.errors import DanglingViewpoint, DisconnectedEpisode, SchemaError
from ssgnav.geometry import Pose
from ssgnav.nav import (
    STOP,
    Action,
    Episode,
    FirstCandidatePolicy,
    MoveTo,
    NavGraph,
    OraclePolicy,
    RunConfig,
    ScriptedPolicy,
    StopPolicy,
    Trajectory,
    build_observation,
    episodes_from_list,
    relative_sector,
    run_episode,
)
from ssgnav.render import png_bytes

Z = 1.5


def _abc():
    return NavGraph({"A": (1, 1, Z), "B": (3, 1, Z), "C": (5, 1, Z)}, [("A", "B"), ("B", "C")])


def _episode(start, goal, path=None, heading=0.0, eid="e0"):
    return Episode(eid, "go", start, heading, tuple(goal), tuple(path or [start]))


def test_path_graph_distance():
    nav = _abc()
    assert nav.distance("A", "C") == pytest.approx(4.0)
    assert nav.shortest_path("A", "C") == ["A", "B", "C"]
    assert nav.neighbors("B") == ["A", "C"]


def test_dangling_viewpoints():
    nav = _abc()
    doc = [{"id": "e", "instruction": "x", "start_viewpoint": "Z", "goal": [5, 1, Z], "reference_path": ["Z"]}]
    with pytest.raises(DanglingViewpoint):
        episodes_from_list(doc, nav)
    with pytest.raises(DanglingViewpoint):
        NavGraph({"A": (0, 0, 0)}, [("A", "Q")])


def test_episode_schema_and_reachability():
    nav = NavGraph({"A": (0, 0, Z), "B": (1, 0, Z), "C": (9, 0, Z)}, [("A", "B")])
    ok = {"id": "e", "instruction": "x", "start_viewpoint": "A", "goal": [1, 0, Z], "reference_path": ["A", "B"]}
    assert episodes_from_list([ok], nav)[0].reference_path == ("A", "B")
    with pytest.raises(DisconnectedEpisode):
        episodes_from_list([dict(ok, goal=[9, 0, Z])], nav)
    with pytest.raises(SchemaError):
        episodes_from_list([dict(ok, reference_path=["B"])], nav)
    with pytest.raises(SchemaError):
        episodes_from_list([{"id": "e"}], nav)


@pytest.mark.parametrize("seed", range(5))
def test_all_pairs_match_floyd_warshall(seed):
    rng = np.random.default_rng(seed)
    ids = [f"v{i}" for i in range(10)]
    pos = {v: tuple(rng.uniform(0, 10, 3)) for v in ids}
    edges = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:] if math.dist(pos[a], pos[b]) < 5.0]
    nav = NavGraph(pos, edges)
    fw = floyd_warshall(ids, pos, edges)
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if math.isinf(fw[i][j]):
                assert math.isinf(nav.distance(a, b))
            else:
                assert nav.distance(a, b) == pytest.approx(fw[i][j], abs=1e-9)


def test_observation_has_one_candidate_per_neighbor(two_room):
    nav = NavGraph({"H": (3, 2, Z), "N": (3, 3.5, Z), "E": (5, 2, Z), "W": (1, 2, Z)},
                   [("H", "N"), ("H", "E"), ("H", "W")])
    env = two_room.env()
    env.nav = nav
    obs = build_observation(env, "H", Pose(nav.position("H"), 0.0), _episode("H", (5, 2, Z)), [])
    assert obs.candidate_ids == ["E", "N", "W"]
    by_id = {c.place_id: c for c in obs.candidates}
    assert by_id["E"].direction == "front"
    assert by_id["N"].direction == "left"
    assert by_id["W"].direction == "rear"
    assert by_id["E"].remote_text.startswith("Place E (kitchen)")
    assert by_id["W"].remote_text.startswith("Place W (bedroom)")


def test_sector_front_for_neighbor_straight_ahead():
    assert SECTOR_NAMES[relative_sector(0.0, (0, 0), (2, 0))] == "front"
    assert SECTOR_NAMES[relative_sector(0.0, (0, 0), (0, -2))] == "right"


def test_sector_binning_matches_angle_classifier():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        heading = rng.uniform(0, 2 * math.pi)
        bearing = rng.uniform(-math.pi, math.pi)
        dx, dy = math.cos(bearing), math.sin(bearing)
        got = SECTOR_NAMES[relative_sector(heading, (0.0, 0.0), (dx, dy))]
        assert got == sector_oracle(heading, dx, dy)


def test_oracle_walks_a_b_c_then_stops(two_room):
    nav = _abc()
    env = two_room.env()
    env.nav = nav
    ep = _episode("A", nav.position("C"))
    # a radius below the edge length keeps the oracle from stopping at B
    traj = run_episode(env, OraclePolicy(nav, success_radius=0.5), ep, RunConfig(success_radius=0.5))
    assert traj.viewpoints == ["A", "B", "C"]
    assert traj.actions == [MoveTo("B"), MoveTo("C"), STOP]
    assert traj.reason == "Stopped"
    # headings follow the direction of travel
    assert traj.headings[1] == pytest.approx(0.0)


def test_oracle_stops_immediately_within_radius(two_room):
    nav = _abc()
    env = two_room.env()
    env.nav = nav
    traj = run_episode(env, OraclePolicy(nav), _episode("A", (3.5, 1, Z)))
    assert traj.viewpoints == ["A"] and traj.actions == [STOP]


def test_oracle_tie_breaks_lexicographically(two_room):
    nav = NavGraph({"s": (4, 1, Z), "n2": (4, 3, Z), "n1": (4, -1 + 0.0, Z), "g": (8, 1, Z)},
                   [("s", "n1"), ("s", "n2"), ("n1", "g"), ("n2", "g")])
    env = two_room.env()
    env.nav = nav
    traj = run_episode(env, OraclePolicy(nav, success_radius=0.5), _episode("s", (8, 1, Z)))
    assert traj.actions[0] == MoveTo("n1")


def test_stop_policy_gives_zero_length(two_room):
    env = two_room.env()
    ep = two_room.episodes[0]
    traj = run_episode(env, StopPolicy(), ep)
    assert traj.steps == 0 and traj.reason == "Stopped"
    assert traj.positions == [two_room.nav.position(ep.start_viewpoint)]


def test_cycle_hits_step_budget(two_room):
    nav = NavGraph({"a": (1, 1, Z), "b": (3, 1, Z), "c": (2, 3, Z)}, [("a", "b"), ("b", "c"), ("c", "a")])
    env = two_room.env()
    env.nav = nav
    traj = run_episode(env, FirstCandidatePolicy(), _episode("a", (2, 3, Z)), RunConfig(max_steps=7))
    assert traj.reason == "MaxSteps"
    assert traj.steps == 7 and len(traj.actions) == 7


def test_invalid_target_is_policy_failure(two_room):
    class Bad:
        def act(self, obs):
            return MoveTo("nowhere")

    traj = run_episode(two_room.env(), Bad(), two_room.episodes[0])
    assert traj.reason == "PolicyFailure" and traj.steps == 0


def test_action_text_round_trip():
    for a in (STOP, MoveTo("vp003")):
        assert Action.parse(str(a)) == a
    with pytest.raises(ValueError):
        Action.parse("jump")


def test_trajectory_dict_round_trip(apartment):
    traj = run_episode(apartment.env(), ScriptedPolicy(seed=3), apartment.episodes[0])
    assert Trajectory.from_dict(traj.to_dict()) == traj


def _random_graph(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 12))
    ids = [f"p{i:02d}" for i in range(n)]
    # positions inside the two-room footprint, every node linked to its predecessor
    pos = {v: (float(rng.uniform(0.3, 7.7)), float(rng.uniform(0.3, 3.7)), Z) for v in ids}
    edges = [(ids[i], ids[int(rng.integers(0, i))]) for i in range(1, n)]
    edges += [(a, b) for a in ids for b in ids if a < b and rng.random() < 0.2]
    return NavGraph(pos, edges), ids, rng


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 15))
def test_trajectory_validity_and_budget(two_room, seed, max_steps):
    nav, ids, rng = _random_graph(seed)
    env = two_room.env()
    env.nav = nav
    start = ids[int(rng.integers(0, len(ids)))]
    ep = _episode(start, nav.position(ids[-1]), eid=f"r{seed}")
    traj = run_episode(env, ScriptedPolicy(seed, stop_probability=0.1), ep, RunConfig(max_steps=max_steps))
    assert traj.viewpoints[0] == start
    assert traj.positions[0] == nav.position(start)
    for a, b in zip(traj.viewpoints, traj.viewpoints[1:]):
        assert b in nav.neighbors(a)
    assert traj.steps <= max_steps


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_oracle_path_is_shortest(two_room, seed):
    nav, ids, rng = _random_graph(seed)
    env = two_room.env()
    env.nav = nav
    start, goal = ids[int(rng.integers(0, len(ids)))], ids[int(rng.integers(0, len(ids)))]
    traj = run_episode(env, OraclePolicy(nav, success_radius=0.01), _episode(start, nav.position(goal)),
                       RunConfig(max_steps=50))
    length = sum(math.dist(a, b) for a, b in zip(traj.positions, traj.positions[1:]))
    assert length == pytest.approx(nav.distance(start, traj.viewpoints[-1]), abs=1e-9)
    assert traj.viewpoints[-1] == goal or math.dist(nav.position(goal), traj.positions[-1]) <= 0.01


def _run_with_images(env, ep):
    frames = []
    traj = run_episode(env, ScriptedPolicy(seed=11), ep, RunConfig(max_steps=4),
                       on_step=lambda obs, a: frames.append((png_bytes(obs.map_image), png_bytes(obs.compass_image),
                                                             [c.remote_text for c in obs.candidates])))
    return traj, frames


def test_run_is_byte_reproducible(two_room):
    ep = two_room.episodes[0]
    t1, f1 = _run_with_images(two_room.env(), ep)
    t2, f2 = _run_with_images(two_room.env(), ep)
    assert t1 == t2
    assert f1 == f2 and len(f1) >= 1
