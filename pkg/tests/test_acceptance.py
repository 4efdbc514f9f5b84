"""Top-level acceptance criteria, one test each."""

import json
import math
import time

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
import pytest
from scipy import ndimage

from conftest import SESSION_START, run_cli
from gateway_stub import serve
from oracles import (
    dtw_oracle,
    localize_oracle,
    ndtw_oracle,
    random_rect_ssg,
    receptive_field_rooms_oracle,
    remote_objects_oracle,
    rotate_cw_about_center,
)
from ssgnav.geometry import CellState, Pose
from ssgnav.metrics import aggregate, evaluate_episode, navigation_error, ndtw, spl, success
from ssgnav.nav import OraclePolicy, RunConfig, StopPolicy, run_episode
from ssgnav.pointcloud import PointCloud
from ssgnav.query import localize, query_receptive_field, remote_objects
from ssgnav.render import MapConfig, agent_marker_box, compose_compass, render_spatial_map
from ssgnav.render.spatial_map import AGENT_COLOR
from ssgnav.ssg import SegmentationParams, segment_floors

TABLE5_RADII = (3.84, 7.68, 11.52)


@pytest.mark.acceptance(1, "floor segmentation finds 2 slabs / 1 slab in under 1 s")
def test_floor_segmentation(rng):
    pts = [np.column_stack([rng.uniform(0, 6, (10_000, 2)), rng.normal(z, 0.02, 10_000)]) for z in (0.0, 3.0)]
    two = PointCloud(np.vstack(pts))
    one = PointCloud(pts[0])
    t0 = time.perf_counter()
    slabs = segment_floors(two)
    single = segment_floors(one)
    elapsed = time.perf_counter() - t0
    assert len(slabs) == 2
    assert abs(slabs[0].z_base - 0.0) <= 0.10 and abs(slabs[1].z_base - 3.0) <= 0.10
    assert len(single) == 1
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "room segmentation: two rooms, flagged hall, exact partition")
def test_room_segmentation(two_room, hall, apartment):
    rooms = two_room.graph.rooms
    assert len(rooms) == 2
    assert all(abs(r.area - 16.0) <= 0.15 * 16.0 for r in rooms)
    assert not any(r.review_flag for r in rooms)
    assert [r.review_flag for r in hall.graph.rooms] == [True]
    for scene in (two_room, hall, apartment):
        g = scene.graph
        for fi, grid in enumerate(g.grids):
            cover = np.zeros(grid.shape, dtype=np.int32)
            for r in g.rooms_on_floor(fi):
                cover += r.mask
                assert ndimage.label(r.mask)[1] == 1
            np.testing.assert_array_equal(cover, (grid.cells == CellState.FREE).astype(np.int32))


@pytest.mark.acceptance(3, "query results equal brute-force oracles on 20 scenes x 1000 poses")
def test_query_equivalence():
    for seed in range(20):
        g = random_rect_ssg(seed)
        assert len(g.rooms) <= 10 and len(g.objects) <= 50
        rng = np.random.default_rng(10_000 + seed)
        for _ in range(1000):
            fi = int(rng.integers(0, len(g.floors)))
            grid = g.grids[fi]
            x = rng.uniform(grid.origin_xy[0] - 0.5, grid.origin_xy[0] + grid.width * grid.resolution + 0.5)
            y = rng.uniform(grid.origin_xy[1] - 0.5, grid.origin_xy[1] + grid.height * grid.resolution + 0.5)
            z = g.floors[fi].z_base + rng.uniform(0.0, 1.8)
            pose = Pose((x, y, z), rng.uniform(0, 2 * math.pi))

            loc = localize(g, pose)
            assert (loc.floor_index, loc.room_id) == localize_oracle(g, x, y, z)

            rep = remote_objects(g, pose.position)
            want = remote_objects_oracle(g, loc.room_id, pose.position)
            assert {grp.category: len(grp.distances) for grp in rep.groups} == {k: len(v) for k, v in want.items()}
            for grp in rep.groups:
                assert np.max(np.abs(np.array(grp.distances) - want[grp.category])) <= 1e-6

            nested = []
            for r in TABLE5_RADII:
                got = set(query_receptive_field(g, pose, r).room_ids)
                assert got == receptive_field_rooms_oracle(g, fi, x, y, r)
                nested.append(got)
            assert nested[0] <= nested[1] <= nested[2]


def _packed(img):
    return img.pixels.astype(np.int64) @ np.array([1 << 24, 1 << 16, 1 << 8, 1], dtype=np.int64)


@pytest.mark.acceptance(4, "rendering: 1024 map and compass, centered agent, exact rotation, 7.68 m top edge")
def test_rendering(apartment):
    from test_render import LAYOUT, _ctx, _solid_views

    g = apartment.graph
    cfg = MapConfig()
    rng = np.random.default_rng(4)
    free = np.argwhere(g.grids[0].cells == CellState.FREE)
    r0, r1, c0, c1 = agent_marker_box(cfg)
    for _ in range(100):
        row, col = free[int(rng.integers(0, len(free)))]
        x = g.grids[0].origin_xy[0] + (col + 0.5) * g.grids[0].resolution
        y = g.grids[0].origin_xy[1] + (row + 0.5) * g.grids[0].resolution
        pose = Pose((x, y, 1.5), rng.uniform(0, 2 * math.pi))
        img = render_spatial_map(query_receptive_field(g, pose), cfg)
        assert (img.width, img.height) == (1024, 1024)
        assert tuple(img.pixels[512, 512]) == AGENT_COLOR
        # the marker is symmetric about the center column
        marker = (img.pixels[r0:r1, c0:c1] == np.array(AGENT_COLOR, dtype=np.uint8)).all(axis=2)
        np.testing.assert_array_equal(marker, marker[:, ::-1])
        assert marker.sum() > 50

    # quarter-turn equivariance at the default size, labels off
    plain = MapConfig(draw_labels=False)
    room = g.rooms[0]
    pose = Pose((room.centroid[0], room.centroid[1], 1.5), 0.7)
    turned = Pose(pose.position, 0.7 + math.pi / 2)
    a = _packed(render_spatial_map(query_receptive_field(g, pose), plain))
    b = _packed(render_spatial_map(query_receptive_field(g, turned), plain))
    want = rotate_cw_about_center(a, 512)
    keep = want >= 0
    keep[r0:r1, c0:c1] = False
    keep[c0:c1, 1024 - r1:1024 - r0 + 1] = False
    np.testing.assert_array_equal(b[keep], want[keep])

    views, colors = _solid_views()
    comp = compose_compass(views)
    assert (comp.width, comp.height) == (1024, 1024)
    centers = [170, 342 + 170, 684 + 170]
    for d, (r, c) in LAYOUT.items():
        assert tuple(comp.pixels[centers[r], centers[c]]) == colors[d]

    ahead = Pose((0.0, 0.0, 0.0), math.pi / 2)
    strip = render_spatial_map(_ctx(ahead, [(-1.0, 7.6, 1.0, 7.9)], categories=["kitchen"]), plain)
    assert 7.68 / 0.015 == 512
    assert tuple(strip.pixels[0, 512]) == plain.color_for("kitchen")


@pytest.mark.acceptance(5, "metrics: nDTW oracle, identities, 3 m boundary, SPL properties")
def test_metrics():
    rng = np.random.default_rng(55)
    for _ in range(100):
        p = rng.uniform(0, 10, (int(rng.integers(1, 21)), 3))
        r = rng.uniform(0, 10, (int(rng.integers(1, 21)), 3))
        assert abs(ndtw(p, r) - ndtw_oracle(p, r)) <= 1e-9
        assert ndtw(p, p) == 1.0
    assert success(navigation_error([(0, 0, 0), (2.99, 0, 0)], (0, 0, 0)))
    assert success(3.0) and not success(3.01)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 1e3), st.floats(0, 1e3))
    def spl_identities(shortest, actual):
        assert spl(True, shortest, shortest) == 1.0
        assert spl(False, shortest, actual) == 0.0
        assert 0.0 <= spl(True, shortest, actual) <= 1.0

    spl_identities()


@pytest.mark.run_last
@pytest.mark.acceptance(6, "end to end: oracle SR 100 / SPL >= 95, stop-policy SR from geometry, suite < 2 min")
def test_end_to_end(apartment):
    nav, eps = apartment.nav, apartment.episodes
    assert len(nav.viewpoints) == 20 and len(eps) == 10
    env = apartment.env()
    oracle = [evaluate_episode(run_episode(env, OraclePolicy(nav), ep), ep, nav) for ep in eps]
    s = aggregate(oracle)
    assert s.sr == 100.0 and s.spl >= 95.0

    stop = aggregate([evaluate_episode(run_episode(env, StopPolicy(), ep), ep, nav) for ep in eps])
    near = sum(math.dist(nav.position(ep.start_viewpoint), ep.goal) <= 3.0 for ep in eps)
    assert stop.sr == round(100 * near / len(eps), 1)

    assert time.monotonic() - SESSION_START < 120.0


def _files(root, *names):
    return {n: (root / n).read_bytes() for n in names}


@pytest.mark.acceptance(7, "determinism: build-ssg, render-map, scripted run, transcript replay")
def test_determinism(tmp_path):
    scene = tmp_path / "scene"
    assert run_cli("generate-scene", "--layout", "two_room", "--out-dir", scene) == 0
    for name in ("a", "b"):
        assert run_cli("build-ssg", "--cloud", scene / "cloud.ply", "--annotations", scene / "annotations.json",
                       "--out", tmp_path / f"ssg_{name}.json") == 0
        assert run_cli("render-map", "--ssg", tmp_path / "ssg_a.json", "--pose", 2, 2, 1.5, 0.4,
                       "--out", tmp_path / f"map_{name}.png") == 0
    assert (tmp_path / "ssg_a.json").read_bytes() == (tmp_path / "ssg_b.json").read_bytes()
    assert (tmp_path / "map_a.png").read_bytes() == (tmp_path / "map_b.png").read_bytes()

    base = ["--ssg", tmp_path / "ssg_a.json", "--nav-graph", scene / "nav_graph.json",
            "--episodes", scene / "episodes.json"]
    for name, jobs in (("r1", 1), ("r2", 3)):
        assert run_cli("run", *base, "--policy", "scripted", "--seed", 7, "--max-steps", 4, "--save-images",
                       "--jobs", jobs, "--out-dir", tmp_path / name) == 0
    one = sorted(p.relative_to(tmp_path / "r1") for p in (tmp_path / "r1").rglob("*") if p.is_file())
    two = sorted(p.relative_to(tmp_path / "r2") for p in (tmp_path / "r2").rglob("*") if p.is_file())
    assert one == two and len(one) > 2
    for rel in one:
        assert (tmp_path / "r1" / rel).read_bytes() == (tmp_path / "r2" / rel).read_bytes()

    with serve() as (url, _):
        assert run_cli("run", *base, "--policy", "gateway", "--endpoint", url, "--backoff", 0,
                       "--transcript", tmp_path / "t.jsonl", "--out-dir", tmp_path / "live") == 0
    assert run_cli("run", *base, "--policy", "replay", "--replay", tmp_path / "t.jsonl",
                   "--transcript", tmp_path / "t2.jsonl", "--out-dir", tmp_path / "replayed") == 0
    live = json.loads((tmp_path / "live" / "trajectories.json").read_text())
    assert all(t["reason"] == "Stopped" for t in live)
    assert (tmp_path / "live" / "trajectories.json").read_bytes() == \
        (tmp_path / "replayed" / "trajectories.json").read_bytes()
