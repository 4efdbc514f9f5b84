import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dtw_oracle, ndtw_oracle
from ssgnav.errors import EmptyInput, EmptyPath, NegativeLength
from ssgnav.metrics import (
    EpisodeResult,
    aggregate,
    aggregate_by,
    build_report,
    dtw,
    evaluate_episode,
    format_table,
    navigation_error,
    ndtw,
    oracle_success,
    spl,
    success,
    trajectory_length,
)
from ssgnav.nav import Episode, NavGraph, Trajectory

point = st.tuples(*[st.floats(0, 5, allow_nan=False)] * 3)
paths = st.lists(point, min_size=1, max_size=12)


def _result(eid, ok, s, **kw):
    base = dict(tl=1.0, ne=1.0 if ok else 5.0, oracle_success=ok, ndtw=0.5)
    base.update(kw)
    return EpisodeResult(eid, success=ok, spl=s, **base)


def test_trajectory_length_examples():
    assert trajectory_length([(1, 2, 3)]) == 0.0
    assert trajectory_length([(0, 0, 0), (3, 4, 0)]) == 5.0


def test_trajectory_length_matches_fold_left():
    rng = np.random.default_rng(5)
    for _ in range(100):
        pts = np.cumsum(rng.normal(0, 1, (int(rng.integers(1, 30)), 3)), axis=0)
        want = reduce(lambda acc, ab: acc + math.dist(*ab), zip(pts, pts[1:]), 0.0)
        assert trajectory_length(pts) == pytest.approx(want, abs=1e-12)


def test_navigation_error_and_success():
    path = [(0, 0, 0), (3, 4, 0)]
    ne = navigation_error(path, (0, 0, 0))
    assert ne == 5.0 and not success(ne, 3.0)
    assert success(2.99) and not success(3.01)
    assert success(3.0)
    passing = [(0, 0, 0), (1, 0, 0), (10, 0, 0)]
    goal = (1, 1, 0)
    assert oracle_success(passing, goal) and not success(navigation_error(passing, goal))


def test_spl_examples():
    assert spl(True, 4.0, 4.0) == 1.0
    assert spl(True, 4.0, 8.0) == 0.5
    assert spl(False, 4.0, 4.0) == 0.0
    assert spl(True, 0.0, 0.0) == 1.0
    with pytest.raises(NegativeLength):
        spl(True, -1.0, 2.0)


def test_ndtw_examples():
    ref = [(0, 0, 0), (1, 0, 0), (2, 1, 0)]
    assert ndtw(ref, ref) == 1.0
    assert ndtw([(2, 0, 0)], [(0, 0, 0)]) == pytest.approx(math.exp(-2 / 3.0))
    with pytest.raises(EmptyPath):
        ndtw([], ref)


def test_ndtw_matches_dp_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        p = rng.uniform(0, 10, (int(rng.integers(1, 21)), 3))
        r = rng.uniform(0, 10, (int(rng.integers(1, 21)), 3))
        assert dtw(p, r) == pytest.approx(dtw_oracle(p, r), abs=1e-9)
        assert ndtw(p, r) == pytest.approx(ndtw_oracle(p, r), abs=1e-9)


def test_aggregate_examples():
    four = [_result(f"e{i}", True, 1.0) for i in range(4)]
    s = aggregate(four)
    assert (s.sr, s.spl) == (100.0, 100.0)
    two = aggregate([_result("a", True, 0.5), _result("b", False, 0.0)])
    assert (two.sr, two.spl) == (50.0, 25.0)
    with pytest.raises(EmptyInput):
        aggregate([])


def test_aggregate_singleton_equals_fields():
    r = EpisodeResult("x", tl=7.25, ne=1.5, success=True, oracle_success=True, spl=0.8123, ndtw=0.66666)
    s = aggregate([r])
    assert s.count == 1 and s.tl == r.tl and s.ne == r.ne
    assert (s.sr, s.osr, s.spl, s.ndtw) == (100.0, 100.0, 81.2, 66.7)


def test_grouped_table():
    rs = [_result("a", True, 1.0), _result("b", False, 0.0), _result("c", True, 0.5)]
    groups = aggregate_by(rs, lambda r: "ok" if r.success else "fail")
    assert list(groups) == ["fail", "ok"]
    text = format_table(groups)
    header = text.splitlines()[0].split()
    assert header == ["Method", "TL", "NE", "OSR", "SR", "SPL", "nDTW"]
    assert "ok" in text and "75.0" in text
    doc = build_report(rs, label="demo", groups=groups)
    assert doc["summary"]["count"] == 3 and doc["success_radius_m"] == 3.0


def test_evaluate_episode_uses_graph_shortest_path():
    nav = NavGraph({"A": (0, 0, 0), "B": (4, 0, 0), "C": (4, 3, 0)}, [("A", "B"), ("B", "C")])
    ep = Episode("e", "go", "A", 0.0, (4, 3, 0), ("A", "B", "C"))
    traj = Trajectory("e", ["A", "B", "C"], [nav.position(v) for v in "ABC"], [0, 0, 0])
    res = evaluate_episode(traj, ep, nav)
    assert res.tl == 7.0 and res.ne == 0.0 and res.success and res.spl == 1.0 and res.ndtw == 1.0
    detour = Trajectory("e", list("ABABC"), [nav.position(v) for v in "ABABC"], [0] * 5)
    assert evaluate_episode(detour, ep, nav).spl == pytest.approx(7 / 15)


@settings(max_examples=200, deadline=None)
@given(paths, point, st.floats(0.1, 10))
def test_success_implies_oracle_success(path, goal, radius):
    if success(navigation_error(path, goal), radius):
        assert oracle_success(path, goal, radius)


@settings(max_examples=200, deadline=None)
@given(st.booleans(), st.floats(0, 100), st.floats(0, 100))
def test_spl_bounded(ok, shortest, actual):
    v = spl(ok, shortest, actual)
    assert 0.0 <= v <= 1.0
    assert v <= float(ok)


@settings(max_examples=100, deadline=None)
@given(paths, paths, st.floats(10, 100), st.floats(0, 2 * math.pi))
def test_ndtw_identity_and_far_append(p, r, far, angle):
    assert ndtw(p, p) == 1.0
    # every point lies in a 5 m cube, so this is >= 10 m from all of them
    x = (2.5 + (far + 5) * math.cos(angle), 2.5 + (far + 5) * math.sin(angle), 2.5)
    assert ndtw(p + [x], r) <= ndtw(p, r)
