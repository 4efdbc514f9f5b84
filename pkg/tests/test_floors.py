import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eps_components
from ssgnav.errors import EmptyInput, NoFloorFound
from ssgnav.pointcloud import PointCloud
from ssgnav.ssg import SegmentationParams, dbscan_1d, segment_floors
from ssgnav.ssg.floors import height_histogram


def test_single_slab_with_wall_points(rng):
    floor = np.column_stack([rng.uniform(0, 5, (10_000, 2)), rng.normal(0, 0.02, 10_000)])
    walls = np.column_stack([rng.uniform(0, 5, (2000, 2)), rng.uniform(0, 2.5, 2000)])
    slabs = segment_floors(PointCloud(np.vstack([floor, walls])))
    assert len(slabs) == 1
    assert abs(slabs[0].z_base) <= 0.05


def test_two_slabs_match_histogram_modes(rng, slab_cloud):
    cloud = slab_cloud(rng, (0.0, 3.0))
    slabs = segment_floors(cloud)
    assert len(slabs) == 2
    # oracle: argmax of the histogram restricted to each half of the height range
    z = cloud.points[:, 2]
    counts, edges = np.histogram(z, bins=np.arange(z.min(), z.max() + 0.05, 0.05))
    centers = 0.5 * (edges[:-1] + edges[1:])
    low, high = centers < 1.5, centers >= 1.5
    modes = [centers[low][np.argmax(counts[low])], centers[high][np.argmax(counts[high])]]
    for slab, mode, truth in zip(slabs, modes, (0.0, 3.0)):
        assert abs(slab.z_base - truth) <= 0.10
        assert abs(slab.z_base - mode) <= 0.10
    assert slabs[0].z_ceiling <= slabs[1].z_base


def test_uniform_noise_has_no_floor(rng):
    pts = np.column_stack([rng.uniform(0, 5, (20_000, 2)), rng.uniform(0, 10, 20_000)])
    counts, _, _ = height_histogram(pts[:, 2], 0.05)
    # oracle: no bin is concentrated relative to the typical bin
    assert counts.max() < 10 * np.median(counts)
    with pytest.raises(NoFloorFound):
        segment_floors(PointCloud(pts))


def test_empty_cloud_rejected():
    with pytest.raises(EmptyInput):
        segment_floors(None)


def test_noise_tolerance_merges_into_one_floor(rng):
    # reconstruction noise of +-0.15 m still yields one floor
    pts = np.column_stack([rng.uniform(0, 5, (10_000, 2)), rng.uniform(-0.15, 0.15, 10_000)])
    assert len(segment_floors(PointCloud(pts))) == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 20, allow_nan=False), min_size=1, max_size=40))
def test_dbscan_min_pts_one_equals_eps_components(values):
    labels = dbscan_1d(np.array(values), 0.3, 1)
    comp = eps_components(values, 0.3)
    n = len(values)
    for i in range(n):
        for j in range(n):
            assert (labels[i] == labels[j]) == (comp[i] == comp[j])
    assert (labels >= 0).all()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=40), st.integers(1, 5))
def test_dbscan_core_points_match_brute_force(values, min_pts):
    v = np.array(values)
    labels = dbscan_1d(v, 0.3, min_pts)
    n = len(v)
    nbrs = [[j for j in range(n) if abs(v[i] - v[j]) <= 0.3] for i in range(n)]
    core = [len(nb) >= min_pts for nb in nbrs]
    core_vals = [v[i] for i in range(n) if core[i]]
    core_ids = [i for i in range(n) if core[i]]
    comp = eps_components(core_vals, 0.3)
    for a in range(len(core_ids)):
        for b in range(len(core_ids)):
            same = labels[core_ids[a]] == labels[core_ids[b]]
            assert same == (comp[a] == comp[b])
    for i in range(n):
        if core[i]:
            continue
        near_core = [j for j in nbrs[i] if core[j]]
        if not near_core:
            assert labels[i] == -1
        else:
            assert labels[i] in {labels[j] for j in near_core}


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0, 30), min_size=1, max_size=4, unique=True), st.integers(0, 10_000))
def test_slabs_sorted_and_disjoint(modes, seed):
    rng = np.random.default_rng(seed)
    pts = [np.column_stack([rng.uniform(0, 4, (3000, 2)), rng.normal(m, 0.02, 3000)]) for m in modes]
    slabs = segment_floors(PointCloud(np.vstack(pts)), SegmentationParams())
    assert len(slabs) >= 1
    for a, b in zip(slabs, slabs[1:]):
        assert a.z_base < b.z_base
        assert a.z_ceiling <= b.z_base
    assert [s.index for s in slabs] == list(range(len(slabs)))
