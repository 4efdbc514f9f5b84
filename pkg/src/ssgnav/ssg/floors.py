"""Floor segmentation from the point height histogram."""

from __future__ import annotations

from typing import List

import numpy as np

from ..errors import EmptyInput, NoFloorFound
from ..pointcloud import PointCloud
from .types import FloorSlab, SegmentationParams


def dbscan_1d(values: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """DBSCAN over scalars. Returns a cluster label per value, -1 for noise.

    Clusters are numbered in ascending order of value.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    order = np.argsort(values, kind="stable")
    v = values[order]
    # neighbor counts include the point itself
    lo = np.searchsorted(v, v - eps, side="left")
    hi = np.searchsorted(v, v + eps, side="right")
    core = (hi - lo) >= min_pts
    sorted_labels = np.full(n, -1, dtype=np.int64)
    current = -1
    last_core = None
    for i in range(n):
        if not core[i]:
            continue
        if last_core is None or v[i] - v[last_core] > eps:
            current += 1
        sorted_labels[i] = current
        last_core = i
    # border points join the nearest core within eps
    core_idx = np.flatnonzero(core)
    for i in np.flatnonzero(~core):
        if len(core_idx) == 0:
            break
        d = np.abs(v[core_idx] - v[i])
        j = int(np.argmin(d))
        if d[j] <= eps:
            sorted_labels[i] = sorted_labels[core_idx[j]]
    labels[order] = sorted_labels
    return labels


def height_histogram(z: np.ndarray, bin_width: float):
    """Counts and bin index per point, with bins anchored at min(z)."""
    z0 = float(z.min())
    nbins = max(1, int(np.ceil((float(z.max()) - z0) / bin_width)))
    idx = np.minimum(np.floor((z - z0) / bin_width).astype(np.int64), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    return counts, idx, z0


# A floor bin must beat a uniform spread of all points by this factor, plus
# a Poisson margin, to count as a concentration at all.
CONCENTRATION = 2.0
MIN_SPREAD = 1.0  # m; clouds thinner than this are judged as if this tall


def uniform_bin_level(n_points: int, z_range: float, bin_width: float) -> float:
    """Expected count per bin if the points were spread evenly in height."""
    return n_points * bin_width / max(z_range, MIN_SPREAD)


def find_height_peaks(counts: np.ndarray, peak_fraction: float, uniform_level: float = 0.0) -> np.ndarray:
    """Indices of local-maximum bins that qualify as floor candidates.

    A peak must reach ``peak_fraction`` of the tallest bin and must clearly
    exceed ``uniform_level``, so a histogram with no concentration (uniform
    noise) yields no peaks at all.
    """
    padded = np.concatenate([[0], counts, [0]])
    mid = padded[1:-1]
    is_max = (mid > 0) & (mid >= padded[:-2]) & (mid >= padded[2:])
    max_count = counts.max()
    floor_level = CONCENTRATION * uniform_level + 4.0 * np.sqrt(uniform_level)
    ok = is_max & (mid >= peak_fraction * max_count) & (mid > floor_level)
    return np.flatnonzero(ok)


def segment_floors(cloud: PointCloud, params: SegmentationParams = SegmentationParams()) -> List[FloorSlab]:
    if cloud is None or len(cloud) == 0:
        raise EmptyInput("cannot segment floors of an empty cloud")
    z = cloud.points[:, 2]
    counts, idx, z0 = height_histogram(z, params.histogram_bin)
    level = uniform_bin_level(len(z), float(z.max() - z.min()), params.histogram_bin)
    peaks = find_height_peaks(counts, params.peak_fraction, level)
    if len(peaks) == 0:
        raise NoFloorFound("no height-histogram bin qualifies as a floor peak")

    centers = z0 + (peaks + 0.5) * params.histogram_bin
    labels = dbscan_1d(centers, params.dbscan_eps, params.dbscan_min_pts)
    surfaces = []
    for lab in sorted(set(labels.tolist()) - {-1}):
        bins = peaks[labels == lab]
        members = np.isin(idx, bins)
        # count-weighted mean height of the cluster's bins, taken over the raw points
        surfaces.append((float(z[members].mean()), int(members.sum())))
    if not surfaces:
        raise NoFloorFound("all floor peaks were rejected as DBSCAN noise")
    surfaces.sort()

    z_max = float(z.max())
    slabs = []
    for i, (base, support) in enumerate(surfaces):
        if i + 1 < len(surfaces):
            ceiling = surfaces[i + 1][0] - params.histogram_bin
        else:
            ceiling = max(z_max, base + params.histogram_bin)
        slabs.append(FloorSlab(index=i, z_base=base, z_ceiling=ceiling, support_count=support))
    return slabs
