"""Scan-to-map registration: voxel compaction, nearest-neighbor index, and a
planar-motion point-to-point ICP.

Correspondences are found in 3D (so elevation structure still
disambiguates), but the motion update is constrained to SE(2): a closed-form
weighted planar alignment with yaw from atan2 over the cross-covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyReference, NoCorrespondences
from .frontend import PointCloud
from .geometry import Pose2

#: ICP aborts when fewer than this fraction of source points find a neighbor.
MIN_MATCHED_FRACTION = 0.2


@dataclass(frozen=True)
class IcpConfig:
    k_nn: int = 4
    max_iterations: int = 40
    translation_epsilon: float = 1e-3
    rotation_epsilon: float = 1e-4
    max_correspondence_distance: float = 5.0
    #: Carry per-point (tilt-gate) weights into the residuals; ablatable.
    use_point_weights: bool = True

    def __post_init__(self):
        if self.k_nn < 1:
            raise ValueError("k_nn must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.translation_epsilon <= 0.0 or self.rotation_epsilon <= 0.0:
            raise ValueError("convergence epsilons must be positive")
        if self.max_correspondence_distance <= 0.0:
            raise ValueError("max_correspondence_distance must be positive")


@dataclass(frozen=True)
class IcpResult:
    """delta: correction composed on top of the prior (source -> reference);
    final_cost: mean weighted squared planar residual (m^2)."""

    delta: Pose2
    iterations: int
    final_cost: float
    matched_fraction: float


@dataclass(frozen=True)
class VoxelGridIndex:
    """Per-occupied-voxel aggregate of a point cloud.

    cells: (M, 3) integer voxel coordinates (floor(p / edge)), unique and
    lexicographically sorted.  centroid is the weight-weighted mean of the
    member points; count and mean_weight describe the membership.
    """

    edge: float
    cells: np.ndarray
    centroids: np.ndarray
    counts: np.ndarray
    mean_weights: np.ndarray
    mean_intensity: np.ndarray
    min_t: np.ndarray

    def __len__(self) -> int:
        return self.cells.shape[0]

    def cell_of(self, point) -> tuple[int, int, int]:
        c = np.floor(np.asarray(point, dtype=float) / self.edge).astype(np.int64)
        return int(c[0]), int(c[1]), int(c[2])


def build_voxel_index(cloud: PointCloud, edge: float) -> VoxelGridIndex:
    """Group a cloud into voxels of the given edge length."""
    if edge <= 0.0:
        raise ValueError("voxel edge must be positive")
    if len(cloud) == 0:
        empty3 = np.empty((0, 3))
        return VoxelGridIndex(
            edge,
            np.empty((0, 3), dtype=np.int64),
            empty3,
            np.empty(0, dtype=np.int64),
            np.empty(0),
            np.empty(0),
            np.empty(0, dtype=np.int64),
        )
    cells = np.floor(cloud.xyz / edge).astype(np.int64)
    unique_cells, inverse = np.unique(cells, axis=0, return_inverse=True)
    m = unique_cells.shape[0]
    counts = np.bincount(inverse, minlength=m)
    # Zero-total-weight voxels fall back to unweighted averaging.
    w = cloud.weight
    w_sum = np.bincount(inverse, weights=w, minlength=m)
    zero = w_sum <= 0.0
    eff_w = np.where(zero[inverse], 1.0, w)
    eff_sum = np.where(zero, counts.astype(float), w_sum)
    centroids = np.column_stack(
        [
            np.bincount(inverse, weights=eff_w * cloud.xyz[:, i], minlength=m)
            for i in range(3)
        ]
    ) / eff_sum[:, None]
    mean_w = w_sum / counts
    mean_intensity = (
        np.bincount(inverse, weights=eff_w * cloud.intensity, minlength=m) / eff_sum
    )
    min_t = np.full(m, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(min_t, inverse, cloud.t)
    return VoxelGridIndex(
        edge, unique_cells, centroids, counts, mean_w, mean_intensity, min_t
    )


def voxel_downsample(cloud: PointCloud, edge: float) -> PointCloud:
    """One point per occupied voxel at the weighted centroid.

    The output carries each voxel's mean weight, weighted mean intensity
    and earliest member timestamp; stage and t_ref are preserved.  Output
    order follows the sorted voxel coordinates and is deterministic.
    """
    index = build_voxel_index(cloud, edge)
    if len(index) == 0:
        return replace(cloud)
    return replace(
        cloud,
        xyz=index.centroids,
        intensity=index.mean_intensity,
        t=index.min_t,
        weight=index.mean_weights,
    )


class NnIndex:
    """k-nearest-neighbor index over a reference cloud (3D metric)."""

    def __init__(self, points: np.ndarray):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if points.shape[0] == 0:
            raise EmptyReference("cannot index an empty reference cloud")
        self.points = points
        self._tree = cKDTree(points)

    def __len__(self) -> int:
        return self.points.shape[0]

    def query(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Distances and indices of the up-to-k nearest reference points,
        sorted by distance; shapes are (Q, min(k, len(index)))."""
        queries = np.asarray(queries, dtype=float).reshape(-1, 3)
        kk = min(k, len(self))
        dist, idx = self._tree.query(queries, k=kk)
        if kk == 1:
            dist = dist[:, None]
            idx = idx[:, None]
        return dist, idx


def build_nn_index(reference: PointCloud) -> NnIndex:
    """Build a nearest-neighbor index from a reference cloud."""
    if len(reference) == 0:
        raise EmptyReference("reference cloud is empty")
    return NnIndex(reference.xyz)


def _solve_planar(src: np.ndarray, ref: np.ndarray, w: np.ndarray) -> Pose2:
    """Weighted closed-form SE(2) alignment of matched planar pairs."""
    w_total = float(w.sum())
    if w_total <= 0.0:
        return Pose2(0.0, 0.0, 0.0)
    src_c = (w[:, None] * src).sum(axis=0) / w_total
    ref_c = (w[:, None] * ref).sum(axis=0) / w_total
    ds = src - src_c
    dr = ref - ref_c
    h_xx = float((w * ds[:, 0] * dr[:, 0]).sum())
    h_xy = float((w * ds[:, 0] * dr[:, 1]).sum())
    h_yx = float((w * ds[:, 1] * dr[:, 0]).sum())
    h_yy = float((w * ds[:, 1] * dr[:, 1]).sum())
    sin_term = h_xy - h_yx
    cos_term = h_xx + h_yy
    if abs(sin_term) < 1e-12 and abs(cos_term) < 1e-12:
        # Rotation unobservable (e.g. all mass in one voxel): keep yaw fixed.
        yaw = 0.0
    else:
        yaw = math.atan2(sin_term, cos_term)
    c, s = math.cos(yaw), math.sin(yaw)
    tx = ref_c[0] - (c * src_c[0] - s * src_c[1])
    ty = ref_c[1] - (s * src_c[0] + c * src_c[1])
    return Pose2(tx, ty, yaw)


def _apply_planar(pose: Pose2, xyz: np.ndarray) -> np.ndarray:
    out = xyz.copy()
    out[:, :2] = pose.transform_xy(xyz[:, :2])
    return out


def icp_point_to_point(
    source: PointCloud,
    reference: PointCloud,
    prior: Pose2,
    cfg: IcpConfig = IcpConfig(),
    index: NnIndex | None = None,
) -> IcpResult:
    """Align a source cloud to a reference with an SE(2) motion model.

    Each source point is matched to its k_nn nearest reference points in 3D
    (pairs beyond max_correspondence_distance are dropped, each pair weighted
    by the point weight / k_nn), then a closed-form weighted planar transform
    is solved and composed onto the running estimate until the incremental
    update falls below the epsilons.

    Returns the correction ``delta`` such that ``delta.compose(prior)`` maps
    source coordinates onto the reference.  Raises NoCorrespondences when
    fewer than 20% of source points match on the first iteration, and
    EmptyReference for an empty reference cloud.
    """
    if len(reference) == 0:
        raise EmptyReference("reference cloud is empty")
    if len(source) == 0:
        raise NoCorrespondences("source cloud is empty")
    if index is None:
        index = build_nn_index(reference)
    estimate = prior
    src_xyz = source.xyz
    n = src_xyz.shape[0]
    point_w = source.weight if cfg.use_point_weights else np.ones(n)
    kk = min(cfg.k_nn, len(index))
    iterations = 0
    final_cost = 0.0
    matched_fraction = 0.0
    for iterations in range(1, cfg.max_iterations + 1):
        moved = _apply_planar(estimate, src_xyz)
        dist, idx = index.query(moved, kk)
        valid = dist <= cfg.max_correspondence_distance
        matched_fraction = float(np.any(valid, axis=1).mean())
        if iterations == 1 and matched_fraction < MIN_MATCHED_FRACTION:
            raise NoCorrespondences(
                f"only {matched_fraction:.0%} of source points matched within "
                f"{cfg.max_correspondence_distance} m"
            )
        rows = np.repeat(np.arange(n), kk)[valid.ravel()]
        ref_pts = index.points[idx.ravel()[valid.ravel()]]
        pair_w = point_w[rows] / kk
        update = _solve_planar(moved[rows, :2], ref_pts[:, :2], pair_w)
        estimate = update.compose(estimate)
        aligned = update.transform_xy(moved[rows, :2])
        residual_sq = np.sum((aligned - ref_pts[:, :2]) ** 2, axis=1)
        w_total = float(pair_w.sum())
        final_cost = float((pair_w * residual_sq).sum() / w_total) if w_total > 0 else 0.0
        if (
            math.hypot(update.x, update.y) < cfg.translation_epsilon
            and abs(update.yaw) < cfg.rotation_epsilon
        ):
            break
    delta = estimate.compose(prior.inverse())
    return IcpResult(delta, iterations, final_cost, matched_fraction)
