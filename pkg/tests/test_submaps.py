"""Tests for the submap atlas: tilt-proximity search and merge-or-create."""

import math

import numpy as np
import pytest

from tiltro.frontend import PointCloud
from tiltro.geometry import Pose2, UnitQuat, relative_tilt
from tiltro.submaps import (
    Atlas,
    Submap,
    find_submap,
    lift_to_world,
    tilt_lift,
    update_atlas,
)


def _cloud(n=20, seed=0, stage="deskewed"):
    rng = np.random.default_rng(seed)
    xyz = rng.uniform(-10.0, 10.0, size=(n, 3))
    xyz[:, 2] = 0.0
    return PointCloud(
        stage, xyz, np.full(n, 100.0), np.zeros(n, dtype=np.int64), np.ones(n), 0
    )


def _submap(sid, x, y, roll=0.0, pitch=0.0):
    return Submap(
        submap_id=sid,
        anchor=Pose2(x, y, 0.0),
        attitude_signature=(roll, pitch),
        cloud=_cloud(seed=sid),
        scan_count=1,
        last_update_t=0,
    )


def _level():
    return UnitQuat.identity()


def test_find_submap_empty_atlas_misses():
    assert find_submap(Atlas(), Pose2.identity(), _level()) is None


def test_find_submap_closest_wins():
    atlas = Atlas(submaps=[_submap(0, 12.0, 0.0), _submap(1, 5.0, 0.0)])
    found = find_submap(atlas, Pose2.identity(), _level())
    assert found is not None
    assert found[0].submap_id == 1


def test_find_submap_tilt_excludes_nearer_candidate():
    # The 5 m submap disagrees in pitch by 10 deg, the 12 m one by 1 deg;
    # the tilt gate throws out the nearer candidate.
    atlas = Atlas(
        submaps=[
            _submap(0, 5.0, 0.0, pitch=0.0),
            _submap(1, 12.0, 0.0, pitch=math.radians(9.0)),
        ]
    )
    q_now = UnitQuat.from_rpy(0.0, math.radians(10.0), 0.0)
    found = find_submap(atlas, Pose2.identity(), q_now)
    assert found is not None
    submap, tilt = found
    assert submap.submap_id == 1
    assert tilt.angle_deg == pytest.approx(1.0, abs=1e-6)


def test_find_submap_distance_only_mode_ignores_tilt():
    atlas = Atlas(
        submaps=[
            _submap(0, 5.0, 0.0, pitch=0.0),
            _submap(1, 12.0, 0.0, pitch=math.radians(9.0)),
        ]
    )
    q_now = UnitQuat.from_rpy(0.0, math.radians(10.0), 0.0)
    found = find_submap(atlas, Pose2.identity(), q_now, require_tilt=False)
    assert found is not None
    assert found[0].submap_id == 0


def test_find_submap_boundaries():
    # Distance uses <= r_submap; tilt uses strict < theta_tilt.
    atlas = Atlas(submaps=[_submap(0, 20.0, 0.0)])
    assert find_submap(atlas, Pose2.identity(), _level()) is not None
    atlas = Atlas(submaps=[_submap(0, 20.000001, 0.0)])
    assert find_submap(atlas, Pose2.identity(), _level()) is None
    atlas = Atlas(submaps=[_submap(0, 5.0, 0.0)])
    exactly = UnitQuat.from_rpy(0.0, math.radians(3.0), 0.0)
    assert find_submap(atlas, Pose2.identity(), exactly) is None
    just_under = UnitQuat.from_rpy(0.0, math.radians(2.999), 0.0)
    assert find_submap(atlas, Pose2.identity(), just_under) is not None


def test_find_submap_matches_exhaustive_oracle():
    rng = np.random.default_rng(61)
    for trial in range(60):
        n = int(rng.integers(0, 101))
        submaps = [
            _submap(
                i,
                float(rng.uniform(-60, 60)),
                float(rng.uniform(-60, 60)),
                roll=float(rng.uniform(-0.12, 0.12)),
                pitch=float(rng.uniform(-0.12, 0.12)),
            )
            for i in range(n)
        ]
        atlas = Atlas(submaps=submaps)
        predicted = Pose2(float(rng.uniform(-60, 60)), float(rng.uniform(-60, 60)), 0.0)
        q_now = UnitQuat.from_rpy(
            float(rng.uniform(-0.12, 0.12)),
            float(rng.uniform(-0.12, 0.12)),
            float(rng.uniform(-math.pi, math.pi)),
        )
        require_tilt = bool(rng.integers(0, 2))
        roll, pitch, _ = q_now.to_rpy()
        bound = math.radians(atlas.theta_tilt)
        best_id, best_dist = None, math.inf
        for s in submaps:
            dist = predicted.planar_distance(s.anchor)
            if dist > atlas.r_submap:
                continue
            if require_tilt and not (
                abs(roll - s.attitude_signature[0]) < bound
                and abs(pitch - s.attitude_signature[1]) < bound
            ):
                continue
            if dist < best_dist:
                best_id, best_dist = s.submap_id, dist
        found = find_submap(atlas, predicted, q_now, require_tilt=require_tilt)
        if best_id is None:
            assert found is None
        else:
            assert found is not None
            assert found[0].submap_id == best_id
            expect = relative_tilt(q_now, found[0].signature_quat())
            assert found[1].angle == pytest.approx(expect.angle, abs=1e-12)


def test_lift_to_world_composes_tilt_then_pose():
    rng = np.random.default_rng(62)
    cloud = _cloud(seed=7)
    pose = Pose2(4.0, -3.0, 0.7)
    q_now = UnitQuat.from_rpy(0.1, -0.2, 1.9)  # yaw must be ignored
    lifted = lift_to_world(cloud, pose, q_now)
    tilted = tilt_lift(cloud, q_now)
    xy = pose.transform_xy(tilted.xyz[:, :2])
    np.testing.assert_allclose(lifted.xyz[:, :2], xy, atol=1e-12)
    np.testing.assert_allclose(lifted.xyz[:, 2], tilted.xyz[:, 2], atol=1e-12)


def test_update_atlas_creates_on_miss():
    atlas = Atlas()
    pose = Pose2(2.0, 1.0, 0.4)
    q = UnitQuat.from_rpy(0.02, -0.05, 0.4)
    update_atlas(atlas, _cloud(), pose, q, matched_id=None, t_ref=777)
    assert len(atlas) == 1
    s = atlas.submaps[0]
    assert s.submap_id == 0
    assert s.scan_count == 1
    assert s.anchor == pose
    assert s.attitude_signature == pytest.approx((0.02, -0.05), abs=1e-9)
    assert s.last_update_t == 777
    assert len(s.cloud) > 0


def test_update_atlas_merges_nearby_compatible_scan():
    atlas = Atlas()
    update_atlas(atlas, _cloud(seed=1), Pose2.identity(), _level(), None)
    sig_before = atlas.submaps[0].attitude_signature
    q_close = UnitQuat.from_rpy(math.radians(1.0), math.radians(-2.0), 0.1)
    update_atlas(atlas, _cloud(seed=2), Pose2(3.0, 0.0, 0.1), q_close, matched_id=0, t_ref=5)
    assert len(atlas) == 1
    s = atlas.submaps[0]
    assert s.scan_count == 2
    assert s.last_update_t == 5
    # Signature and anchor stay at their founding values.
    assert s.attitude_signature == sig_before
    assert s.anchor == Pose2.identity()


def test_update_atlas_new_submap_beyond_radius():
    atlas = Atlas()
    update_atlas(atlas, _cloud(seed=1), Pose2.identity(), _level(), None)
    update_atlas(atlas, _cloud(seed=2), Pose2(25.0, 0.0, 0.0), _level(), matched_id=0)
    assert len(atlas) == 2
    assert atlas.submaps[0].scan_count == 1
    assert atlas.submaps[1].submap_id == 1
    assert atlas.submaps[1].anchor.x == pytest.approx(25.0)


def test_update_atlas_new_submap_on_tilt_change():
    atlas = Atlas()
    update_atlas(atlas, _cloud(seed=1), Pose2.identity(), _level(), None)
    q_tilted = UnitQuat.from_rpy(0.0, math.radians(5.0), 0.0)
    update_atlas(atlas, _cloud(seed=2), Pose2(2.0, 0.0, 0.0), q_tilted, matched_id=0)
    assert len(atlas) == 2
    assert atlas.submaps[1].attitude_signature[1] == pytest.approx(math.radians(5.0))


def test_update_atlas_exactly_one_outcome():
    rng = np.random.default_rng(63)
    atlas = Atlas()
    matched = None
    for step in range(40):
        pose = Pose2(float(rng.uniform(-40, 40)), float(rng.uniform(-40, 40)), 0.0)
        q = UnitQuat.from_rpy(
            float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.1, 0.1)), 0.0
        )
        count_before = len(atlas)
        scans_before = {s.submap_id: s.scan_count for s in atlas.submaps}
        update_atlas(atlas, _cloud(seed=step), pose, q, matched)
        grew = len(atlas) == count_before + 1
        bumped = [
            s.submap_id
            for s in atlas.submaps
            if s.submap_id in scans_before and s.scan_count == scans_before[s.submap_id] + 1
        ]
        assert grew != (len(bumped) == 1)  # exactly one of the two outcomes
        ids = [s.submap_id for s in atlas.submaps]
        assert ids == sorted(ids) and len(set(ids)) == len(ids)
        found = find_submap(atlas, pose, q)
        matched = found[0].submap_id if found else None


def test_update_atlas_merge_never_grows_point_count():
    atlas = Atlas()
    a = _cloud(n=200, seed=8)
    update_atlas(atlas, a, Pose2.identity(), _level(), None)
    first = len(atlas.submaps[0].cloud)
    b = _cloud(n=300, seed=9)
    update_atlas(atlas, b, Pose2(1.0, 0.0, 0.0), _level(), matched_id=0)
    assert len(atlas.submaps[0].cloud) <= first + len(b)


def test_update_atlas_rejects_empty_cloud():
    with pytest.raises(ValueError):
        update_atlas(Atlas(), PointCloud.empty("deskewed", 0), Pose2.identity(), _level(), None)
