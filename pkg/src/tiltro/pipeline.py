"""Scan-by-scan odometry state machine.

Each radar rotation is turned into a pose update: extract the strongest
returns, deskew them with the IMU attitude, gate by relative tilt against
the matched submap, voxel-compact, and register against that submap with a
planar ICP seeded by a constant-velocity + IMU-yaw prediction.  Any failure
along the way degrades to a "miss": the pose falls back to the zero-velocity
prediction, the velocity resets, and the scan seeds a fresh submap.  The
pipeline never raises for a bad scan; every outcome is a diagnostics row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .attitude import AttitudeTrack
from .errors import TiltroError
from .frontend import PointCloud, PolarScan, deskew, k_strongest
from .geometry import Pose2, UnitQuat, wrap_angle
from .registration import IcpConfig, icp_point_to_point, voxel_downsample
from .submaps import Atlas, find_submap, tilt_lift, update_atlas
from .tilt_gate import TiltGateParams, tilt_filter

#: Velocity magnitudes at or above this are treated as divergence (m/s).
MAX_PLAUSIBLE_SPEED = 20.0


@dataclass(frozen=True)
class Params:
    """Frontend / gating / mapping parameter set (defaults are the field-
    tested values; all lengths in meters, theta_tilt in degrees)."""

    k: int = 10
    r_min: float = 5.0
    r_max: float = 100.0
    tau_raw: float = 60.0
    d_voxel: float = 1.0
    theta_tilt: float = 3.0
    gamma: float = 3.5
    r_submap: float = 20.0
    tau_tilt: float = 0.8
    k_nn: int = 4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 <= self.r_min < self.r_max:
            raise ValueError("need 0 <= r_min < r_max")
        if self.d_voxel <= 0.0:
            raise ValueError("d_voxel must be positive")
        if self.r_submap <= 0.0:
            raise ValueError("r_submap must be positive")
        if self.k_nn < 1:
            raise ValueError("k_nn must be at least 1")
        if not 0.0 < self.tau_tilt < 1.0:
            raise ValueError("tau_tilt must lie in (0, 1)")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.theta_tilt < 0.0:
            raise ValueError("theta_tilt must be non-negative")

    def gate_params(self) -> TiltGateParams:
        return TiltGateParams(self.gamma, self.tau_tilt, self.theta_tilt)


@dataclass(frozen=True)
class OdomState:
    """pose: planar world pose; velocity: world-frame (vx, vy) m/s;
    attitude: full 3D attitude at time t (ns)."""

    pose: Pose2
    velocity: tuple[float, float]
    yaw_rate: float
    attitude: UnitQuat
    t: int

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])


@dataclass
class ScanDiagnostics:
    """Per-scan processing record; written as one CSV row."""

    scan_index: int
    t: int
    hit: bool
    reason: str
    submap_id: int
    raw_points: int
    filtered_points: int
    downsampled_points: int
    tilt_deg: float
    icp_iterations: int
    icp_cost: float
    matched_fraction: float
    atlas_size: int

    CSV_HEADER = (
        "scan,t_ns,hit,reason,submap_id,raw_points,filtered_points,"
        "downsampled_points,tilt_deg,icp_iterations,icp_cost,"
        "matched_fraction,atlas_size"
    )

    def to_csv_row(self) -> str:
        return ",".join(
            [
                str(self.scan_index),
                str(self.t),
                "1" if self.hit else "0",
                self.reason,
                str(self.submap_id),
                str(self.raw_points),
                str(self.filtered_points),
                str(self.downsampled_points),
                repr(self.tilt_deg),
                str(self.icp_iterations),
                repr(self.icp_cost),
                repr(self.matched_fraction),
                str(self.atlas_size),
            ]
        )


def initial_state(track: AttitudeTrack, t_first: int) -> OdomState:
    """State at the origin just before the first scan is processed."""
    return OdomState(
        pose=Pose2.identity(),
        velocity=(0.0, 0.0),
        yaw_rate=0.0,
        attitude=track.attitude_at(t_first),
        t=t_first,
    )


def predict(state: OdomState, t_next: int, track: AttitudeTrack) -> Pose2:
    """Constant-velocity position advance; yaw advanced by the IMU's
    relative yaw between state.t and t_next."""
    dt = (t_next - state.t) * 1e-9
    if dt < 0.0:
        raise ValueError("prediction target precedes the current state")
    yaw_now = track.attitude_at(state.t).to_rpy()[2]
    yaw_next = track.attitude_at(t_next).to_rpy()[2]
    dyaw = wrap_angle(yaw_next - yaw_now)
    return Pose2(
        state.pose.x + state.velocity[0] * dt,
        state.pose.y + state.velocity[1] * dt,
        state.pose.yaw + dyaw,
    )


def process_scan(
    state: OdomState,
    scan: PolarScan,
    track: AttitudeTrack,
    atlas: Atlas,
    params: Params = Params(),
    icp_cfg: IcpConfig = IcpConfig(),
    *,
    tilt_gate_enabled: bool = True,
    tilt_search_enabled: bool = True,
    scan_index: int = 0,
) -> tuple[OdomState, Atlas, ScanDiagnostics]:
    """Advance the odometry by one scan.

    Returns the new state, the (mutated) atlas, and a diagnostics record.
    The published timestamp is the scan's earliest azimuth timestamp.  A
    new state is produced for every scan; component errors select the miss
    path instead of propagating.
    """
    t_scan = scan.t_start
    diag = ScanDiagnostics(
        scan_index=scan_index,
        t=t_scan,
        hit=False,
        reason="",
        submap_id=-1,
        raw_points=0,
        filtered_points=0,
        downsampled_points=0,
        tilt_deg=0.0,
        icp_iterations=0,
        icp_cost=math.nan,
        matched_fraction=0.0,
        atlas_size=len(atlas),
    )

    dt = (t_scan - state.t) * 1e-9
    try:
        prior = predict(state, t_scan, track) if dt > 0.0 else state.pose
        q_now = track.attitude_at(t_scan)
    except (TiltroError, ValueError) as err:
        # Without attitude there is nothing to correct; hold the pose.
        new_state = replace(
            state, velocity=(0.0, 0.0), yaw_rate=0.0, t=t_scan
        )
        diag.reason = f"attitude-unavailable: {err}"
        return new_state, atlas, diag

    match = find_submap(atlas, prior, q_now, require_tilt=tilt_search_enabled)
    if match is not None:
        diag.submap_id = match[0].submap_id
        diag.tilt_deg = match[1].angle_deg

    raw = k_strongest(scan, params.k, params.r_min, params.r_max, params.tau_raw)
    diag.raw_points = len(raw)
    deskewed: PointCloud | None = None
    pose: Pose2 | None = None
    velocity = (0.0, 0.0)
    yaw_rate = 0.0
    hit = False

    if len(raw) == 0:
        diag.reason = "empty-scan"
    else:
        deskewed = deskew(raw, track)
        gated = deskewed
        if match is not None and tilt_gate_enabled:
            try:
                gated = tilt_filter(deskewed, match[1], params.gate_params())
            except TiltroError:
                # Gate removed everything: fall back to the ungated cloud.
                gated = replace(deskewed, stage="filtered")
                diag.reason = "gate-rejected-all;"
        else:
            gated = replace(deskewed, stage="filtered")
        diag.filtered_points = len(gated)
        compact = voxel_downsample(gated, params.d_voxel)
        diag.downsampled_points = len(compact)

        if match is None:
            diag.reason += "no-submap"
        elif dt <= 0.0:
            diag.reason += "no-time-baseline"
        else:
            submap, _tilt = match
            try:
                result = icp_point_to_point(
                    tilt_lift(compact, q_now),
                    submap.cloud,
                    prior,
                    replace(icp_cfg, k_nn=params.k_nn),
                    index=submap.nn_index(),
                )
                diag.icp_iterations = result.iterations
                diag.icp_cost = result.final_cost
                diag.matched_fraction = result.matched_fraction
                candidate = result.delta.compose(prior)
                vx = (candidate.x - state.pose.x) / dt
                vy = (candidate.y - state.pose.y) / dt
                if math.hypot(vx, vy) >= MAX_PLAUSIBLE_SPEED:
                    diag.reason += "divergence"
                else:
                    pose = candidate
                    velocity = (vx, vy)
                    yaw_rate = wrap_angle(candidate.yaw - state.pose.yaw) / dt
                    hit = True
            except TiltroError as err:
                diag.reason += f"icp: {err}"

    if pose is None:
        # Miss: publish the constant-velocity prior for this scan; the
        # zeroed velocity makes the next prediction conservative.
        pose = prior

    new_state = OdomState(
        pose=pose,
        velocity=velocity,
        yaw_rate=yaw_rate,
        attitude=q_now,
        t=t_scan,
    )
    diag.hit = hit

    if deskewed is not None and len(deskewed) > 0:
        matched_id = match[0].submap_id if (hit and match is not None) else None
        update_atlas(atlas, deskewed, pose, q_now, matched_id, t_ref=t_scan)
    diag.atlas_size = len(atlas)
    return new_state, atlas, diag


def run_odometry(
    scans,
    track: AttitudeTrack,
    params: Params = Params(),
    icp_cfg: IcpConfig = IcpConfig(),
    *,
    tilt_gate_enabled: bool = True,
    tilt_search_enabled: bool = True,
) -> tuple[list[OdomState], list[ScanDiagnostics]]:
    """Process a scan sequence from a cold start at the origin.

    Returns one state and one diagnostics record per scan, in order.
    """
    states: list[OdomState] = []
    diags: list[ScanDiagnostics] = []
    atlas = Atlas(
        r_submap=params.r_submap,
        theta_tilt=params.theta_tilt,
        d_voxel=params.d_voxel,
    )
    state: OdomState | None = None
    for i, scan in enumerate(scans):
        if state is None:
            state = initial_state(track, scan.t_start)
        state, atlas, diag = process_scan(
            state,
            scan,
            track,
            atlas,
            params,
            icp_cfg,
            tilt_gate_enabled=tilt_gate_enabled,
            tilt_search_enabled=tilt_search_enabled,
            scan_index=i,
        )
        states.append(state)
        diags.append(diag)
    return states, diags
