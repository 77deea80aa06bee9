"""Tilt-robust radar-inertial odometry.

A planar scan-matching pipeline for a spinning radar on rough ground: an
IMU-driven attitude filter supplies roll/pitch, scans are deskewed and
filtered against the tilt difference to the local submap, and an SE(2)
point-to-point ICP anchors the pose in a tilt-indexed submap atlas.
"""

from .attitude import (
    AttitudeTrack,
    GRAVITY,
    ImuBias,
    ImuSample,
    estimate_bias,
    madgwick_step,
    run_filter,
    warm_start_attitude,
)
from .errors import (
    AllPointsRejected,
    BadMagic,
    ConfigError,
    EmptyReference,
    EmptyScan,
    ExtrapolationTooFar,
    FormatError,
    InsufficientData,
    InvalidScenario,
    MalformedRow,
    NoCorrespondences,
    NonMonotonicTimestamp,
    NotStatic,
    TiltroError,
    TrajectoryTooShort,
    TruncatedFile,
    UnsupportedVersion,
)
from .evaluation import (
    RteReport,
    Trajectory,
    endpoint_error,
    relative_translation_error,
)
from .frontend import PointCloud, PolarScan, RadarPoint, deskew, k_strongest
from .geometry import Pose2, RelativeTilt, UnitQuat, relative_tilt, slerp, wrap_angle
from .io import (
    Dataset,
    RunConfig,
    format_run_config,
    load_dataset,
    parse_run_config,
    read_imu_csv,
    read_polar_scan,
    read_run_config,
    read_rte_csv,
    read_trajectory_csv,
    write_dataset,
    write_imu_csv,
    write_polar_scan,
    write_rte_csv,
    write_trajectory_csv,
)
from .pipeline import (
    OdomState,
    Params,
    ScanDiagnostics,
    initial_state,
    predict,
    process_scan,
    run_odometry,
)
from .registration import (
    IcpConfig,
    IcpResult,
    build_nn_index,
    build_voxel_index,
    icp_point_to_point,
    voxel_downsample,
)
from .sim import (
    GroundTruth,
    ImuModel,
    PathSegment,
    Pole,
    RadarModel,
    Scenario,
    SimResult,
    Wall,
    generate_ground_truth,
    quarry_course,
    rectangle_loop,
    render_scan,
    simulate,
    synthesize_imu,
    tilt_step_course,
)
from .submaps import Atlas, Submap, find_submap, tilt_lift, update_atlas
from .tilt_gate import TiltGateParams, cauchy_weight, tilt_filter, vertical_displacement

__version__ = "0.1.0"

__all__ = [
    "AllPointsRejected",
    "Atlas",
    "AttitudeTrack",
    "BadMagic",
    "ConfigError",
    "Dataset",
    "EmptyReference",
    "EmptyScan",
    "ExtrapolationTooFar",
    "FormatError",
    "GRAVITY",
    "GroundTruth",
    "IcpConfig",
    "IcpResult",
    "ImuBias",
    "ImuModel",
    "ImuSample",
    "InsufficientData",
    "InvalidScenario",
    "MalformedRow",
    "NoCorrespondences",
    "NonMonotonicTimestamp",
    "NotStatic",
    "OdomState",
    "Params",
    "PathSegment",
    "PointCloud",
    "PolarScan",
    "Pole",
    "Pose2",
    "RadarModel",
    "RadarPoint",
    "RelativeTilt",
    "RteReport",
    "RunConfig",
    "ScanDiagnostics",
    "Scenario",
    "SimResult",
    "Submap",
    "TiltGateParams",
    "TiltroError",
    "Trajectory",
    "TrajectoryTooShort",
    "TruncatedFile",
    "UnitQuat",
    "UnsupportedVersion",
    "Wall",
    "build_nn_index",
    "build_voxel_index",
    "cauchy_weight",
    "deskew",
    "endpoint_error",
    "estimate_bias",
    "find_submap",
    "format_run_config",
    "generate_ground_truth",
    "initial_state",
    "k_strongest",
    "load_dataset",
    "madgwick_step",
    "parse_run_config",
    "predict",
    "process_scan",
    "quarry_course",
    "read_imu_csv",
    "read_polar_scan",
    "read_run_config",
    "read_rte_csv",
    "read_trajectory_csv",
    "rectangle_loop",
    "relative_tilt",
    "relative_translation_error",
    "render_scan",
    "run_filter",
    "run_odometry",
    "simulate",
    "slerp",
    "synthesize_imu",
    "tilt_filter",
    "tilt_lift",
    "tilt_step_course",
    "update_atlas",
    "vertical_displacement",
    "voxel_downsample",
    "warm_start_attitude",
    "wrap_angle",
    "write_dataset",
    "write_imu_csv",
    "write_polar_scan",
    "write_rte_csv",
    "write_trajectory_csv",
]
