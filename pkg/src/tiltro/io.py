"""File formats: binary polar scans, CSV streams, run configuration.

Everything written here reads back losslessly: the scan container is a
fixed little-endian layout that round-trips byte-identically, and CSV
floats use the shortest representation that reparses to the same double.
Parsers fail loudly with positions (byte offsets or line numbers) instead
of guessing.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .attitude import ImuSample
from .errors import (
    BadMagic,
    ConfigError,
    FormatError,
    MalformedRow,
    NonMonotonicTimestamp,
    TruncatedFile,
    UnsupportedVersion,
)
from .evaluation import RteReport, Trajectory
from .frontend import PolarScan
from .geometry import quat_array_to_rpy
from .pipeline import Params
from .registration import IcpConfig

_SCAN_MAGIC = b"FRAD"
_SCAN_VERSION = 1
_SCAN_HEADER = struct.Struct("<4sHIId")

IMU_CSV_HEADER = "t_ns,wx,wy,wz,ax,ay,az"
GROUND_TRUTH_CSV_HEADER = "t_ns,x,y,z,qw,qx,qy,qz"
TRAJECTORY_CSV_HEADER = "t_ns,x,y,yaw,roll,pitch"
RTE_CSV_HEADER = "start_t_ns,length_m,err_pct"


def _record_dtype(range_bins: int) -> np.dtype:
    return np.dtype(
        [("t", "<i8"), ("az", "<f8"), ("intensity", "u1", (range_bins,))]
    )


def write_polar_scan(scan: PolarScan, path) -> None:
    n_a = scan.azimuth_count
    n_r = scan.range_bin_count
    rec = np.empty(n_a, dtype=_record_dtype(n_r))
    rec["t"] = scan.azimuth_timestamps
    rec["az"] = scan.azimuths
    rec["intensity"] = scan.intensity
    header = _SCAN_HEADER.pack(
        _SCAN_MAGIC, _SCAN_VERSION, n_a, n_r, scan.range_resolution
    )
    Path(path).write_bytes(header + rec.tobytes())


def read_polar_scan(path) -> PolarScan:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _SCAN_HEADER.size:
        raise TruncatedFile(
            f"{path}: file ends at byte {len(data)}; the header alone "
            f"needs {_SCAN_HEADER.size} bytes"
        )
    magic, version, n_a, n_r, dr = _SCAN_HEADER.unpack_from(data, 0)
    if magic != _SCAN_MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r} at byte 0")
    if version != _SCAN_VERSION:
        raise UnsupportedVersion(
            f"{path}: unsupported format version {version} at byte 4"
        )
    rec_dtype = _record_dtype(n_r)
    expected = _SCAN_HEADER.size + n_a * rec_dtype.itemsize
    if len(data) < expected:
        raise TruncatedFile(
            f"{path}: file ends at byte {len(data)} but {n_a} records of "
            f"{rec_dtype.itemsize} bytes need {expected} bytes"
        )
    if len(data) > expected:
        raise FormatError(
            f"{path}: {len(data) - expected} trailing bytes at byte {expected}"
        )
    rec = np.frombuffer(data, dtype=rec_dtype, count=n_a, offset=_SCAN_HEADER.size)
    return PolarScan(
        rec["az"].copy(), rec["t"].copy(), rec["intensity"].copy(), dr
    )


# ---------------------------------------------------------------------------
# CSV streams.  All floats are written with repr() so reading them back
# reproduces the exact double; timestamps are plain integers.


def _read_rows(path, header: str):
    """Yield (line_number, fields) for every data row; validates the header."""
    path = Path(path)
    n_cols = header.count(",") + 1
    with path.open("r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if first.rstrip("\r\n") != header:
            raise MalformedRow(
                f"{path}: line 1: expected header {header!r}"
            )
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise MalformedRow(
                    f"{path}: line {lineno}: expected {n_cols} fields, "
                    f"got {len(parts)}"
                )
            yield lineno, parts


def _parse_int(path, lineno: int, text: str) -> int:
    try:
        return int(text)
    except ValueError as err:
        raise MalformedRow(
            f"{path}: line {lineno}: {text!r} is not an integer"
        ) from err


def _parse_float(path, lineno: int, text: str) -> float:
    try:
        return float(text)
    except ValueError as err:
        raise MalformedRow(
            f"{path}: line {lineno}: {text!r} is not a number"
        ) from err


class _MonotonicCheck:
    """Tracks the previous timestamp; rejects any non-increase."""

    def __init__(self, path):
        self.path = path
        self.prev: int | None = None

    def feed(self, lineno: int, t: int) -> None:
        if self.prev is not None and t <= self.prev:
            raise NonMonotonicTimestamp(
                f"{self.path}: line {lineno}: timestamp {t} does not "
                f"increase past {self.prev}"
            )
        self.prev = t


def write_imu_csv(path, samples) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(IMU_CSV_HEADER + "\n")
        for s in samples:
            # float() strips the numpy scalar type so repr() emits a plain
            # shortest-round-trip literal
            wx, wy, wz = (float(v) for v in s.omega)
            ax, ay, az = (float(v) for v in s.accel)
            fh.write(
                f"{s.t},{wx!r},{wy!r},{wz!r},{ax!r},{ay!r},{az!r}\n"
            )


def read_imu_csv(path) -> list[ImuSample]:
    mono = _MonotonicCheck(path)
    out = []
    for lineno, parts in _read_rows(path, IMU_CSV_HEADER):
        t = _parse_int(path, lineno, parts[0])
        mono.feed(lineno, t)
        vals = [_parse_float(path, lineno, p) for p in parts[1:]]
        out.append(ImuSample(t, np.array(vals[0:3]), np.array(vals[3:6])))
    return out


def write_ground_truth_csv(path, t, pos, quats) -> None:
    t = np.asarray(t, dtype=np.int64)
    pos = np.asarray(pos, dtype=float)
    quats = np.asarray(quats, dtype=float)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(GROUND_TRUTH_CSV_HEADER + "\n")
        for i in range(t.shape[0]):
            x, y, z = (float(v) for v in pos[i])
            qw, qx, qy, qz = (float(v) for v in quats[i])
            fh.write(
                f"{t[i]},{x!r},{y!r},{z!r},{qw!r},{qx!r},{qy!r},{qz!r}\n"
            )


def read_ground_truth_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (t, pos (N, 3), quats (N, 4))."""
    mono = _MonotonicCheck(path)
    ts, rows = [], []
    for lineno, parts in _read_rows(path, GROUND_TRUTH_CSV_HEADER):
        t = _parse_int(path, lineno, parts[0])
        mono.feed(lineno, t)
        ts.append(t)
        rows.append([_parse_float(path, lineno, p) for p in parts[1:]])
    arr = np.array(rows, dtype=float).reshape(len(ts), 7)
    return (
        np.array(ts, dtype=np.int64),
        arr[:, 0:3].copy(),
        arr[:, 3:7].copy(),
    )


def ground_truth_trajectory(path) -> Trajectory:
    """Planar trajectory view of a ground-truth file (yaw from quaternions)."""
    t, pos, quats = read_ground_truth_csv(path)
    _, _, yaw = quat_array_to_rpy(quats)
    return Trajectory(t, pos[:, 0], pos[:, 1], yaw)


def write_trajectory_csv(path, t, x, y, yaw, roll, pitch) -> None:
    t = np.asarray(t, dtype=np.int64)
    cols = [np.asarray(c, dtype=float) for c in (x, y, yaw, roll, pitch)]
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRAJECTORY_CSV_HEADER + "\n")
        for i in range(t.shape[0]):
            vals = ",".join(repr(float(c[i])) for c in cols)
            fh.write(f"{t[i]},{vals}\n")


def read_trajectory_csv(path):
    """Returns (t, x, y, yaw, roll, pitch) arrays; empty arrays for a
    header-only file."""
    mono = _MonotonicCheck(path)
    ts, rows = [], []
    for lineno, parts in _read_rows(path, TRAJECTORY_CSV_HEADER):
        t = _parse_int(path, lineno, parts[0])
        mono.feed(lineno, t)
        ts.append(t)
        rows.append([_parse_float(path, lineno, p) for p in parts[1:]])
    arr = np.array(rows, dtype=float).reshape(len(ts), 5)
    t = np.array(ts, dtype=np.int64)
    return (t, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4])


def states_to_arrays(states):
    """Column arrays (t, x, y, yaw, roll, pitch) from an OdomState sequence."""
    t = np.array([s.t for s in states], dtype=np.int64)
    x = np.array([s.pose.x for s in states])
    y = np.array([s.pose.y for s in states])
    yaw = np.array([s.pose.yaw for s in states])
    rp = np.array(
        [s.attitude.to_rpy()[:2] for s in states], dtype=float
    ).reshape(len(states), 2)
    return t, x, y, yaw, rp[:, 0], rp[:, 1]


def write_diagnostics_csv(path, diags) -> None:
    from .pipeline import ScanDiagnostics

    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(ScanDiagnostics.CSV_HEADER + "\n")
        for d in diags:
            fh.write(d.to_csv_row() + "\n")


def write_rte_csv(path, report: RteReport) -> None:
    """One row per segment plus a final `summary` row carrying the segment
    count and the median percentage."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(RTE_CSV_HEADER + "\n")
        for i in range(report.count):
            fh.write(
                f"{int(report.start_t[i])},{float(report.seg_lengths[i])!r},"
                f"{float(report.errors_pct[i])!r}\n"
            )
        fh.write(f"summary,{report.count},{report.median!r}\n")


def read_rte_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Returns (start_t, lengths, errors_pct, median)."""
    path = Path(path)
    starts, lengths, errs = [], [], []
    median = None
    for lineno, parts in _read_rows(path, RTE_CSV_HEADER):
        if parts[0] == "summary":
            count = _parse_int(path, lineno, parts[1])
            if count != len(errs):
                raise MalformedRow(
                    f"{path}: line {lineno}: summary counts {count} segments, "
                    f"file holds {len(errs)}"
                )
            median = _parse_float(path, lineno, parts[2])
            continue
        if median is not None:
            raise MalformedRow(
                f"{path}: line {lineno}: data row after the summary row"
            )
        starts.append(_parse_int(path, lineno, parts[0]))
        lengths.append(_parse_float(path, lineno, parts[1]))
        errs.append(_parse_float(path, lineno, parts[2]))
    if median is None:
        raise MalformedRow(f"{path}: missing summary row")
    return (
        np.array(starts, dtype=np.int64),
        np.array(lengths),
        np.array(errs),
        median,
    )


# ---------------------------------------------------------------------------
# Run configuration: a flat key = value text file covering the pipeline,
# ICP, and attitude-filter parameters.  Unknown and repeated keys are
# rejected so typos never silently fall back to defaults.


@dataclass(frozen=True)
class RunConfig:
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
    max_iterations: int = 40
    translation_epsilon: float = 1e-3
    rotation_epsilon: float = 1e-4
    max_correspondence_distance: float = 5.0
    use_point_weights: bool = True
    beta: float = 0.1
    static_window_s: float = 10.0

    def params(self) -> Params:
        return Params(
            k=self.k,
            r_min=self.r_min,
            r_max=self.r_max,
            tau_raw=self.tau_raw,
            d_voxel=self.d_voxel,
            theta_tilt=self.theta_tilt,
            gamma=self.gamma,
            r_submap=self.r_submap,
            tau_tilt=self.tau_tilt,
            k_nn=self.k_nn,
        )

    def icp_config(self) -> IcpConfig:
        return IcpConfig(
            k_nn=self.k_nn,
            max_iterations=self.max_iterations,
            translation_epsilon=self.translation_epsilon,
            rotation_epsilon=self.rotation_epsilon,
            max_correspondence_distance=self.max_correspondence_distance,
            use_point_weights=self.use_point_weights,
        )


_CONFIG_FIELDS = {f.name: f.type for f in fields(RunConfig)}


def _parse_config_value(key: str, text: str, where: str):
    ftype = _CONFIG_FIELDS[key]
    if ftype == "bool":
        low = text.lower()
        if low in ("true", "false"):
            return low == "true"
        raise ConfigError(f"{where}: {key} must be true or false, got {text!r}")
    try:
        if ftype == "int":
            return int(text)
        return float(text)
    except ValueError as err:
        raise ConfigError(f"{where}: cannot parse {key} value {text!r}") from err


def parse_run_config(text: str, source: str = "config") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"{source}: line {lineno}"
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{where}: expected `key = value`")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _parse_config_value(key, value, where)
    cfg = RunConfig(**values)
    try:
        cfg.params()
        cfg.icp_config()
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from err
    if cfg.beta < 0.0:
        raise ConfigError(f"{source}: beta must be non-negative")
    if cfg.static_window_s <= 0.0:
        raise ConfigError(f"{source}: static_window_s must be positive")
    return cfg


def read_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(path.read_text(encoding="utf-8"), str(path))


def format_run_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            text = "true" if v else "false"
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Dataset directory layout.


@dataclass
class Dataset:
    """In-memory dataset: scans in index order plus the IMU stream."""

    path: Path
    scans: list[PolarScan]
    imu: list[ImuSample]
    ground_truth_path: Path | None
    scenario_text: str | None


def write_dataset(
    out_dir, scans, imu, gt_t, gt_pos, gt_quats, scenario_text: str | None = None
) -> Path:
    """Lay out a dataset directory; replaces any previously written scans."""
    out_dir = Path(out_dir)
    scans_dir = out_dir / "scans"
    scans_dir.mkdir(parents=True, exist_ok=True)
    for stale in scans_dir.glob("*.frad"):
        stale.unlink()
    for i, scan in enumerate(scans):
        write_polar_scan(scan, scans_dir / f"{i:06d}.frad")
    write_imu_csv(out_dir / "imu.csv", imu)
    write_ground_truth_csv(out_dir / "ground_truth.csv", gt_t, gt_pos, gt_quats)
    if scenario_text is not None:
        (out_dir / "scenario.echo").write_text(scenario_text, encoding="utf-8")
    return out_dir


def load_dataset(path) -> Dataset:
    """Read a dataset directory back, validating the layout.

    Scan files must be contiguous from 000000 and every azimuth timestamp
    must fall inside the IMU stream's span (the attitude filter cannot
    cover scans it has no inertial data for).
    """
    path = Path(path)
    scans_dir = path / "scans"
    if not scans_dir.is_dir():
        raise FormatError(f"{path}: missing scans/ directory")
    imu_path = path / "imu.csv"
    if not imu_path.is_file():
        raise FormatError(f"{path}: missing imu.csv")
    scan_files = sorted(scans_dir.glob("*.frad"))
    if not scan_files:
        raise FormatError(f"{path}: no scan files in scans/")
    for i, f in enumerate(scan_files):
        if f.name != f"{i:06d}.frad":
            raise FormatError(
                f"{path}: scan files are not contiguous from 000000.frad "
                f"(found {f.name} at position {i})"
            )
    imu = read_imu_csv(imu_path)
    if not imu:
        raise FormatError(f"{imu_path}: IMU stream is empty")
    t_lo, t_hi = imu[0].t, imu[-1].t
    scans = []
    for f in scan_files:
        scan = read_polar_scan(f)
        if scan.azimuth_timestamps[0] < t_lo or scan.azimuth_timestamps[-1] > t_hi:
            raise FormatError(
                f"{f.name}: scan timestamps leave the IMU span "
                f"[{t_lo}, {t_hi}]"
            )
        scans.append(scan)
    gt_path = path / "ground_truth.csv"
    echo_path = path / "scenario.echo"
    return Dataset(
        path=path,
        scans=scans,
        imu=imu,
        ground_truth_path=gt_path if gt_path.is_file() else None,
        scenario_text=(
            echo_path.read_text(encoding="utf-8") if echo_path.is_file() else None
        ),
    )
