"""Tests for file formats: binary scans, CSV streams, config, datasets."""

import math
import struct

import numpy as np
import pytest

from tiltro.attitude import ImuSample
from tiltro.errors import (
    BadMagic,
    ConfigError,
    FormatError,
    MalformedRow,
    NonMonotonicTimestamp,
    TruncatedFile,
    UnsupportedVersion,
)
from tiltro.evaluation import RteReport
from tiltro.frontend import PolarScan
from tiltro.io import (
    GROUND_TRUTH_CSV_HEADER,
    IMU_CSV_HEADER,
    RunConfig,
    format_run_config,
    ground_truth_trajectory,
    load_dataset,
    parse_run_config,
    read_ground_truth_csv,
    read_imu_csv,
    read_polar_scan,
    read_rte_csv,
    read_trajectory_csv,
    write_dataset,
    write_ground_truth_csv,
    write_imu_csv,
    write_polar_scan,
    write_rte_csv,
    write_trajectory_csv,
)


def _scan(seed=0, n_az=5, n_bins=8, t0=1_000_000_000):
    rng = np.random.default_rng(seed)
    az = np.arange(n_az) * (2.0 * math.pi / n_az)
    t = t0 + np.arange(n_az, dtype=np.int64) * 625_000
    grid = rng.integers(0, 256, size=(n_az, n_bins), dtype=np.uint8)
    return PolarScan(az, t, grid, 0.1)


def _imu(n=5, t0=999_000_000):
    out = []
    for i in range(n):
        out.append(
            ImuSample(
                t0 + i * 5_000_000,
                np.array([0.1, -1.0 / 3.0, 2.5e-17]) * (i + 1),
                np.array([0.05, 9.81, -7.25]) + i,
            )
        )
    return out


def test_scan_round_trip_is_byte_identical(tmp_path):
    scan = _scan()
    p1 = tmp_path / "a.frad"
    p2 = tmp_path / "b.frad"
    write_polar_scan(scan, p1)
    back = read_polar_scan(p1)
    np.testing.assert_array_equal(back.azimuths, scan.azimuths)
    np.testing.assert_array_equal(back.azimuth_timestamps, scan.azimuth_timestamps)
    np.testing.assert_array_equal(back.intensity, scan.intensity)
    assert back.range_resolution == scan.range_resolution
    write_polar_scan(back, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_scan_header_layout(tmp_path):
    scan = _scan(n_az=3, n_bins=4)
    p = tmp_path / "s.frad"
    write_polar_scan(scan, p)
    data = p.read_bytes()
    magic, version, n_a, n_r, dr = struct.unpack_from("<4sHIId", data, 0)
    assert magic == b"FRAD"
    assert version == 1
    assert (n_a, n_r) == (3, 4)
    assert dr == 0.1
    # Header then n_a fixed-size records: 8 (t) + 8 (az) + n_r intensity bytes.
    assert len(data) == struct.calcsize("<4sHIId") + 3 * (8 + 8 + 4)


def test_scan_bad_magic(tmp_path):
    p = tmp_path / "s.frad"
    write_polar_scan(_scan(), p)
    data = bytearray(p.read_bytes())
    data[0:4] = b"XRAD"
    p.write_bytes(bytes(data))
    with pytest.raises(BadMagic, match="byte 0"):
        read_polar_scan(p)


def test_scan_unsupported_version(tmp_path):
    p = tmp_path / "s.frad"
    write_polar_scan(_scan(), p)
    data = bytearray(p.read_bytes())
    struct.pack_into("<H", data, 4, 2)
    p.write_bytes(bytes(data))
    with pytest.raises(UnsupportedVersion, match="version 2"):
        read_polar_scan(p)


def test_scan_truncations_report_offsets(tmp_path):
    p = tmp_path / "s.frad"
    write_polar_scan(_scan(), p)
    whole = p.read_bytes()
    p.write_bytes(whole[:-1])
    with pytest.raises(TruncatedFile, match=f"byte {len(whole) - 1}"):
        read_polar_scan(p)
    p.write_bytes(whole[:10])  # inside the header
    with pytest.raises(TruncatedFile, match="header"):
        read_polar_scan(p)


def test_scan_trailing_bytes_rejected(tmp_path):
    p = tmp_path / "s.frad"
    write_polar_scan(_scan(), p)
    p.write_bytes(p.read_bytes() + b"\x00\x00\x00")
    with pytest.raises(FormatError, match="3 trailing bytes"):
        read_polar_scan(p)


def test_imu_csv_round_trip_exact(tmp_path):
    samples = _imu()
    p = tmp_path / "imu.csv"
    write_imu_csv(p, samples)
    assert p.read_text().splitlines()[0] == IMU_CSV_HEADER
    back = read_imu_csv(p)
    assert len(back) == len(samples)
    for a, b in zip(samples, back):
        assert a.t == b.t
        # repr round trip: equality must be exact, not approximate
        assert tuple(a.omega) == tuple(b.omega)
        assert tuple(a.accel) == tuple(b.accel)


def test_ground_truth_csv_round_trip_exact(tmp_path):
    t = np.array([10, 20, 35], dtype=np.int64)
    pos = np.array([[0.1, -2.0 / 7.0, 0.5], [1e-12, 3.0, 0.5], [4.0, 5.0, 0.5]])
    quats = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
    quats[1] = [math.cos(0.2), 0.0, 0.0, math.sin(0.2)]
    p = tmp_path / "gt.csv"
    write_ground_truth_csv(p, t, pos, quats)
    t2, pos2, quats2 = read_ground_truth_csv(p)
    np.testing.assert_array_equal(t2, t)
    assert pos2.tolist() == pos.tolist()
    assert quats2.tolist() == quats.tolist()
    traj = ground_truth_trajectory(p)
    assert traj.yaw[1] == pytest.approx(0.4, abs=1e-12)
    assert traj.yaw[0] == 0.0


def test_trajectory_csv_round_trip_and_empty(tmp_path):
    p = tmp_path / "traj.csv"
    t = np.array([1, 2], dtype=np.int64)
    write_trajectory_csv(p, t, [0.1, 0.2], [1.0 / 3.0, -4.0], [0.0, 0.1],
                         [0.01, 0.02], [-0.03, 0.04])
    t2, x, y, yaw, roll, pitch = read_trajectory_csv(p)
    np.testing.assert_array_equal(t2, t)
    assert x.tolist() == [0.1, 0.2]
    assert y[0] == 1.0 / 3.0
    assert pitch.tolist() == [-0.03, 0.04]

    empty = tmp_path / "empty.csv"
    write_trajectory_csv(empty, np.array([], dtype=np.int64), [], [], [], [], [])
    cols = read_trajectory_csv(empty)
    assert all(len(c) == 0 for c in cols)


def test_csv_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "imu.csv"
    p.write_text("wrong,header\n")
    with pytest.raises(MalformedRow, match="line 1"):
        read_imu_csv(p)
    p.write_text(IMU_CSV_HEADER + "\n1,0,0,0,0,0,9.81\n2,0,0\n")
    with pytest.raises(MalformedRow, match="line 3"):
        read_imu_csv(p)
    p.write_text(IMU_CSV_HEADER + "\n1,0,0,zero,0,0,9.81\n")
    with pytest.raises(MalformedRow, match="line 2.*not a number"):
        read_imu_csv(p)
    p.write_text(IMU_CSV_HEADER + "\n1.5,0,0,0,0,0,9.81\n")
    with pytest.raises(MalformedRow, match="not an integer"):
        read_imu_csv(p)


def test_non_monotonic_timestamps_rejected(tmp_path):
    p = tmp_path / "imu.csv"
    p.write_text(IMU_CSV_HEADER + "\n5,0,0,0,0,0,9.81\n5,0,0,0,0,0,9.81\n")
    with pytest.raises(NonMonotonicTimestamp, match="line 3"):
        read_imu_csv(p)


def _report():
    return RteReport(
        segment_length=10.0,
        start_t=np.array([100, 200, 300], dtype=np.int64),
        seg_lengths=np.array([10.0, 10.2, 10.1]),
        errors_pct=np.array([0.5, 1.0 / 3.0, 0.75]),
        rot_errors_deg_per_100m=np.array([0.0, 0.0, 0.0]),
    )


def test_rte_csv_round_trip(tmp_path):
    p = tmp_path / "rte.csv"
    rep = _report()
    write_rte_csv(p, rep)
    starts, lengths, errs, median = read_rte_csv(p)
    np.testing.assert_array_equal(starts, rep.start_t)
    assert lengths.tolist() == rep.seg_lengths.tolist()
    assert errs.tolist() == rep.errors_pct.tolist()
    assert median == rep.median


def test_rte_csv_summary_validation(tmp_path):
    p = tmp_path / "rte.csv"
    write_rte_csv(p, _report())
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")  # drop the summary
    with pytest.raises(MalformedRow, match="summary"):
        read_rte_csv(p)
    shuffled = lines[:3] + ["summary,2,0.5", lines[3]]
    p.write_text("\n".join(shuffled) + "\n")
    with pytest.raises(MalformedRow, match="after the summary"):
        read_rte_csv(p)
    bad = lines[:-1] + ["summary,7," + lines[-1].split(",")[2]]
    p.write_text("\n".join(bad) + "\n")
    with pytest.raises(MalformedRow, match="7 segments"):
        read_rte_csv(p)


def test_run_config_defaults_and_round_trip():
    assert parse_run_config("") == RunConfig()
    cfg = RunConfig(k=6, gamma=2.0, use_point_weights=False, beta=0.05)
    assert parse_run_config(format_run_config(cfg)) == cfg
    text = "# comment\n\n k = 12 \ntau_tilt = 0.5\n"
    got = parse_run_config(text)
    assert got.k == 12
    assert got.tau_tilt == 0.5
    assert got.r_max == 100.0


def test_run_config_feeds_parameter_objects():
    cfg = parse_run_config("k_nn = 2\nmax_iterations = 7\ngamma = 1.5\n")
    assert cfg.params().gamma == 1.5
    assert cfg.params().k_nn == 2
    assert cfg.icp_config().k_nn == 2
    assert cfg.icp_config().max_iterations == 7


def test_run_config_rejects_bad_input():
    for text, frag in [
        ("bogus = 1", "unknown key"),
        ("k = 5\nk = 6", "duplicate"),
        ("use_point_weights = yes", "true or false"),
        ("k = five", "cannot parse"),
        ("k 5", "key = value"),
        ("gamma = -1.0", "gamma"),
        ("beta = -0.1", "beta"),
        ("static_window_s = 0", "static_window_s"),
    ]:
        with pytest.raises(ConfigError, match=frag):
            parse_run_config(text)


def test_dataset_round_trip(tmp_path):
    scans = [_scan(seed=i, t0=1_000_000_000 + i * 250_000_000) for i in range(3)]
    imu = _imu(n=200)
    gt_t = np.array([999_000_000, 2_000_000_000], dtype=np.int64)
    gt_pos = np.zeros((2, 3))
    gt_quats = np.tile([1.0, 0.0, 0.0, 0.0], (2, 1))
    root = write_dataset(tmp_path / "ds", scans, imu, gt_t, gt_pos, gt_quats,
                         scenario_text='{"seed": 1}')
    ds = load_dataset(root)
    assert len(ds.scans) == 3
    np.testing.assert_array_equal(ds.scans[1].intensity, scans[1].intensity)
    assert len(ds.imu) == 200
    assert ds.ground_truth_path is not None
    assert ds.scenario_text == '{"seed": 1}'
    # Rewriting with fewer scans must clear the stale files.
    write_dataset(root, scans[:2], imu, gt_t, gt_pos, gt_quats)
    assert len(load_dataset(root).scans) == 2


def test_dataset_layout_validation(tmp_path):
    with pytest.raises(FormatError, match="missing scans"):
        load_dataset(tmp_path)
    scans = [_scan(t0=1_000_000_000)]
    root = write_dataset(
        tmp_path / "ds", scans, _imu(n=50),
        np.array([0], dtype=np.int64), np.zeros((1, 3)),
        np.array([[1.0, 0.0, 0.0, 0.0]]),
    )
    (root / "scans" / "000000.frad").rename(root / "scans" / "000005.frad")
    with pytest.raises(FormatError, match="contiguous"):
        load_dataset(root)
    (root / "scans" / "000005.frad").rename(root / "scans" / "000000.frad")
    (root / "imu.csv").unlink()
    with pytest.raises(FormatError, match="missing imu"):
        load_dataset(root)


def test_dataset_scans_must_sit_inside_imu_span(tmp_path):
    # Scan at t=9 s but IMU covers only the first second.
    scans = [_scan(t0=9_000_000_000)]
    root = write_dataset(
        tmp_path / "ds", scans, _imu(n=50),
        np.array([0], dtype=np.int64), np.zeros((1, 3)),
        np.array([[1.0, 0.0, 0.0, 0.0]]),
    )
    with pytest.raises(FormatError, match="IMU span"):
        load_dataset(root)
