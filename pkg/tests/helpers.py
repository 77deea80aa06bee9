"""Shared builders for the test suite.

Everything here is seeded-RNG driven; tests pass an explicit generator so
each case is reproducible in isolation.
"""

from __future__ import annotations

import numpy as np

from tiltro import PointCloud, PolarScan


def random_scan(
    rng: np.random.Generator,
    n_a: int = 64,
    n_r: int = 200,
    dr: float = 0.1,
    t0: int = 0,
) -> PolarScan:
    """Random intensity grid with evenly spaced azimuths and timestamps."""
    azimuths = np.arange(n_a) * (2.0 * np.pi / n_a)
    t = t0 + (np.arange(n_a) * (250_000_000 // max(n_a, 1))).astype(np.int64)
    intensity = rng.integers(0, 256, size=(n_a, n_r), dtype=np.uint8)
    return PolarScan(azimuths, t, intensity, dr)


def random_cloud(
    rng: np.random.Generator,
    n: int,
    extent: float = 50.0,
    planar: bool = True,
    stage: str = "deskewed",
) -> PointCloud:
    """Uniform random points in a centred box, unit weights."""
    xyz = rng.uniform(-extent, extent, size=(n, 3))
    if planar:
        xyz[:, 2] = 0.0
    intensity = rng.uniform(61.0, 255.0, size=n)
    t = np.zeros(n, dtype=np.int64)
    return PointCloud(stage, xyz, intensity, t, np.ones(n), 0)


def brute_force_k_strongest(scan: PolarScan, k, r_min, r_max, tau_raw):
    """Reference implementation: per azimuth, sort qualifying bins by
    descending intensity with ties to the lower bin, take the first k.
    Returns a list of (azimuth_row, bin) pairs in emission order."""
    n_a, n_r = scan.intensity.shape
    dr = scan.range_resolution
    out = []
    for row in range(n_a):
        candidates = []
        for b in range(n_r):
            r = (b + 0.5) * dr
            v = int(scan.intensity[row, b])
            if r_min <= r <= r_max and v > tau_raw:
                candidates.append((-v, b))
        candidates.sort()
        out.extend((row, b) for _, b in candidates[:k])
    return out
