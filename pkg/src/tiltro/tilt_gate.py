"""Tilt-aware point filtering.

When the sensor tilts relative to the map it is matching against, returns
far from the tilt axis sweep through large vertical arcs and stop
corresponding to the same structure.  Each point is therefore scored by the
vertical displacement the relative tilt induces at its location and kept
only while a Cauchy weight of that displacement stays above a cutoff.
Points near the tilt axis survive; the far field is culled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AllPointsRejected
from .frontend import PointCloud
from .geometry import RelativeTilt


@dataclass(frozen=True)
class TiltGateParams:
    """gamma: Cauchy scale (m); tau_tilt: weight cutoff in (0, 1];
    theta_tilt: tilt magnitude (deg) below which the gate passes through."""

    gamma: float = 3.5
    tau_tilt: float = 0.8
    theta_tilt: float = 3.0

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if not 0.0 < self.tau_tilt <= 1.0:
            raise ValueError("tau_tilt must lie in (0, 1]")
        if self.theta_tilt < 0.0:
            raise ValueError("theta_tilt must be non-negative")


def _tilt_matrix(tilt: RelativeTilt) -> np.ndarray:
    ax, ay, az = tilt.axis
    c = math.cos(tilt.angle)
    s = math.sin(tilt.angle)
    one_c = 1.0 - c
    return np.array(
        [
            [c + ax * ax * one_c, ax * ay * one_c - az * s, ax * az * one_c + ay * s],
            [ay * ax * one_c + az * s, c + ay * ay * one_c, ay * az * one_c - ax * s],
            [az * ax * one_c - ay * s, az * ay * one_c + ax * s, c + az * az * one_c],
        ]
    )


def vertical_displacement(p, tilt: RelativeTilt):
    """|e_z . (R(tilt) p - p)|: vertical travel of p under the tilt rotation.

    Accepts a (3,) point or an (N, 3) stack; the tilt axis passes through
    the sensor origin.  For points in the z = 0 plane this equals
    |sin(angle)| times the horizontal distance from the tilt axis.
    """
    p = np.asarray(p, dtype=float)
    rot = _tilt_matrix(tilt)
    dz_row = rot[2] - np.array([0.0, 0.0, 1.0])
    return np.abs(p @ dz_row)


def cauchy_weight(delta_d, gamma: float):
    """Cauchy influence weight 1 / (1 + (delta_d / gamma)^2)."""
    delta_d = np.asarray(delta_d, dtype=float)
    w = 1.0 / (1.0 + (delta_d / gamma) ** 2)
    return float(w) if w.ndim == 0 else w


def tilt_filter(
    cloud: PointCloud, tilt: RelativeTilt, params: TiltGateParams
) -> PointCloud:
    """Drop points whose tilt-induced vertical displacement weight falls
    below tau_tilt; surviving points carry their weights.

    Tilts below theta_tilt (deg) pass the cloud through unchanged (stage
    advanced).  Raises AllPointsRejected when nothing survives.  The
    operation is idempotent for a fixed tilt, so already-filtered clouds
    are accepted as input.
    """
    if cloud.stage not in ("deskewed", "filtered"):
        raise ValueError(f"tilt_filter expects a deskewed cloud, got {cloud.stage!r}")
    if tilt.angle_deg < params.theta_tilt:
        return replace(cloud, stage="filtered")
    displacement = vertical_displacement(cloud.xyz, tilt)
    weight = cauchy_weight(displacement, params.gamma)
    keep = weight >= params.tau_tilt
    if not np.any(keep):
        raise AllPointsRejected(
            f"tilt of {tilt.angle_deg:.2f} deg rejected all {len(cloud)} points"
        )
    out = cloud.subset(keep)
    out.stage = "filtered"
    out.weight = weight[keep]
    return out
