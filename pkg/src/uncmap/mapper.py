"""Log-odds occupancy mapping driven by uncertain distance estimates.

For every scan the estimator produces per-ray distances and scales;
each ray is traversed to the far edge of its occupied band (estimate
plus half the spline support, scaled by the ray's uncertainty), every
visited cell receives the log-odds of its spline occupancy, damped by a
correlation factor alpha that guards against overconfidence from
correlated successive readings. Accumulation is raw and commutative;
the clamp is applied only when reading the map out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridGeometry, raycast_cells
from .sensor_models import SUPPORT, U_MIN, SplineModel, occupancy_h
from .world import TWO_PI, Pose2D, ray_angles

# Occupancy is clipped into [O_FLOOR, 1 - O_FLOOR] before the logit so a
# single update contributes bounded evidence.
O_FLOOR = 1e-3
# Free-space occupancy assigned along rays that saw nothing in range.
O_FREE = 0.3
# Log-odds read-out clamp, about logit(1 - 1e-6).
L_MAX = 13.8


@dataclass
class LogOddsMap:
    """Accumulated per-cell log-odds occupancy evidence.

    ``data`` is the raw running sum; unobserved cells stay exactly 0
    (probability 0.5). ``log_odds()`` and ``probability()`` apply the
    read-out clamp.
    """

    geometry: GridGeometry
    clamp: float = L_MAX
    data: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.data is None:
            self.data = self.geometry.zeros()

    def log_odds(self) -> np.ndarray:
        return np.clip(self.data, -self.clamp, self.clamp)

    def probability(self) -> np.ndarray:
        return to_probability(self.log_odds())


def to_probability(log_odds):
    """Logistic conversion from log-odds to occupancy probability."""
    return 1.0 / (1.0 + np.exp(-np.asarray(log_odds, dtype=float)))


def to_log_odds(probability):
    p = np.asarray(probability, dtype=float)
    return np.log(p / (1.0 - p))


def cell_occupancy(spline: SplineModel, distance, y_hat: float, u_hat: float):
    """Occupancy of a cell at Euclidean distance ``distance`` along a ray.

    Evaluates the spline occupancy curve at the normalized signed
    distance behind the estimated surface and clips it away from 0 and
    1 so its logit stays bounded.
    """
    t = (np.asarray(distance, dtype=float) - y_hat) / u_hat
    return np.clip(occupancy_h(spline, t), O_FLOOR, 1.0 - O_FLOOR)


def integrate_scan(lmap: LogOddsMap, pose: Pose2D, y_hat, u_hat, spline: SplineModel,
                   alpha: float = 0.01, fov: float = TWO_PI,
                   max_range: float | None = None) -> LogOddsMap:
    """Add one scan's evidence to the map (in place).

    Rays reporting ``max_range`` are treated as no-return: the whole ray
    gets free-space evidence and no occupied band. All other rays are
    traversed to y_hat + SUPPORT * u_hat (half the spline's total
    support, scaled by the ray's uncertainty) so the occupied band
    behind the surface is written, not just the cells up to it.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    y = np.asarray(y_hat, dtype=float)
    u = np.maximum(np.asarray(getattr(u_hat, "values", u_hat), dtype=float), U_MIN)
    if y.shape != u.shape or y.ndim != 1:
        raise ValueError("y_hat and u_hat must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(u))):
        raise ValueError("non-finite scan inputs")

    geom = lmap.geometry
    angles = ray_angles(y.size, fov, pose.theta)
    free_increment = alpha * math.log(O_FREE / (1.0 - O_FREE))
    data = lmap.data
    for r in range(y.size):
        if max_range is not None and y[r] >= max_range - 1e-9:
            cells = raycast_cells(geom, pose.x, pose.y, float(angles[r]), max_range)
            data[cells[:, 1], cells[:, 0]] += free_increment
            continue
        stop = y[r] + SUPPORT * u[r]
        cells = raycast_cells(geom, pose.x, pose.y, float(angles[r]), stop)
        cx, cy = geom.cell_center(cells[:, 0], cells[:, 1])
        d = np.hypot(cx - pose.x, cy - pose.y)
        o = cell_occupancy(spline, d, y[r], u[r])
        data[cells[:, 1], cells[:, 0]] += alpha * np.log(o / (1.0 - o))
    return lmap


def accumulate_scans(poses, scans, estimator, spline: SplineModel, geometry: GridGeometry,
                     alpha: float = 0.01, fov: float = TWO_PI,
                     max_range: float | None = None) -> LogOddsMap:
    """Run the estimator over every scan and integrate the results."""
    poses = list(poses)
    scans = list(scans)
    if len(poses) != len(scans):
        raise ValueError(f"got {len(poses)} poses but {len(scans)} scans")
    lmap = LogOddsMap(geometry)
    for pose, x_scan in zip(poses, scans):
        out = estimator(x_scan, pose)
        integrate_scan(lmap, pose, out.y_hat, out.u_hat, spline, alpha, fov, max_range)
    return lmap


def build_uncertainty_map(poses, scans, estimator, spline: SplineModel,
                          geometry: GridGeometry, alpha: float = 0.01,
                          fov: float = TWO_PI, max_range: float | None = None) -> np.ndarray:
    """Per-cell occupancy probabilities from a pose/scan sequence.

    With no scans at all the result is uniformly 0.5: no evidence.
    """
    return accumulate_scans(poses, scans, estimator, spline, geometry,
                            alpha, fov, max_range).probability()


# -- map export ----------------------------------------------------------------

OCCUPIED_THRESH = 0.65
FREE_THRESH = 0.196


def write_pgm(prob: np.ndarray, geometry: GridGeometry, path,
              occupied_thresh: float = OCCUPIED_THRESH, free_thresh: float = FREE_THRESH):
    """Write a binary (P5) occupancy image plus a metadata sidecar.

    Follows the common map-server convention: 0 = occupied, 254 = free,
    205 = unknown, image rows run from the top of the map down, and the
    sidecar records resolution, origin, and the thresholds.
    """
    img = np.full(prob.shape, 205, dtype=np.uint8)
    img[prob >= occupied_thresh] = 0
    img[prob <= free_thresh] = 254
    path = str(path)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        f.write(img[::-1].tobytes())
    sidecar = path[:-4] + ".yaml" if path.endswith(".pgm") else path + ".yaml"
    image_name = path.rsplit("/", 1)[-1]
    with open(sidecar, "w") as f:
        f.write(f"image: {image_name}\n")
        f.write(f"resolution: {geometry.resolution!r}\n")
        f.write(f"origin: [{geometry.ox!r}, {geometry.oy!r}, 0.0]\n")
        f.write("negate: 0\n")
        f.write(f"occupied_thresh: {occupied_thresh!r}\n")
        f.write(f"free_thresh: {free_thresh!r}\n")


def write_probability_csv(prob: np.ndarray, path):
    """Lossless CSV export (17 significant digits round-trips float64)."""
    np.savetxt(path, prob, delimiter=",", fmt="%.17g")


def read_probability_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))
