"""Ready-made demo worlds and pose trajectory generators.

Two scenarios mirror the motivating navigation problem: a glass panel
the laser sees straight through (plus a table whose top floats above
the scan plane), and a room divided by a wall whose nearer doorway is
glazed, so the shortcut is invisible to the raw scan. A third scenario
provides varied-range training data for the learned estimators.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .estimators import ErrorModel
from .grid import GridGeometry
from .world import Obstacle, Pose2D, WorldConfig


def poses_along(waypoints, spacing: float) -> list[Pose2D]:
    """Poses interpolated along a polyline at fixed arc-length spacing.

    Headings follow the containing segment. The first sample sits on
    the first waypoint; sampling stops at the polyline's end.
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least two 2-D waypoints")
    if not (spacing > 0):
        raise ValueError("spacing must be positive")
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(seg_len == 0):
        raise ValueError("repeated consecutive waypoints")
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))
    poses = []
    s = 0.0
    while s <= cum[-1] + 1e-12:
        k = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg) - 1)
        f = (s - cum[k]) / seg_len[k]
        x, y = pts[k] + min(f, 1.0) * seg[k]
        poses.append(Pose2D(float(x), float(y), float(math.atan2(seg[k, 1], seg[k, 0]))))
        s += spacing
    return poses


def line_poses(x0: float, y0: float, x1: float, y1: float, n: int) -> list[Pose2D]:
    """Exactly n poses evenly spaced on a segment, heading along it."""
    theta = math.atan2(y1 - y0, x1 - x0)
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    return [Pose2D(float(x), float(y), theta) for x, y in zip(xs, ys)]


def random_free_poses(world, n: int, rng: np.random.Generator,
                      clearance: float = 0.4, max_tries: int = 100000) -> list[Pose2D]:
    """Uniform random poses over free space with a clearance margin."""
    geom = world.geometry
    dist = ndimage.distance_transform_edt(~world.true_occ) * geom.resolution
    poses: list[Pose2D] = []
    tries = 0
    while len(poses) < n:
        if tries >= max_tries:
            raise ConfigError(f"could not place {n} free poses (got {len(poses)})")
        tries += 1
        x = rng.uniform(0.0, geom.width)
        y = rng.uniform(0.0, geom.height)
        ix, iy = geom.world_to_cell(x, y)
        if geom.contains_cell(ix, iy) and dist[iy, ix] > clearance:
            poses.append(Pose2D(x, y, rng.uniform(0.0, 2.0 * math.pi)))
    return poses


def rect_mask(geometry: GridGeometry, rect) -> np.ndarray:
    """Boolean grid of cells whose centers lie inside an (x0, y0, x1, y1) rect."""
    x0, y0, x1, y1 = rect
    cx = geometry.ox + (np.arange(geometry.nx) + 0.5) * geometry.resolution
    cy = geometry.oy + (np.arange(geometry.ny) + 0.5) * geometry.resolution
    in_x = (cx >= x0) & (cx <= x1)
    in_y = (cy >= y0) & (cy <= y1)
    return np.outer(in_y, in_x)


def obstacle_mask(geometry: GridGeometry, obstacle: Obstacle) -> np.ndarray:
    cx, cy = np.meshgrid(
        geometry.ox + (np.arange(geometry.nx) + 0.5) * geometry.resolution,
        geometry.oy + (np.arange(geometry.ny) + 0.5) * geometry.resolution,
    )
    return obstacle.contains(cx, cy)


def _perimeter(width: float, height: float, thickness: float,
               wall_height: float = 2.0) -> list[Obstacle]:
    t = thickness
    h = (0.0, wall_height)
    return [
        Obstacle.rect(0.0, 0.0, width, t, h, name="wall_south"),
        Obstacle.rect(0.0, height - t, width, height, h, name="wall_north"),
        Obstacle.rect(0.0, t, t, height - t, h, name="wall_west"),
        Obstacle.rect(width - t, t, width, height - t, h, name="wall_east"),
    ]


def glass_panel_scenario():
    """Small room with a free-standing glass panel and a table.

    The 200-pose patrol hugs both faces of the panel, the configuration
    used to judge mapping quality: glass cells should saturate toward
    occupied while the patrol corridor itself reads free. Returns the
    world config plus patrol poses, the matched oracle error model, and
    the named evaluation regions.
    """
    width, height = 6.0, 5.0
    glass = Obstacle.rect(2.9, 1.2, 3.1, 3.2, (0.0, 2.0), laser_visible=False,
                          name="glass_panel")
    legs = [
        Obstacle.rect(4.30, 0.60, 4.36, 0.66, (0.0, 0.7), name="table_leg_sw"),
        Obstacle.rect(5.44, 0.60, 5.50, 0.66, (0.0, 0.7), name="table_leg_se"),
        Obstacle.rect(4.30, 1.44, 4.36, 1.50, (0.0, 0.7), name="table_leg_nw"),
        Obstacle.rect(5.44, 1.44, 5.50, 1.50, (0.0, 0.7), name="table_leg_ne"),
    ]
    slab = Obstacle.rect(4.20, 0.50, 5.60, 1.60, (0.69, 0.72), name="table_top")
    config = WorldConfig(
        width=width, height=height, resolution=0.05,
        robot_height=1.4, scan_height=0.25, max_range=8.0, n_rays=128,
        obstacles=_perimeter(width, height, 0.15) + [glass, slab] + legs,
    )
    offset = 0.48
    poses = (line_poses(2.9 - offset, 0.8, 2.9 - offset, 3.6, 100)
             + line_poses(3.1 + offset, 3.6, 3.1 + offset, 0.8, 100))
    info = {
        "poses": poses,
        "error_model": ErrorModel(kind="laplace", scale_visible=0.04,
                                  scale_hidden=0.08, hidden_margin=0.2),
        "glass": glass,
        "corridor_rects": [
            (2.9 - offset - 0.15, 1.2, 2.9 - offset + 0.15, 3.2),
            (3.1 + offset - 0.15, 1.2, 3.1 + offset + 0.15, 3.2),
        ],
    }
    return config, info


def glass_door_scenario(pose_spacing: float = 0.1):
    """Two rooms, one glazed doorway, one open doorway further away.

    A planner that trusts the raw scan cuts through the glass; the
    detour through the open doorway is longer but safe. The patrol
    covers both rooms and passes along both faces of the glass.
    """
    width, height = 9.0, 7.0
    glass = Obstacle.rect(4.4, 1.6, 4.6, 2.8, (0.0, 2.0), laser_visible=False,
                          name="glass_door")
    divider = [
        Obstacle.rect(4.4, 0.2, 4.6, 1.6, (0.0, 2.0), name="divider_south"),
        glass,
        Obstacle.rect(4.4, 2.8, 4.6, 4.4, (0.0, 2.0), name="divider_mid"),
        # open doorway from y = 4.4 to 6.2
        Obstacle.rect(4.4, 6.2, 4.6, 6.8, (0.0, 2.0), name="divider_north"),
    ]
    config = WorldConfig(
        width=width, height=height, resolution=0.05,
        robot_height=1.4, scan_height=0.25, max_range=8.0, n_rays=128,
        obstacles=_perimeter(width, height, 0.2) + divider,
    )
    hug_l = 4.4 - 0.5
    hug_r = 4.6 + 0.5
    waypoints = [
        (1.0, 1.0), (hug_l, 1.0), (hug_l, 3.4), (hug_l, 5.3), (hug_r, 5.3),
        (hug_r, 3.4), (hug_r, 1.0), (7.8, 1.0), (7.8, 5.8), (5.6, 5.8),
        (5.6, 5.3), (3.0, 5.3), (1.0, 5.8), (1.0, 1.4),
    ]
    info = {
        "poses": poses_along(waypoints, pose_spacing),
        "waypoints": waypoints,
        "error_model": ErrorModel(kind="laplace", scale_visible=0.04,
                                  scale_hidden=0.08, hidden_margin=0.2),
        "glass": glass,
        "open_door_rect": (4.4, 4.4, 4.6, 6.2),
    }
    return config, info


def training_scenario(seed: int = 7, n_blocks: int = 8):
    """Cluttered room giving scans with a wide spread of ray distances."""
    width, height = 10.0, 10.0
    rng = np.random.default_rng(seed)
    obstacles = _perimeter(width, height, 0.2)
    for k in range(n_blocks):
        w = rng.uniform(0.4, 1.2)
        h = rng.uniform(0.4, 1.2)
        x0 = rng.uniform(0.8, width - 0.8 - w)
        y0 = rng.uniform(0.8, height - 0.8 - h)
        obstacles.append(Obstacle.rect(x0, y0, x0 + w, y0 + h, (0.0, 2.0),
                                       name=f"block_{k}"))
    config = WorldConfig(
        width=width, height=height, resolution=0.05,
        robot_height=1.4, scan_height=0.25, max_range=8.0, n_rays=128,
        obstacles=obstacles,
    )
    return config
