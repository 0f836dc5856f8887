"""Synthetic 2.5D environments and the simulated 2D laser scanner.

Each obstacle occupies a 2D footprint over a height interval. The laser
only returns obstacles that are flagged reflective and intersect the
scan plane; the true obstacle-distance profile instead considers every
obstacle anywhere between the floor and the robot's top, which is what
the robot could actually collide with. Glass walls (reflective flag
off) and table tops (height interval above the scan plane) are the two
classic cases where the profiles differ.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import GridGeometry, first_hit_distance

SCENARIO_SCHEMA = 1

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned rectangle or thick segment over a height interval.

    ``laser_visible=False`` models glass and other surfaces a lidar
    cannot return from, at any height.
    """

    kind: str                      # "rect" | "segment"
    x0: float
    y0: float
    x1: float
    y1: float
    thickness: float = 0.0         # segments only
    height_interval: tuple[float, float] = (0.0, 2.0)
    laser_visible: bool = True
    name: str = ""

    @classmethod
    def rect(cls, x0, y0, x1, y1, height_interval=(0.0, 2.0), laser_visible=True, name=""):
        return cls("rect", x0, y0, x1, y1, 0.0, tuple(height_interval), laser_visible, name)

    @classmethod
    def segment(cls, x0, y0, x1, y1, thickness, height_interval=(0.0, 2.0),
                laser_visible=True, name=""):
        return cls("segment", x0, y0, x1, y1, thickness, tuple(height_interval),
                   laser_visible, name)

    def validate(self):
        lo, hi = self.height_interval
        if not (0.0 <= lo < hi):
            raise ConfigError(f"obstacle {self.name!r}: bad height interval [{lo}, {hi}]")
        if self.kind == "rect":
            if not (self.x1 > self.x0 and self.y1 > self.y0):
                raise ConfigError(f"obstacle {self.name!r}: rectangle has no positive extent")
        elif self.kind == "segment":
            if math.hypot(self.x1 - self.x0, self.y1 - self.y0) <= 0.0:
                raise ConfigError(f"obstacle {self.name!r}: zero-length segment")
            if not (self.thickness > 0.0):
                raise ConfigError(f"obstacle {self.name!r}: segment thickness must be positive")
        else:
            raise ConfigError(f"obstacle {self.name!r}: unknown kind {self.kind!r}")

    def bounds(self) -> tuple[float, float, float, float]:
        if self.kind == "rect":
            return (self.x0, self.y0, self.x1, self.y1)
        r = 0.5 * self.thickness
        return (min(self.x0, self.x1) - r, min(self.y0, self.y1) - r,
                max(self.x0, self.x1) + r, max(self.y0, self.y1) + r)

    def contains(self, px, py):
        """Footprint membership; accepts scalars or arrays."""
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        if self.kind == "rect":
            return (px >= self.x0) & (px <= self.x1) & (py >= self.y0) & (py <= self.y1)
        ax, ay, bx, by = self.x0, self.y0, self.x1, self.y1
        vx, vy = bx - ax, by - ay
        den = vx * vx + vy * vy
        s = np.clip(((px - ax) * vx + (py - ay) * vy) / den, 0.0, 1.0)
        dx = px - (ax + s * vx)
        dy = py - (ay + s * vy)
        return dx * dx + dy * dy <= (0.5 * self.thickness) ** 2

    def intersects_height(self, h: float) -> bool:
        lo, hi = self.height_interval
        return lo <= h <= hi


@dataclass
class WorldConfig:
    width: float
    height: float
    resolution: float = 0.05
    robot_height: float = 1.4
    scan_height: float = 0.25
    max_range: float = 8.0
    n_rays: int = 128
    fov: float = TWO_PI
    obstacles: list[Obstacle] = field(default_factory=list)

    def validate(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("world extent must be positive")
        if not (0.0 <= self.scan_height <= self.robot_height):
            raise ConfigError(
                f"scan height {self.scan_height} outside [0, {self.robot_height}]")
        if not (self.max_range > 0):
            raise ConfigError("max_range must be positive")
        if self.n_rays < 1:
            raise ConfigError("n_rays must be >= 1")
        if not (0 < self.fov <= TWO_PI + 1e-12):
            raise ConfigError("fov must lie in (0, 2*pi]")
        for ob in self.obstacles:
            ob.validate()
            bx0, by0, bx1, by1 = ob.bounds()
            if bx0 < -1e-9 or by0 < -1e-9 or bx1 > self.width + 1e-9 or by1 > self.height + 1e-9:
                raise ConfigError(f"obstacle {ob.name!r} extends outside the world extent")


class GridWorld:
    """Immutable rasterized world: queries only after construction."""

    def __init__(self, config: WorldConfig):
        config.validate()
        self.config = config
        self.geometry = GridGeometry.from_extent(config.width, config.height,
                                                 config.resolution)
        cx, cy = np.meshgrid(
            self.geometry.ox + (np.arange(self.geometry.nx) + 0.5) * config.resolution,
            self.geometry.oy + (np.arange(self.geometry.ny) + 0.5) * config.resolution,
        )
        true_occ = np.zeros(cx.shape, dtype=bool)
        visible_occ = np.zeros(cx.shape, dtype=bool)
        for ob in config.obstacles:
            lo, hi = ob.height_interval
            if lo > config.robot_height:
                continue  # entirely above the robot: not a collision hazard
            inside = ob.contains(cx, cy)
            true_occ |= inside
            if ob.laser_visible and ob.intersects_height(config.scan_height):
                visible_occ |= inside
        self.true_occ = true_occ
        self.visible_occ = visible_occ
        self.true_occ.setflags(write=False)
        self.visible_occ.setflags(write=False)

    def is_free(self, pose: Pose2D) -> bool:
        if not self.geometry.contains_point(pose.x, pose.y):
            return False
        ix, iy = self.geometry.world_to_cell(pose.x, pose.y)
        return not self.true_occ[iy, ix]

    def obstacles_at(self, x: float, y: float) -> list[Obstacle]:
        return [ob for ob in self.config.obstacles if bool(ob.contains(x, y))]


def build_world(config: WorldConfig) -> GridWorld:
    return GridWorld(config)


def ray_angles(n_rays: int, fov: float, theta: float = 0.0) -> np.ndarray:
    """World-frame directions of the scanner's rays for a given heading.

    A full-circle field of view spaces rays by fov/n without repeating
    the wrap-around direction; a partial one spans it inclusively.
    """
    if fov >= TWO_PI - 1e-9:
        return theta + np.arange(n_rays) * (TWO_PI / n_rays)
    if n_rays == 1:
        return np.asarray([theta])
    return theta + np.linspace(-0.5 * fov, 0.5 * fov, n_rays)


def _check_pose(world: GridWorld, pose: Pose2D):
    if not world.geometry.contains_point(pose.x, pose.y):
        raise ValueError(f"pose ({pose.x:.3f}, {pose.y:.3f}) outside world extent")
    if not world.is_free(pose):
        raise ValueError(f"pose ({pose.x:.3f}, {pose.y:.3f}) lies inside an obstacle")


def true_distance_profile(world: GridWorld, pose: Pose2D) -> np.ndarray:
    """Per-ray distance to the nearest obstacle at any height below the robot's top."""
    _check_pose(world, pose)
    cfg = world.config
    angles = ray_angles(cfg.n_rays, cfg.fov, pose.theta)
    out = np.empty(cfg.n_rays)
    for i, a in enumerate(angles):
        out[i] = first_hit_distance(world.true_occ, world.geometry,
                                    pose.x, pose.y, float(a), cfg.max_range)
    return out


def visible_distance_profile(world: GridWorld, pose: Pose2D) -> np.ndarray:
    """Noise-free scan: distances to laser-visible obstacles at scan height."""
    _check_pose(world, pose)
    cfg = world.config
    angles = ray_angles(cfg.n_rays, cfg.fov, pose.theta)
    out = np.empty(cfg.n_rays)
    for i, a in enumerate(angles):
        out[i] = first_hit_distance(world.visible_occ, world.geometry,
                                    pose.x, pose.y, float(a), cfg.max_range)
    return out


def simulate_scan(world: GridWorld, pose: Pose2D, noise_sigma: float,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Raw laser scan at scan height with additive Gaussian range noise.

    Readings are clamped to (0, max_range]. Pass a seeded generator for
    reproducible noise; parallel callers should use independent streams.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    scan = visible_distance_profile(world, pose)
    if noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng()
        scan = scan + rng.normal(0.0, noise_sigma, size=scan.shape)
    return np.clip(scan, 1e-6, world.config.max_range)


@dataclass(frozen=True)
class ScanPair:
    """One simulated observation: raw scan plus ground-truth distances."""

    x_scan: np.ndarray
    y_true: np.ndarray
    pose: Pose2D


def make_scan_pair(world: GridWorld, pose: Pose2D, noise_sigma: float = 0.0,
                   rng: np.random.Generator | None = None) -> ScanPair:
    return ScanPair(x_scan=simulate_scan(world, pose, noise_sigma, rng),
                    y_true=true_distance_profile(world, pose),
                    pose=pose)


# -- scenario files -----------------------------------------------------------

def _obstacle_to_json(ob: Obstacle) -> dict:
    d = {
        "shape": ob.kind,
        "height_interval": list(ob.height_interval),
        "laser_visible": ob.laser_visible,
        "name": ob.name,
    }
    if ob.kind == "rect":
        d["bounds"] = [ob.x0, ob.y0, ob.x1, ob.y1]
    else:
        d["endpoints"] = [ob.x0, ob.y0, ob.x1, ob.y1]
        d["thickness"] = ob.thickness
    return d


def _obstacle_from_json(d: dict) -> Obstacle:
    common = dict(height_interval=tuple(d["height_interval"]),
                  laser_visible=bool(d["laser_visible"]),
                  name=d.get("name", ""))
    if d["shape"] == "rect":
        return Obstacle.rect(*d["bounds"], **common)
    if d["shape"] == "segment":
        return Obstacle.segment(*d["endpoints"], d["thickness"], **common)
    raise ConfigError(f"unknown obstacle shape {d.get('shape')!r}")


def scenario_to_json(config: WorldConfig) -> dict:
    return {
        "schema": SCENARIO_SCHEMA,
        "extent": [config.width, config.height],
        "resolution": config.resolution,
        "robot_height": config.robot_height,
        "scan_height": config.scan_height,
        "max_range": config.max_range,
        "n_rays": config.n_rays,
        "fov": config.fov,
        "obstacles": [_obstacle_to_json(ob) for ob in config.obstacles],
    }


def scenario_from_json(data: dict) -> WorldConfig:
    if data.get("schema") != SCENARIO_SCHEMA:
        raise ConfigError(f"unsupported scenario schema {data.get('schema')!r}, "
                          f"expected {SCENARIO_SCHEMA}")
    try:
        cfg = WorldConfig(
            width=float(data["extent"][0]),
            height=float(data["extent"][1]),
            resolution=float(data["resolution"]),
            robot_height=float(data["robot_height"]),
            scan_height=float(data["scan_height"]),
            max_range=float(data["max_range"]),
            n_rays=int(data["n_rays"]),
            fov=float(data["fov"]),
            obstacles=[_obstacle_from_json(d) for d in data["obstacles"]],
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError(f"malformed scenario file: {exc!r}") from exc
    cfg.validate()
    return cfg


def save_scenario(config: WorldConfig, path):
    config.validate()
    with open(path, "w") as f:
        json.dump(scenario_to_json(config), f, indent=2, sort_keys=True)
        f.write("\n")


def load_scenario(path) -> WorldConfig:
    with open(path) as f:
        return scenario_from_json(json.load(f))
