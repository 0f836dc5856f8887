"""Costmaps, A* global planning, and the collision-counting experiment.

The costmap marks cells lethal where occupancy crosses a threshold,
hard-inflates them by the robot radius, and layers two soft costs on
top: an exponential decay ring around lethal cells and a term
proportional to occupancy probability, so the planner is pushed away
from uncertain regions well before they become forbidden.

Collisions are judged against the rasterized true-occupancy grid at
path resolution: a waypoint collides when the open robot disc around it
intersects an occupied cell's square.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .grid import GridGeometry
from .world import GridWorld


@dataclass
class Costmap:
    geometry: GridGeometry
    lethal: np.ndarray          # bool, robot-radius inflated
    soft: np.ndarray            # additive traversal cost, >= 0
    lethal_threshold: float
    robot_radius: float
    inflation_radius: float
    lam: float


def make_costmap(prob: np.ndarray, geometry: GridGeometry,
                 lethal_threshold: float = 0.65, robot_radius: float = 0.3,
                 inflation_radius: float = 0.5, lam: float = 5.0,
                 cost_scaling: float = 3.0, inflation_weight: float = 2.0) -> Costmap:
    """Build a planning costmap from an occupancy-probability grid.

    Lethal: probability >= threshold, dilated so every cell whose center
    lies within robot_radius of an occupied center is forbidden. Soft:
    lam * p plus an exponential ring decaying from the lethal boundary
    out to inflation_radius.
    """
    if not (0.5 < lethal_threshold < 1.0):
        raise ConfigError(f"lethal_threshold must lie in (0.5, 1), got {lethal_threshold}")
    if robot_radius < 0 or inflation_radius < 0:
        raise ConfigError("radii must be >= 0")
    prob = np.asarray(prob, dtype=float)
    if prob.shape != (geometry.ny, geometry.nx):
        raise ConfigError(f"probability grid shape {prob.shape} does not match geometry "
                          f"({geometry.ny}, {geometry.nx})")
    occupied = prob >= lethal_threshold
    if occupied.any():
        dist = ndimage.distance_transform_edt(~occupied) * geometry.resolution
        lethal = dist <= robot_radius
        ring = ~lethal & (dist <= inflation_radius)
        inflation = np.where(ring, inflation_weight *
                             np.exp(-cost_scaling * (dist - robot_radius)), 0.0)
    else:
        lethal = occupied
        inflation = 0.0
    soft = lam * prob + inflation
    return Costmap(geometry=geometry, lethal=lethal, soft=soft,
                   lethal_threshold=lethal_threshold, robot_radius=robot_radius,
                   inflation_radius=inflation_radius, lam=lam)


@dataclass
class PathResult:
    status: str                           # "found" | "no_path"
    waypoints: list = field(default_factory=list)   # world (x, y) cell centers
    total_cost: float = math.inf
    cells: list = field(default_factory=list)       # (ix, iy) along the path

    @property
    def found(self) -> bool:
        return self.status == "found"


_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def plan(costmap: Costmap, start, goal) -> PathResult:
    """A* over the 8-connected grid, optimal for the costmap's edge weights.

    Edge weight is the Euclidean step length times (1 + mean endpoint
    soft cost); the Euclidean heuristic is consistent for it. Diagonal
    moves may not cut lethal corners. Ties break lexicographically on
    (f, h, cell index) so results are platform-independent.
    """
    geom = costmap.geometry
    res = geom.resolution
    for label, point in (("start", start), ("goal", goal)):
        if not geom.contains_point(point[0], point[1]):
            raise ValueError(f"{label} {point} outside the map")
    sx, sy = geom.world_to_cell(start[0], start[1])
    gx, gy = geom.world_to_cell(goal[0], goal[1])
    lethal = costmap.lethal
    if lethal[sy, sx]:
        raise ValueError(f"start {start} lies in a lethal cell")
    if lethal[gy, gx]:
        raise ValueError(f"goal {goal} lies in a lethal cell")

    nx, ny = geom.nx, geom.ny
    soft = costmap.soft

    def heuristic(ix, iy):
        return math.hypot((ix - gx) * res, (iy - gy) * res)

    g_best = np.full((ny, nx), math.inf)
    parent = np.full((ny, nx), -1, dtype=np.int64)
    g_best[sy, sx] = 0.0
    h0 = heuristic(sx, sy)
    heap = [(h0, h0, sy * nx + sx, 0.0)]
    goal_idx = gy * nx + gx
    diag = res * math.sqrt(2.0)

    while heap:
        f, h, idx, g = heapq.heappop(heap)
        iy, ix = divmod(idx, nx)
        if g > g_best[iy, ix]:
            continue  # stale entry
        if idx == goal_idx:
            break
        s_here = soft[iy, ix]
        for dx, dy in _NEIGHBORS:
            jx, jy = ix + dx, iy + dy
            if not (0 <= jx < nx and 0 <= jy < ny):
                continue
            if lethal[jy, jx]:
                continue
            if dx != 0 and dy != 0 and (lethal[iy, jx] or lethal[jy, ix]):
                continue  # no corner cutting
            step = diag if (dx != 0 and dy != 0) else res
            g_new = g + step * (1.0 + 0.5 * (s_here + soft[jy, jx]))
            if g_new < g_best[jy, jx]:
                g_best[jy, jx] = g_new
                parent[jy, jx] = idx
                hj = heuristic(jx, jy)
                heapq.heappush(heap, (g_new + hj, hj, jy * nx + jx, g_new))
    else:
        return PathResult(status="no_path")

    cells = []
    idx = goal_idx
    while idx != -1:
        iy, ix = divmod(idx, nx)
        cells.append((ix, iy))
        if idx == sy * nx + sx:
            break
        idx = int(parent[iy, ix])
    cells.reverse()
    waypoints = [(geom.ox + (ix + 0.5) * res, geom.oy + (iy + 0.5) * res)
                 for ix, iy in cells]
    return PathResult(status="found", waypoints=waypoints,
                      total_cost=float(g_best[gy, gx]), cells=cells)


# -- collision checking ---------------------------------------------------------

@dataclass
class CollisionReport:
    collided: bool
    first_index: int | None = None
    location: tuple | None = None
    obstacles: list = field(default_factory=list)   # dicts with visibility flags

    def hits_laser_invisible(self) -> bool:
        return any(not ob["laser_visible"] for ob in self.obstacles)


def _disc_offsets(robot_radius: float, resolution: float) -> np.ndarray:
    """Cell offsets whose square lies strictly within the robot disc.

    Offset (di, dj) is included when the open disc of robot_radius
    around a cell center intersects the square of the cell di columns
    and dj rows away.
    """
    k = int(math.ceil(robot_radius / resolution)) + 1
    d = np.arange(-k, k + 1)
    di, dj = np.meshgrid(d, d)
    ax = np.maximum(np.abs(di) * resolution - 0.5 * resolution, 0.0)
    ay = np.maximum(np.abs(dj) * resolution - 0.5 * resolution, 0.0)
    keep = np.hypot(ax, ay) < robot_radius
    order = np.argsort(np.hypot(ax, ay)[keep], kind="stable")
    return np.column_stack((di[keep][order], dj[keep][order]))


def collision_mask(world: GridWorld, robot_radius: float) -> np.ndarray:
    """Cells where a robot center would strictly intersect true occupancy."""
    offsets = _disc_offsets(robot_radius, world.geometry.resolution)
    k = int(np.max(np.abs(offsets))) if offsets.size else 0
    structure = np.zeros((2 * k + 1, 2 * k + 1), dtype=bool)
    structure[offsets[:, 1] + k, offsets[:, 0] + k] = True
    return ndimage.binary_dilation(world.true_occ, structure=structure)


def evaluate_collisions(path: PathResult, world: GridWorld,
                        robot_radius: float) -> CollisionReport:
    """First collision of a found path against the true occupancy grid.

    Reports the offending waypoint and the visibility class of every
    obstacle covering the nearest occupied cell, so collisions with
    laser-invisible structure can be told apart from ordinary ones.
    """
    if not path.found:
        raise ValueError("cannot evaluate an unfound path")
    geom = world.geometry
    mask = collision_mask(world, robot_radius)
    offsets = _disc_offsets(robot_radius, geom.resolution)
    occ = world.true_occ
    for i, (wx, wy) in enumerate(path.waypoints):
        ix, iy = geom.world_to_cell(wx, wy)
        if not mask[iy, ix]:
            continue
        hit = None
        for di, dj in offsets:   # ordered by distance: nearest occupied cell first
            jx, jy = ix + int(di), iy + int(dj)
            if 0 <= jx < geom.nx and 0 <= jy < geom.ny and occ[jy, jx]:
                hit = (jx, jy)
                break
        obstacles = []
        if hit is not None:
            hx, hy = geom.cell_center(hit[0], hit[1])
            for ob in world.obstacles_at(float(hx), float(hy)):
                obstacles.append({
                    "name": ob.name,
                    "laser_visible": ob.laser_visible,
                    "visible_at_scan_height": ob.laser_visible
                    and ob.intersects_height(world.config.scan_height),
                })
        return CollisionReport(collided=True, first_index=i, location=(wx, wy),
                               obstacles=obstacles)
    return CollisionReport(collided=False)


# -- navigation experiment -------------------------------------------------------

@dataclass
class VariantResult:
    name: str
    trajectories: int
    found: int
    no_path: int
    collisions: int
    collision_pct: float
    details: list = field(default_factory=list)   # (pair index, location, obstacles)
    paths: list = field(default_factory=list)     # found PathResults when kept


@dataclass
class NavReport:
    goals: list
    pairs: list
    seed: int
    variants: list

    def to_csv(self) -> str:
        lines = ["variant,trajectories,found,no_path,collisions,collision_pct"]
        for v in self.variants:
            lines.append(f"{v.name},{v.trajectories},{v.found},{v.no_path},"
                         f"{v.collisions},{v.collision_pct:.4f}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        widths = [max(len(v.name) for v in self.variants) if self.variants else 7, 12, 6, 8, 11, 10]
        head = ["map", "trajectories", "found", "no_path", "collisions", "pct"]
        widths[0] = max(widths[0], len(head[0]))
        fmt = "  ".join("{:>%d}" % w for w in widths)
        rows = [fmt.format(*head)]
        for v in self.variants:
            rows.append(fmt.format(v.name, v.trajectories, v.found, v.no_path,
                                   v.collisions, f"{v.collision_pct:.2f}%"))
        return "\n".join(rows)


def render_paths_pgm(prob: np.ndarray, geometry: GridGeometry, paths, out_path,
                     occupied_thresh: float = 0.65, free_thresh: float = 0.196):
    """Overlay planned paths on a map image (P5, path cells drawn dark gray).

    Same pixel convention as the map export: 0 occupied, 254 free, 205
    unknown, rows top-down; path cells are painted 60.
    """
    img = np.full(prob.shape, 205, dtype=np.uint8)
    img[prob >= occupied_thresh] = 0
    img[prob <= free_thresh] = 254
    for path in paths:
        for ix, iy in path.cells:
            if 0 <= ix < geometry.nx and 0 <= iy < geometry.ny:
                img[iy, ix] = 60
    with open(out_path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        f.write(img[::-1].tobytes())


def sample_goals(world: GridWorld, n_goals: int, rng: np.random.Generator,
                 clearance: float = 0.6, min_separation: float = 1.0) -> list:
    """Mutually reachable goal points with true-occupancy clearance.

    Candidates keep at least ``clearance`` to occupied cells, restricted
    to the largest connected free component; a seeded greedy pass picks
    points at least ``min_separation`` apart.
    """
    if n_goals < 2:
        raise ConfigError("need at least 2 goal points")
    geom = world.geometry
    dist = ndimage.distance_transform_edt(~world.true_occ) * geom.resolution
    safe = dist > clearance
    labels, n_comp = ndimage.label(safe, structure=np.ones((3, 3), dtype=int))
    if n_comp == 0:
        raise ConfigError("no free space satisfies the goal clearance")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n_comp + 1))
    main = 1 + int(np.argmax(sizes))
    iys, ixs = np.nonzero(labels == main)
    order = rng.permutation(iys.size)
    goals = []
    for k in order:
        x = geom.ox + (ixs[k] + 0.5) * geom.resolution
        y = geom.oy + (iys[k] + 0.5) * geom.resolution
        if all(math.hypot(x - gx, y - gy) >= min_separation for gx, gy in goals):
            goals.append((float(x), float(y)))
            if len(goals) == n_goals:
                return goals
    raise ConfigError(f"could only place {len(goals)} of {n_goals} goals; "
                      "reduce clearance or separation")


def nav_experiment(world: GridWorld, maps: dict, geometry: GridGeometry,
                   n_goals: int = 15, n_trajectories: int = 400, seed: int = 0,
                   robot_radius: float = 0.3, lethal_threshold: float = 0.65,
                   inflation_radius: float = 0.5, lam: float = 5.0,
                   inflation_margin: float = 0.15, goal_clearance: float = 0.6,
                   goal_min_separation: float = 1.0, keep_paths: bool = False) -> NavReport:
    """Plan a seeded sequence of goal pairs on each map and count collisions.

    Every variant sees the identical goal sequence. Pairs whose plan
    fails (disconnected, or an endpoint inside that map's lethal set)
    count as no_path and are excluded from the collision denominator.
    The costmap's hard inflation uses robot_radius + inflation_margin:
    the margin covers both the half-cell rasterization slack of the
    collision test and the occupied band sitting slightly behind mapped
    surfaces.
    """
    rng = np.random.default_rng(seed)
    goals = sample_goals(world, n_goals, rng, goal_clearance, goal_min_separation)
    pairs = []
    for _ in range(n_trajectories):
        i = int(rng.integers(n_goals))
        j = int(rng.integers(n_goals - 1))
        if j >= i:
            j += 1
        pairs.append((i, j))

    variants = []
    for name, prob in maps.items():
        costmap = make_costmap(prob, geometry, lethal_threshold=lethal_threshold,
                               robot_radius=robot_radius + inflation_margin,
                               inflation_radius=inflation_radius, lam=lam)
        found = no_path = collisions = 0
        details = []
        kept = []
        for k, (i, j) in enumerate(pairs):
            try:
                path = plan(costmap, goals[i], goals[j])
            except ValueError:
                no_path += 1
                continue
            if not path.found:
                no_path += 1
                continue
            found += 1
            if keep_paths:
                kept.append(path)
            report = evaluate_collisions(path, world, robot_radius)
            if report.collided:
                collisions += 1
                details.append((k, report.location, report.obstacles))
        pct = 100.0 * collisions / found if found else 0.0
        variants.append(VariantResult(name=name, trajectories=len(pairs), found=found,
                                      no_path=no_path, collisions=collisions,
                                      collision_pct=pct, details=details, paths=kept))
    return NavReport(goals=goals, pairs=pairs, seed=seed, variants=variants)
