"""Grid geometry and exact voxel ray traversal.

Both the simulator and the mapper walk rays across the same kind of
regular 2D grid, so the traversal primitive lives here and is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class GridGeometry:
    """A regular grid of square cells.

    Arrays indexed by this geometry are shaped (ny, nx) and addressed
    as ``a[iy, ix]``. Cell (0, 0) has its lower-left corner at the
    origin (ox, oy) in world coordinates.
    """

    nx: int
    ny: int
    resolution: float
    ox: float = 0.0
    oy: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"grid must be at least 1x1, got {self.nx}x{self.ny}")
        if not (self.resolution > 0.0):
            raise ConfigError(f"resolution must be positive, got {self.resolution}")

    @classmethod
    def from_extent(cls, width: float, height: float, resolution: float,
                    ox: float = 0.0, oy: float = 0.0) -> "GridGeometry":
        nx = int(round(width / resolution))
        ny = int(round(height / resolution))
        return cls(nx=nx, ny=ny, resolution=resolution, ox=ox, oy=oy)

    @property
    def width(self) -> float:
        return self.nx * self.resolution

    @property
    def height(self) -> float:
        return self.ny * self.resolution

    def contains_point(self, x: float, y: float) -> bool:
        return (self.ox <= x < self.ox + self.width) and (self.oy <= y < self.oy + self.height)

    def contains_cell(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.nx and 0 <= iy < self.ny

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.ox) / self.resolution)),
                int(math.floor((y - self.oy) / self.resolution)))

    def cell_center(self, ix, iy):
        """Center of cell(s); accepts scalars or index arrays."""
        res = self.resolution
        cx = self.ox + (np.asarray(ix) + 0.5) * res
        cy = self.oy + (np.asarray(iy) + 0.5) * res
        return cx, cy

    def zeros(self, dtype=float) -> np.ndarray:
        return np.zeros((self.ny, self.nx), dtype=dtype)


def raycast_cells(geom: GridGeometry, x0: float, y0: float, angle: float,
                  stop_distance: float) -> np.ndarray:
    """Ordered cells whose interior a ray segment crosses.

    The segment runs from (x0, y0) for ``stop_distance`` meters along
    ``angle``. Traversal is incremental parametric voxel stepping; when
    the segment passes exactly through a cell corner both indices step
    at once, so cells the segment merely touches on their boundary are
    not reported. The list is truncated where the ray leaves the grid.

    Returns an (n, 2) int array of (ix, iy) pairs; the first row is the
    cell containing the start point.
    """
    return raycast_cells_direction(geom, x0, y0, math.cos(angle), math.sin(angle),
                                   stop_distance)


def raycast_cells_direction(geom: GridGeometry, x0: float, y0: float, dx: float,
                            dy: float, stop_distance: float) -> np.ndarray:
    """raycast_cells with an explicit unit direction vector.

    Taking (dx, dy) directly allows exactly representable directions,
    e.g. a true diagonal with dx == dy, where the corner-tie behavior
    matters; cos/sin of an angle are generally an ulp apart.
    """
    if stop_distance <= 0.0:
        raise ValueError(f"stop_distance must be positive, got {stop_distance}")
    res = geom.resolution
    ix, iy = geom.world_to_cell(x0, y0)
    if not geom.contains_cell(ix, iy):
        raise ValueError(f"ray origin ({x0:.3f}, {y0:.3f}) outside grid")

    if dx > 0.0:
        step_x, t_max_x, t_dx = 1, (geom.ox + (ix + 1) * res - x0) / dx, res / dx
    elif dx < 0.0:
        step_x, t_max_x, t_dx = -1, (geom.ox + ix * res - x0) / dx, -res / dx
    else:
        step_x, t_max_x, t_dx = 0, math.inf, math.inf
    if dy > 0.0:
        step_y, t_max_y, t_dy = 1, (geom.oy + (iy + 1) * res - y0) / dy, res / dy
    elif dy < 0.0:
        step_y, t_max_y, t_dy = -1, (geom.oy + iy * res - y0) / dy, -res / dy
    else:
        step_y, t_max_y, t_dy = 0, math.inf, math.inf

    xs = [ix]
    ys = [iy]
    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            ix += step_x
            t_max_x += t_dx
        elif t_max_y < t_max_x:
            t = t_max_y
            iy += step_y
            t_max_y += t_dy
        else:  # exact corner crossing: diagonal step
            t = t_max_x
            ix += step_x
            iy += step_y
            t_max_x += t_dx
            t_max_y += t_dy
        if t >= stop_distance:
            break
        if not (0 <= ix < geom.nx and 0 <= iy < geom.ny):
            break
        xs.append(ix)
        ys.append(iy)
    return np.column_stack((np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64)))


def first_hit_distance(occupancy: np.ndarray, geom: GridGeometry, x0: float, y0: float,
                       angle: float, max_distance: float) -> float:
    """Distance at which a ray first enters an occupied cell.

    Returns ``max_distance`` when no occupied cell is entered before the
    ray travels that far or leaves the grid. The start cell is not
    tested; callers are expected to validate it separately.
    """
    res = geom.resolution
    ix, iy = geom.world_to_cell(x0, y0)
    if not geom.contains_cell(ix, iy):
        raise ValueError(f"ray origin ({x0:.3f}, {y0:.3f}) outside grid")

    dx = math.cos(angle)
    dy = math.sin(angle)
    if dx > 0.0:
        step_x, t_max_x, t_dx = 1, (geom.ox + (ix + 1) * res - x0) / dx, res / dx
    elif dx < 0.0:
        step_x, t_max_x, t_dx = -1, (geom.ox + ix * res - x0) / dx, -res / dx
    else:
        step_x, t_max_x, t_dx = 0, math.inf, math.inf
    if dy > 0.0:
        step_y, t_max_y, t_dy = 1, (geom.oy + (iy + 1) * res - y0) / dy, res / dy
    elif dy < 0.0:
        step_y, t_max_y, t_dy = -1, (geom.oy + iy * res - y0) / dy, -res / dy
    else:
        step_y, t_max_y, t_dy = 0, math.inf, math.inf

    occ = occupancy
    nx, ny = geom.nx, geom.ny
    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            ix += step_x
            t_max_x += t_dx
        elif t_max_y < t_max_x:
            t = t_max_y
            iy += step_y
            t_max_y += t_dy
        else:
            t = t_max_x
            ix += step_x
            iy += step_y
            t_max_x += t_dx
            t_max_y += t_dy
        if t >= max_distance:
            return max_distance
        if not (0 <= ix < nx and 0 <= iy < ny):
            return max_distance
        if occ[iy, ix]:
            return t
