"""Independent reference implementations used only to check the library.

Everything here recomputes results by a different route than the code
under test: brute-force geometry for the ray traversal, Simpson /
trapezoid quadrature for the spline, golden-section search for the
likelihood maximizer, and plain Dijkstra for the planner.
"""

from __future__ import annotations

import heapq
import math

import numpy as np


def segment_cell_intersections(geom, x0, y0, dx, dy, stop):
    """Cells whose open interior a segment crosses, by exhaustive testing.

    Liang-Barsky clips the segment against every cell's closed box; the
    cell counts when the clipped interval has positive length and its
    midpoint lies strictly inside the box. Returned in entry order.
    """
    x1, y1 = x0 + stop * dx, y0 + stop * dy
    res = geom.resolution
    out = []
    for iy in range(geom.ny):
        for ix in range(geom.nx):
            bx0 = geom.ox + ix * res
            by0 = geom.oy + iy * res
            bx1, by1 = bx0 + res, by0 + res
            t0, t1 = 0.0, 1.0
            ok = True
            for p, q in ((-(x1 - x0), x0 - bx0), (x1 - x0, bx1 - x0),
                         (-(y1 - y0), y0 - by0), (y1 - y0, by1 - y0)):
                if p == 0:
                    if q < 0:
                        ok = False
                        break
                else:
                    r = q / p
                    if p < 0:
                        t0 = max(t0, r)
                    else:
                        t1 = min(t1, r)
            if not ok or t0 >= t1:
                continue
            tm = 0.5 * (t0 + t1)
            mx = x0 + tm * (x1 - x0)
            my = y0 + tm * (y1 - y0)
            if bx0 < mx < bx1 and by0 < my < by1:
                out.append((t0, ix, iy))
    out.sort()
    return [(ix, iy) for _, ix, iy in out]


def golden_section_max(f, lo, hi, tol=1e-10):
    """Argmax of a unimodal function by golden-section search."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def simpson_segment_integral(model, a, b):
    """Exact integral of the piecewise-quadratic pdf over [a, b].

    Composite Simpson with nodes on the spline's own break points is
    exact for quadratics, so this only shares the pdf evaluation with
    the code under test, not its antiderivative.
    """
    knots = [a] + [float(t) for t in model.breaks if a < t < b] + [b]
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        mid = 0.5 * (lo + hi)
        total += (hi - lo) / 6.0 * (model.pdf(lo) + 4.0 * model.pdf(mid) + model.pdf(hi))
    return total


def dijkstra_cost(costmap, start, goal):
    """Shortest-path cost with the planner's edge weights, no heuristic.

    Mirrors the 8-connected neighborhood, the no-corner-cutting rule,
    and the exact edge-weight expression so optimal costs are float
    comparable.
    """
    geom = costmap.geometry
    nx, ny = geom.nx, geom.ny
    res = geom.resolution
    lethal = costmap.lethal
    soft = costmap.soft
    sx, sy = geom.world_to_cell(start[0], start[1])
    gx, gy = geom.world_to_cell(goal[0], goal[1])
    if lethal[sy, sx] or lethal[gy, gx]:
        raise ValueError("lethal endpoint")
    dist = np.full((ny, nx), math.inf)
    dist[sy, sx] = 0.0
    heap = [(0.0, sy * nx + sx)]
    diag = res * math.sqrt(2.0)
    neighbors = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))
    while heap:
        g, idx = heapq.heappop(heap)
        iy, ix = divmod(idx, nx)
        if g > dist[iy, ix]:
            continue
        if ix == gx and iy == gy:
            return g
        s_here = soft[iy, ix]
        for dx, dy in neighbors:
            jx, jy = ix + dx, iy + dy
            if not (0 <= jx < nx and 0 <= jy < ny):
                continue
            if lethal[jy, jx]:
                continue
            if dx != 0 and dy != 0 and (lethal[iy, jx] or lethal[jy, ix]):
                continue
            step = diag if (dx != 0 and dy != 0) else res
            g_new = g + step * (1.0 + 0.5 * (s_here + soft[jy, jx]))
            if g_new < dist[jy, jx]:
                dist[jy, jx] = g_new
                heapq.heappush(heap, (g_new, jy * nx + jx))
    return math.inf
