"""Small 2D helpers for convex polygons given as tuples of (x, y) floats."""

from __future__ import annotations

import math

Point = tuple[float, float]


def signed_area(poly) -> float:
    a = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def centroid(poly) -> Point:
    """Area centroid of a simple polygon."""
    a = signed_area(poly)
    cx = cy = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    return (cx / (6.0 * a), cy / (6.0 * a))


def is_strictly_convex(poly) -> bool:
    """True when every turn has the same nonzero sign and the boundary winds once."""
    n = len(poly)
    if n < 3:
        return False
    sign = 0
    turning = 0.0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cx, cy = poly[(i + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        if cross == 0:
            return False
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
        a1 = math.atan2(by - ay, bx - ax)
        a2 = math.atan2(cy - by, cx - bx)
        d = a2 - a1
        while d <= -math.pi:
            d += 2 * math.pi
        while d > math.pi:
            d -= 2 * math.pi
        turning += d
    # a pentagram has consistent turn signs but winds twice
    return abs(abs(turning) - 2 * math.pi) < 1e-6


def closest_point(poly, px: float, py: float) -> tuple[float, float, bool]:
    """Closest boundary point of a convex polygon to (px, py).

    Returns ``(cx, cy, inside)`` where ``inside`` says whether the query point
    lies strictly inside the polygon.
    """
    best = math.inf
    bx = by = 0.0
    inside = True
    orient = 1.0 if signed_area(poly) > 0 else -1.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        wx, wy = px - x0, py - y0
        if orient * (ex * wy - ey * wx) <= 0:
            inside = False
        ee = ex * ex + ey * ey
        t = (wx * ex + wy * ey) / ee
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        qx, qy = x0 + t * ex, y0 + t * ey
        d = (px - qx) ** 2 + (py - qy) ** 2
        if d < best:
            best, bx, by = d, qx, qy
    return bx, by, inside


def distance(poly, px: float, py: float) -> float:
    """Distance from a point to a convex polygon (0 inside)."""
    cx, cy, inside = closest_point(poly, px, py)
    if inside:
        return 0.0
    return math.hypot(px - cx, py - cy)


def bounding_circle(poly) -> tuple[float, float, float]:
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    cx = 0.5 * (min(xs) + max(xs))
    cy = 0.5 * (min(ys) + max(ys))
    r = max(math.hypot(x - cx, y - cy) for x, y in poly)
    return cx, cy, r


def polygons_overlap(a, b) -> bool:
    """Separating-axis test for two convex polygons (touching counts as overlap)."""
    for poly in (a, b):
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            nx, ny = y0 - y1, x1 - x0
            pa = [nx * x + ny * y for x, y in a]
            pb = [nx * x + ny * y for x, y in b]
            if max(pa) < min(pb) or max(pb) < min(pa):
                return False
    return True
