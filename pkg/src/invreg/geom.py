"""Planar geometric primitives on O(1)-scaled coordinates.

All operations are pure and stateless.  A single module-wide tolerance
``TOL`` governs orientation / degeneracy decisions; inputs live in (or
near) the square [-1,1]^2, so double precision with an absolute 1e-12
cutoff is adequate.  Containment tests use closed regions so that points
on shared boundaries belong to at least one cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-12

Point2 = tuple[float, float]


class DegenerateGeometryError(ValueError):
    """Raised when an operation meets a degenerate (zero-area) input."""


def _check_finite(*pts: Point2) -> None:
    for p in pts:
        if not (np.isfinite(p[0]) and np.isfinite(p[1])):
            raise ValueError(f"non-finite point {p!r}")


@dataclass(frozen=True)
class Triangle:
    a: Point2
    b: Point2
    c: Point2  # apex when used for barycentric interpolation


@dataclass(frozen=True)
class Quad:
    """Quadrilateral given by its boundary path v1 -> v2 -> v3 -> v4.

    The intended convention is a clockwise path, but no ordering is
    enforced at construction; twist detection works for any path.
    """

    v1: Point2
    v2: Point2
    v3: Point2
    v4: Point2

    @property
    def vertices(self) -> tuple[Point2, Point2, Point2, Point2]:
        return (self.v1, self.v2, self.v3, self.v4)


def orient(a: Point2, b: Point2, c: Point2, tol: float = TOL) -> int:
    """Sign of the cross product (b-a) x (c-a): +1 ccw, -1 cw, 0 collinear."""
    _check_finite(a, b, c)
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if abs(det) <= tol:
        return 0
    return 1 if det > 0 else -1


def _on_segment(p: Point2, q: Point2, r: Point2) -> bool:
    # assumes p,q,r collinear; is q within the closed box spanned by p,r?
    return (
        min(p[0], r[0]) - TOL <= q[0] <= max(p[0], r[0]) + TOL
        and min(p[1], r[1]) - TOL <= q[1] <= max(p[1], r[1]) + TOL
    )


def segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    """True iff the closed segments p1p2 and q1q2 share at least one point."""
    _check_finite(p1, p2, q1, q2)
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(p1, q1, p2):
        return True
    if o2 == 0 and _on_segment(p1, q2, p2):
        return True
    if o3 == 0 and _on_segment(q1, p1, q2):
        return True
    if o4 == 0 and _on_segment(q1, p2, q2):
        return True
    return False


def segments_intersect_properly(
    p1: Point2, p2: Point2, q1: Point2, q2: Point2
) -> bool:
    """True iff the open segments cross at a single interior point."""
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def quad_is_twisted(q: Quad) -> bool:
    """A quad is twisted when its boundary path self-crosses.

    Tested as proper intersection of the two pairs of non-adjacent edges
    (v1v2 vs v3v4, and v2v3 vs v4v1).  A quad with a repeated vertex has
    a zero-length or zero-area edge that cannot cross properly, so it is
    reported as not twisted (degenerate instead).
    """
    v1, v2, v3, v4 = q.vertices
    _check_finite(v1, v2, v3, v4)
    return segments_intersect_properly(v1, v2, v3, v4) or segments_intersect_properly(
        v2, v3, v4, v1
    )


def barycentric_in_triangle(
    p: Point2, t: Triangle, tol: float = TOL
) -> tuple[float, float] | None:
    """Coefficients (a1, a2) with p = s + a1*(x'-s) + a2*(x''-s), apex s = t.c.

    Returns None when p lies outside the closed triangle, and the unique
    nonnegative pair with a1 + a2 <= 1 otherwise.
    """
    _check_finite(p, t.a, t.b, t.c)
    sx, sy = t.c
    ux, uy = t.a[0] - sx, t.a[1] - sy
    vx, vy = t.b[0] - sx, t.b[1] - sy
    det = ux * vy - uy * vx
    if abs(det) <= tol:
        raise DegenerateGeometryError("triangle has zero signed area")
    px, py = p[0] - sx, p[1] - sy
    a1 = (px * vy - py * vx) / det
    a2 = (ux * py - uy * px) / det
    eps = 1e-10
    if a1 < -eps or a2 < -eps or a1 + a2 > 1.0 + eps:
        return None
    return (min(max(a1, 0.0), 1.0), min(max(a2, 0.0), 1.0))


def point_in_triangle(p: Point2, t: Triangle) -> bool:
    o1 = orient(t.a, t.b, p)
    o2 = orient(t.b, t.c, p)
    o3 = orient(t.c, t.a, p)
    has_neg = o1 < 0 or o2 < 0 or o3 < 0
    has_pos = o1 > 0 or o2 > 0 or o3 > 0
    return not (has_neg and has_pos)


def point_in_quad(p: Point2, q: Quad) -> bool:
    """Closed containment test, splitting q by the v1-v3 diagonal."""
    if quad_is_twisted(q):
        raise ValueError("point_in_quad is undefined for a twisted quad")
    return point_in_triangle(p, Triangle(q.v1, q.v2, q.v3)) or point_in_triangle(
        p, Triangle(q.v1, q.v3, q.v4)
    )


def polygon_area(vertices) -> float:
    """|shoelace sum| / 2 for an ordered vertex list (>= 3 vertices)."""
    vs = np.asarray(vertices, dtype=float)
    if vs.ndim != 2 or vs.shape[0] < 3 or vs.shape[1] != 2:
        raise ValueError("polygon_area needs at least 3 planar vertices")
    x, y = vs[:, 0], vs[:, 1]
    s = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    return abs(s) / 2.0


def hausdorff(a, b) -> float:
    """Hausdorff distance between two non-empty finite point sets."""
    pa = np.atleast_2d(np.asarray(a, dtype=float))
    pb = np.atleast_2d(np.asarray(b, dtype=float))
    if pa.size == 0 or pb.size == 0:
        raise ValueError("hausdorff is undefined for empty point sets")
    # pairwise distances, chunked so large sets stay memory-bounded
    d_ab = 0.0
    d_ba_min = np.full(pb.shape[0], np.inf)
    chunk = 4096
    for i in range(0, pa.shape[0], chunk):
        block = pa[i : i + chunk]
        d = np.sqrt(
            ((block[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2)
        )
        d_ab = max(d_ab, float(d.min(axis=1).max()))
        d_ba_min = np.minimum(d_ba_min, d.min(axis=0))
    return max(d_ab, float(d_ba_min.max()))
