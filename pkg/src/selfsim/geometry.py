"""Exact planar primitives.

Convex polygons, directional projections, unions of closed intervals,
minimum directional width, and the greedy separated-interval extraction.
All types are immutable values; all operations are pure.

Numeric conventions: a geometric tolerance of ``TOL = 1e-9`` guards
separation/containment/degeneracy comparisons, and a merge tolerance of
``MERGE_TOL = 1e-12`` decides when abutting intervals coalesce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import PreconditionError

TOL = 1e-9
MERGE_TOL = 1e-12

Point = tuple[float, float]
Interval = tuple[float, float]


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Angle:
    """A direction angle reduced modulo pi, in [0, pi)."""

    theta: float

    def __post_init__(self) -> None:
        reduced = self.theta % math.pi
        if reduced >= math.pi:  # float wrap-around at the right endpoint
            reduced = 0.0
        object.__setattr__(self, "theta", reduced)

    def direction(self) -> Point:
        return (math.cos(self.theta), math.sin(self.theta))


# ---------------------------------------------------------------------------
# convex polygons
# ---------------------------------------------------------------------------


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon:
    """A convex polygon as a counter-clockwise vertex tuple.

    Degenerate polygons (a point or a segment) are allowed and flagged via
    :attr:`is_degenerate`; they arise as hulls of collinear point sets.
    """

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise PreconditionError("a polygon needs at least one vertex")
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n >= 3:
            for i in range(n):
                c = _cross(verts[i], verts[(i + 1) % n], verts[(i + 2) % n])
                if c < -1e-12:
                    raise PreconditionError(
                        f"vertices are not in convex counter-clockwise order "
                        f"(cross product {c:.3e} at index {i})"
                    )

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3 or self.area() <= TOL * self.diameter() ** 2

    def area(self) -> float:
        verts = self.vertices
        n = len(verts)
        if n < 3:
            return 0.0
        s = 0.0
        for i in range(n):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % n]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    def diameter(self) -> float:
        verts = self.vertices
        best = 0.0
        for i in range(len(verts)):
            xi, yi = verts[i]
            for j in range(i + 1, len(verts)):
                xj, yj = verts[j]
                d = math.hypot(xi - xj, yi - yj)
                if d > best:
                    best = d
        return best

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def contains_point(self, p: Point, tol: float = TOL) -> bool:
        """Signed-distance test: ``p`` lies inside or within ``tol`` of the
        boundary."""
        verts = self.vertices
        n = len(verts)
        if n == 1:
            return math.hypot(p[0] - verts[0][0], p[1] - verts[0][1]) <= tol
        if n == 2:
            return _point_segment_distance(p, verts[0], verts[1]) <= tol
        for i in range(n):
            a = verts[i]
            b = verts[(i + 1) % n]
            ex, ey = b[0] - a[0], b[1] - a[1]
            elen = math.hypot(ex, ey)
            if elen <= MERGE_TOL:
                continue
            # signed distance of p to edge line; >= 0 means inside for CCW
            sd = ((p[0] - a[0]) * ey - (p[1] - a[1]) * ex) / elen
            if sd > tol:
                return False
        return True


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom <= MERGE_TOL * MERGE_TOL:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def hull_of_points(points: Iterable[Point]) -> ConvexPolygon:
    """Convex hull via the monotone chain, counter-clockwise, with duplicate
    and collinear interior points removed.

    Collinear input collapses to a degenerate one- or two-vertex polygon.
    """
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if not pts:
        raise PreconditionError("hull_of_points needs at least one point")
    if len(pts) == 1:
        return ConvexPolygon((pts[0],))

    def half(points_: Sequence[Point]) -> list[Point]:
        chain: list[Point] = []
        for p in points_:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 1e-15:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # collinear set: keep the two extreme points (or one if coincident)
        return ConvexPolygon((pts[0], pts[-1]) if pts[0] != pts[-1] else (pts[0],))
    return ConvexPolygon(tuple(hull))


# ---------------------------------------------------------------------------
# projections and widths
# ---------------------------------------------------------------------------


def project(poly: ConvexPolygon, theta: Angle | float) -> Interval:
    """Orthogonal projection of a convex polygon onto the line of direction
    ``theta``: the closed interval of v . (cos theta, sin theta) over the
    vertices."""
    t = theta.theta if isinstance(theta, Angle) else float(theta)
    c, s = math.cos(t), math.sin(t)
    vals = [x * c + y * s for x, y in poly.vertices]
    return (min(vals), max(vals))


def width(poly: ConvexPolygon, theta: Angle | float) -> float:
    lo, hi = project(poly, theta)
    return hi - lo


def min_width(poly: ConvexPolygon) -> float:
    """Exact minimum directional width of a convex polygon.

    The minimum over all directions is attained at an edge normal, so it is
    computed over the finite set of edge-normal angles. Degenerate polygons
    return 0.
    """
    verts = poly.vertices
    n = len(verts)
    if n < 3:
        return 0.0
    best = math.inf
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        elen = math.hypot(ex, ey)
        if elen <= MERGE_TOL:
            continue
        # distance of the farthest vertex from the edge's supporting line
        w = max(abs((x - ax) * ey - (y - ay) * ex) / elen for x, y in verts)
        if w < best:
            best = w
    return 0.0 if best is math.inf else best


# ---------------------------------------------------------------------------
# interval unions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of closed intervals, kept sorted and merged.

    Intervals whose closures overlap or abut (within ``MERGE_TOL``) are
    coalesced at construction.
    """

    intervals: tuple[Interval, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "intervals", _normalize_intervals(self.intervals)
        )

    @property
    def length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def inflate(self, delta: float) -> "IntervalUnion":
        if delta < 0:
            raise PreconditionError("inflation radius must be nonnegative")
        return IntervalUnion(tuple((a - delta, b + delta) for a, b in self.intervals))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)


def _normalize_intervals(items: Iterable[Interval]) -> tuple[Interval, ...]:
    cleaned: list[Interval] = []
    for a, b in items:
        a, b = float(a), float(b)
        if b < a:
            raise PreconditionError(f"interval [{a}, {b}] has negative length")
        cleaned.append((a, b))
    cleaned.sort()
    merged: list[list[float]] = []
    for a, b in cleaned:
        if merged and a <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def union_length(u: IntervalUnion) -> float:
    """Lebesgue measure of the union (the sum of merged component lengths)."""
    return u.length


# ---------------------------------------------------------------------------
# greedy separated-interval extraction
# ---------------------------------------------------------------------------


def interval_gap(i: Interval, j: Interval) -> float:
    """Distance between two closed intervals (0 if they intersect)."""
    return max(i[0] - j[1], j[0] - i[1], 0.0)


def vitali_extract_indices(
    intervals: Sequence[Interval], eps: float, delta: float
) -> list[int]:
    """Indices (into ``intervals``) of the greedy eps-separated subfamily.

    Greedy order: largest length first, ties broken by smaller left endpoint.
    A candidate is rejected when its gap to any already-selected interval is
    at most ``eps``; with ``eps = 0`` this keeps a subfamily of pairwise
    disjoint closed intervals. Every input interval must have length at
    least ``delta``.
    """
    if eps < 0:
        raise PreconditionError("eps must be nonnegative")
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    items = [(float(a), float(b)) for a, b in intervals]
    for a, b in items:
        if b - a < delta - MERGE_TOL:
            raise PreconditionError(
                f"interval [{a}, {b}] has length {b - a:.6g} < delta = {delta:.6g}"
            )
    order = sorted(range(len(items)), key=lambda i: (items[i][0] - items[i][1], items[i][0]))
    selected: list[int] = []
    for i in order:
        if all(interval_gap(items[i], items[j]) > eps + MERGE_TOL for j in selected):
            selected.append(i)
    selected.sort()
    return selected


def vitali_extract(
    intervals: Sequence[Interval], eps: float, delta: float
) -> list[Interval]:
    """The greedy eps-separated subfamily itself (see
    :func:`vitali_extract_indices`). Every input interval is contained in the
    concentric (3 + eps/delta)-dilation of some returned interval whenever
    all lengths are at least ``2 * delta``; see :func:`covers_concentric`."""
    items = [(float(a), float(b)) for a, b in intervals]
    return [items[i] for i in vitali_extract_indices(items, eps, delta)]


def covers_concentric(inner: Interval, outer: Interval, factor: float) -> bool:
    """Whether ``inner`` lies inside the concentric ``factor``-dilation of
    ``outer`` (up to ``TOL``)."""
    c = 0.5 * (outer[0] + outer[1])
    h = 0.5 * (outer[1] - outer[0]) * factor
    return inner[0] >= c - h - TOL and inner[1] <= c + h + TOL


# ---------------------------------------------------------------------------
# convex clipping (used for overlap detection and intersection functionals)
# ---------------------------------------------------------------------------


def clip_convex(subject: ConvexPolygon, clip: ConvexPolygon) -> list[Point]:
    """Sutherland-Hodgman clip of one convex polygon by another.

    Returns the vertex list of the intersection region (possibly fewer than
    three points when the intersection is degenerate or empty). ``clip``
    must be non-degenerate.
    """
    if len(clip.vertices) < 3:
        raise PreconditionError("clip polygon must be non-degenerate")
    output: list[Point] = list(subject.vertices)
    cverts = clip.vertices
    n = len(cverts)
    for i in range(n):
        if not output:
            return []
        a = cverts[i]
        b = cverts[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        inputs = output
        output = []

        def inside(p: Point) -> bool:
            return (p[0] - a[0]) * ey - (p[1] - a[1]) * ex <= 1e-15

        def intersect(p: Point, q: Point) -> Point:
            dx, dy = q[0] - p[0], q[1] - p[1]
            denom = dx * ey - dy * ex
            if abs(denom) <= 1e-30:
                return q
            t = ((a[0] - p[0]) * ey - (a[1] - p[1]) * ex) / denom
            return (p[0] + t * dx, p[1] + t * dy)

        for k in range(len(inputs)):
            cur = inputs[k]
            nxt = inputs[(k + 1) % len(inputs)]
            if inside(cur):
                output.append(cur)
                if not inside(nxt):
                    output.append(intersect(cur, nxt))
            elif inside(nxt):
                output.append(intersect(cur, nxt))
    return output


def polygon_area(points: Sequence[Point]) -> float:
    n = len(points)
    if n < 3:
        return 0.0
    s = 0.0
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * abs(s)
