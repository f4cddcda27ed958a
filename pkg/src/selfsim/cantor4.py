"""Specializations for the planar 4-corner Cantor sets.

Contains the two explicit graph-friendly subfamilies of the 4-corner
system (a recursively defined family and a last-letter-restricted family),
their closed-form frame angles, slope bounds and similarity dimensions, the
corner-square family with extra squares along the bottom edge, the diagonal
projection functional used for the length computation of the 4-corner set,
and the generation-based length bracket.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError, ResourceCapError
from .geometry import (
    Angle,
    ConvexPolygon,
    IntervalUnion,
    Point,
    clip_convex,
    hull_of_points,
    project,
)
from .ifs import DEFAULT_PIECE_CAP, Ifs, SimilarityMap, Word, compose, generation

UNIT_SQUARE = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))

FULL_PROJECTION_ANGLE = math.atan(0.5)
"""The angle whose projection of every generation of the 4-corner set is a
full interval of length 3/sqrt(5)."""


def c4_ifs() -> Ifs:
    """The 4-corner system: four maps of ratio 1/4 onto the unit square's
    corner cells. Map order: bottom-left, top-left, bottom-right, top-right."""
    q = 0.75
    return Ifs(
        (
            SimilarityMap(0.25, 0.0, (0.0, 0.0)),
            SimilarityMap(0.25, 0.0, (0.0, q)),
            SimilarityMap(0.25, 0.0, (q, 0.0)),
            SimilarityMap(0.25, 0.0, (q, q)),
        ),
        osc=True,
    )


def ck_ifs(k: int) -> Ifs:
    """The k-square system: k maps of ratio 1/k placing squares at the four
    corners of the unit square plus k - 4 squares evenly spaced along the
    bottom edge (so the bottom row holds k - 2 squares in total)."""
    if k < 4:
        raise PreconditionError("the corner-square family needs k >= 4")
    step = (1.0 - 1.0 / k) / (k - 3)
    maps = [SimilarityMap(1.0 / k, 0.0, (j * step, 0.0)) for j in range(k - 2)]
    maps.append(SimilarityMap(1.0 / k, 0.0, (0.0, 1.0 - 1.0 / k)))
    maps.append(SimilarityMap(1.0 / k, 0.0, (1.0 - 1.0 / k, 1.0 - 1.0 / k)))
    return Ifs(tuple(maps), osc=True)


# ---------------------------------------------------------------------------
# the recursively defined subfamily
# ---------------------------------------------------------------------------


def _adhoc_words(m: int) -> tuple[Word, ...]:
    words: list[Word] = [(1,), (2,), (4,)]
    for depth in range(1, m):
        words.extend(
            (3,) + mid + (last,)
            for mid in itertools.product((1, 3), repeat=depth - 1)
            for last in (2, 4)
        )
    return tuple(sorted(words))


def _adhoc_sim_dim(m: int, tol: float = 1e-12) -> float:
    """Root of 2 * 4^(-s) + 4^(-s) * sum_{k=0}^{m-1} (2 * 4^(-s))^k = 1."""

    def f(s: float) -> float:
        x = 4.0**-s
        return 2.0 * x + x * sum((2.0 * x) ** k for k in range(m)) - 1.0

    lo, hi = 1e-9, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def adhoc_theta(m: int) -> float:
    """Closed-form frame angle of the recursive subfamily."""
    q = 4.0**m
    root = math.sqrt(1.0 - 24.0 / (5.0 * q) + 36.0 / (5.0 * q * q))
    tan_theta = (-3.0 + 12.0 / q + 5.0 * root) / (4.0 - 6.0 / q)
    return math.atan(tan_theta)


def adhoc_lambda(m: int) -> float:
    """Closed-form slope bound of the recursive subfamily."""
    q = 4.0**m
    root = math.sqrt(1.0 - 24.0 / (5.0 * q) + 36.0 / (5.0 * q * q))
    return (5.0 * q / 6.0) * (1.0 + root - 12.0 / (5.0 * q))


@dataclass(frozen=True)
class AdHocFamily:
    """The recursive subfamily at depth m: 2^m + 1 words in increasing
    lexicographic order, with its frame angle, slope bound, and similarity
    dimension."""

    m: int
    words: tuple[Word, ...]
    theta_m: float
    lambda_m: float
    s_m: float


def adhoc_family(m: int) -> AdHocFamily:
    if m < 1:
        raise PreconditionError("family depth must be >= 1")
    return AdHocFamily(
        m=m,
        words=_adhoc_words(m),
        theta_m=adhoc_theta(m),
        lambda_m=adhoc_lambda(m),
        s_m=_adhoc_sim_dim(m),
    )


# ---------------------------------------------------------------------------
# the last-letter-restricted subfamily
# ---------------------------------------------------------------------------


def generic_theta(m: int) -> float:
    q = 4.0**m
    return 0.5 * math.pi - 0.5 * (
        math.atan(2.0 + 12.0 / q) + math.atan(2.0 - 6.0 / q)
    )


def generic_lambda(m: int) -> float:
    x = (5.0 / 18.0) * 4.0**m + 2.0 / 3.0 - 4.0 ** (1 - m)
    return x + math.sqrt(x * x + 1.0)


@dataclass(frozen=True)
class GenericFamily:
    """All length-m words over the four maps whose last letter points at a
    bottom square (2^(2m-1) words), with closed-form constants and exact
    similarity dimension 1 - 1/(2m)."""

    m: int
    words: tuple[Word, ...]
    theta_m: float
    lambda_m: float
    s_m: float


def generic_family(m: int) -> GenericFamily:
    if m < 1:
        raise PreconditionError("family depth must be >= 1")
    words = tuple(
        sorted(
            prefix + (last,)
            for prefix in itertools.product((1, 2, 3, 4), repeat=m - 1)
            for last in (1, 3)
        )
    )
    return GenericFamily(
        m=m,
        words=words,
        theta_m=generic_theta(m),
        lambda_m=generic_lambda(m),
        s_m=1.0 - 1.0 / (2.0 * m),
    )


def family_levels(
    words: Sequence[Word],
    depth: int,
    seed: ConvexPolygon = UNIT_SQUARE,
    cap: int = DEFAULT_PIECE_CAP,
) -> list[list[ConvexPolygon]]:
    """Levels 1..depth of the nested family generated by the given words of
    the 4-corner system: level n+1 applies every family word to level n.

    Within a level, pieces appear in lexicographic order of the concatenated
    words (no family word is a prefix of another, so applying the outer
    words in sorted order preserves the order)."""
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    ifs = c4_ifs()
    base = [compose(ifs, w) for w in sorted(words)]
    if len(base) ** depth > cap:
        raise ResourceCapError(
            f"family level {depth} has {len(base) ** depth} pieces (cap {cap})"
        )
    levels: list[list[ConvexPolygon]] = []
    current = base
    for n in range(depth):
        levels.append([m.apply_polygon(seed) for m in current])
        if n < depth - 1:
            current = [f.after(g) for f in base for g in current]
    return levels


# ---------------------------------------------------------------------------
# dimension-bound fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimDimBoundRow:
    m: int
    s_m: float
    scaled_gap: float  # 2^m * (1 - s_m)


def simdim_bound_check(m_range: Sequence[int]) -> tuple[list[SimDimBoundRow], float, bool]:
    """Fit the constant in the dimension lower bound s_m >= 1 - c / 2^m for
    the recursive subfamily: rows of 2^m * (1 - s_m), the fitted
    c = max over the range, and whether consecutive fits are stable
    (ratios within [0.5, 2])."""
    rows = []
    for m in m_range:
        s = _adhoc_sim_dim(m)
        rows.append(SimDimBoundRow(m=m, s_m=s, scaled_gap=(2.0**m) * (1.0 - s)))
    fitted = max(r.scaled_gap for r in rows)
    stable = all(
        0.5 <= r2.scaled_gap / r1.scaled_gap <= 2.0
        for r1, r2 in zip(rows, rows[1:])
    )
    return rows, fitted, stable


# ---------------------------------------------------------------------------
# diagonal projection functional
# ---------------------------------------------------------------------------

_DIAG = math.pi / 4.0
_ANTI = 3.0 * math.pi / 4.0


@dataclass(frozen=True)
class DaviesRect:
    """A rectangle with sides parallel to the diagonals y = x and y = -x,
    given by its center and half-widths along the two diagonal directions."""

    center: Point
    half_diag: float
    half_anti: float

    def __post_init__(self) -> None:
        if self.half_diag < 0 or self.half_anti < 0:
            raise PreconditionError("half-widths must be nonnegative")

    def to_polygon(self) -> ConvexPolygon:
        s = math.sqrt(0.5)
        u = (s * self.half_diag, s * self.half_diag)
        v = (-s * self.half_anti, s * self.half_anti)
        cx, cy = self.center
        corners = [
            (cx + su * u[0] + sv * v[0], cy + su * u[1] + sv * v[1])
            for su in (-1.0, 1.0)
            for sv in (-1.0, 1.0)
        ]
        return hull_of_points(corners)


def davies_m(e: DaviesRect | ConvexPolygon) -> tuple[float, float, float]:
    """Diagonal projection diameters (onto the lines y = x and y = -x) and
    their mean."""
    poly = e.to_polygon() if isinstance(e, DaviesRect) else e
    lo, hi = project(poly, _DIAG)
    m_plus = hi - lo
    lo, hi = project(poly, _ANTI)
    m_minus = hi - lo
    return m_plus, m_minus, 0.5 * (m_plus + m_minus)


def corner_grandchildren(origin: Point = (0.0, 0.0), side: float = 1.0) -> list[ConvexPolygon]:
    """The four corner squares of side ``side / 4`` inside the axis-aligned
    square at ``origin`` with the given side."""
    s = side / 4.0
    ox, oy = origin
    out = []
    for dx in (0.0, side - s):
        for dy in (0.0, side - s):
            x0, y0 = ox + dx, oy + dy
            out.append(
                ConvexPolygon(((x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)))
            )
    return out


@dataclass(frozen=True)
class DaviesCheck:
    passed: bool
    lhs: float
    rhs: float
    margin: float


def davies_inequality_check(
    e: DaviesRect, origin: Point = (0.0, 0.0), side: float = 1.0
) -> DaviesCheck:
    """Superadditivity of the diagonal functional over the corner cells:
    m(E) >= sum of m(E ∩ Q_i) over the four corner squares of side/4.

    The intersections are computed exactly (convex clipping); using the true
    intersections rather than any enlargement makes the right-hand side no
    larger, so the check is conservative."""
    poly = e.to_polygon()
    lhs = davies_m(poly)[2]
    rhs = 0.0
    if len(poly.vertices) >= 3:
        for cell in corner_grandchildren(origin, side):
            inter = clip_convex(poly, cell)
            if inter:
                piece = hull_of_points(inter)
                rhs += davies_m(piece)[2]
    margin = lhs - rhs
    return DaviesCheck(passed=margin >= -1e-9, lhs=lhs, rhs=rhs, margin=margin)


def c4_measure_bracket(n: int, cap: int = DEFAULT_PIECE_CAP) -> tuple[float, float]:
    """Length bracket for the 4-corner set from generation n: the lower end
    is the measure of the projection at the full-projection angle
    (3/sqrt(5), independent of n) and the upper end is the sum of piece
    diameters over the generation cover (sqrt(2), independent of n)."""
    if n < 1:
        raise PreconditionError("bracket needs n >= 1")
    gen = generation(c4_ifs(), UNIT_SQUARE, n, cap=cap)
    # all pieces share one diameter, so multiply instead of summing: this
    # avoids accumulating 4^n rounding errors in an exact quantity
    upper = len(gen.pieces) * gen.polygons[0].diameter()
    theta = Angle(FULL_PROJECTION_ANGLE)
    union = IntervalUnion(tuple(project(p, theta) for p in gen.polygons))
    return union.length, upper
