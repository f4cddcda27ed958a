"""Piecewise-linear graph construction over nested families of convex pieces.

Given levels E_1 ⊇ E_2 ⊇ ... of finite unions of convex pieces whose
frame-aligned slopes and diameters are controlled, this module builds, in a
rotated orthonormal frame, piecewise-linear functions g_n interpolating the
pieces of level n, checks the geometric Cauchy estimates between levels,
and reports the measured Lipschitz constant together with a certified tail
bound for the distance to the limit function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisError, PreconditionError
from .geometry import TOL, Angle, ConvexPolygon, Point

_SAMPLES = 1000


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame at angle theta: abscissa axis (cos, sin) and
    ordinate axis (-sin, cos)."""

    theta: Angle

    @property
    def axis_x(self) -> Point:
        return (math.cos(self.theta.theta), math.sin(self.theta.theta))

    @property
    def axis_y(self) -> Point:
        return (-math.sin(self.theta.theta), math.cos(self.theta.theta))

    def to_frame(self, p: Point) -> Point:
        ax, ay = self.axis_x
        bx, by = self.axis_y
        return (p[0] * ax + p[1] * ay, p[0] * bx + p[1] * by)

    def from_frame(self, q: Point) -> Point:
        ax, ay = self.axis_x
        bx, by = self.axis_y
        return (q[0] * ax + q[1] * bx, q[0] * ay + q[1] * by)


@dataclass(frozen=True)
class GraphHypotheses:
    """Fitted constants: slope bound lam, diameter envelope c * sigma^n."""

    lam: float
    c: float
    sigma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 1.0:
            raise PreconditionError("sigma must lie in (0, 1)")
        if self.lam <= 0 or self.c <= 0:
            raise PreconditionError("lam and c must be positive")


@dataclass(frozen=True)
class PLGraph:
    """A continuous piecewise-linear function in frame coordinates, extended
    by constants outside its breakpoint range, over a domain interval."""

    frame: Frame
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    domain: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys) or len(self.xs) < 1:
            raise PreconditionError("breakpoints and values must align and be nonempty")
        for a, b in zip(self.xs, self.xs[1:]):
            if b < a:
                raise PreconditionError("breakpoints must be sorted")

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def lipschitz(self) -> float:
        best = 0.0
        for (x0, y0), (x1, y1) in zip(zip(self.xs, self.ys), zip(self.xs[1:], self.ys[1:])):
            dx = x1 - x0
            if dx > 1e-15:
                best = max(best, abs(y1 - y0) / dx)
        return best

    def world_polyline(self) -> list[Point]:
        a, b = self.domain
        xs = [a] + [x for x in self.xs if a < x < b] + [b]
        return [self.frame.from_frame((x, float(self(x)))) for x in xs]


def _extreme_ordinates(poly: ConvexPolygon, frame: Frame) -> tuple[float, float, float, float]:
    """(x_left, y_left, x_right, y_right) of a piece in frame coordinates.

    When the extreme abscissa is attained along an edge, the ordinate is the
    midpoint of that edge (a deterministic choice among valid support
    points)."""
    pts = [frame.to_frame(v) for v in poly.vertices]
    xs = [p[0] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    edge_tol = max(1e-12, 1e-12 * (abs(x_lo) + abs(x_hi)))
    lo_ys = [p[1] for p in pts if p[0] <= x_lo + edge_tol]
    hi_ys = [p[1] for p in pts if p[0] >= x_hi - edge_tol]
    y_lo = 0.5 * (min(lo_ys) + max(lo_ys))
    y_hi = 0.5 * (min(hi_ys) + max(hi_ys))
    return x_lo, y_lo, x_hi, y_hi


def _piece_records(
    pieces: Sequence[ConvexPolygon], frame: Frame
) -> list[tuple[float, float, float, float]]:
    recs = sorted(_extreme_ordinates(p, frame) for p in pieces)
    for (x0l, _, x0r, _), (x1l, _, _, _) in zip(recs, recs[1:]):
        if x1l < x0r - TOL:
            raise HypothesisError(
                f"pieces have overlapping frame-x intervals near x = {x1l:.6g}"
            )
    return recs


def verify_hypotheses(
    levels: Sequence[Sequence[ConvexPolygon]], frame: Frame
) -> GraphHypotheses:
    """Fit the slope bound and the diameter envelope from the given levels.

    The slope bound is the maximum of each piece's frame height/width ratio
    and of the chord slopes between the right support point of each piece
    and the left support point of its successor (testing those two extreme
    points suffices). The envelope constants come from per-level maximum
    diameters: sigma is the worst consecutive ratio and c = max D_n / sigma^n.

    Raises: a piece of zero frame-width (vertical piece), a vertical
    connector, non-nested levels, or non-shrinking diameters.
    """
    if not levels or any(not lv for lv in levels):
        raise PreconditionError("every level must be a nonempty piece list")
    lam = 0.0
    for level in levels:
        recs = _piece_records(level, frame)
        for poly in level:
            pts = [frame.to_frame(v) for v in poly.vertices]
            w = max(p[0] for p in pts) - min(p[0] for p in pts)
            h = max(p[1] for p in pts) - min(p[1] for p in pts)
            if w <= 1e-12:
                raise HypothesisError(
                    "piece has zero frame-width (vertical piece, infinite slope)"
                )
            lam = max(lam, h / w)
        for (_, _, xr, yr), (xl, yl, _, _) in zip(recs, recs[1:]):
            dx = xl - xr
            dy = abs(yl - yr)
            if dx <= TOL:
                if dy > TOL:
                    raise HypothesisError(
                        "adjacent pieces abut in frame-x with a jump in frame-y "
                        "(vertical connector, infinite slope)"
                    )
                continue
            lam = max(lam, dy / dx)

    _check_nested(levels)

    diams = [max(p.diameter() for p in lv) for lv in levels]
    if len(diams) == 1:
        # single-level fallback: sigma = 1/2 and c = 2 * D_1 (envelope
        # passes through the one observed level)
        return GraphHypotheses(lam=lam, c=2.0 * diams[0], sigma=0.5)
    sigma = max(d2 / d1 for d1, d2 in zip(diams, diams[1:]))
    if sigma >= 1.0:
        raise HypothesisError("level diameters do not shrink (sigma >= 1)")
    c = max(d / sigma ** (n + 1) for n, d in enumerate(diams))
    return GraphHypotheses(lam=lam, c=c, sigma=sigma)


def _check_nested(levels: Sequence[Sequence[ConvexPolygon]]) -> None:
    for k in range(len(levels) - 1):
        parents = levels[k]
        children = levels[k + 1]
        boxes = np.asarray([p.bbox() for p in parents])
        for child in children:
            cb = child.bbox()
            cand = np.nonzero(
                (boxes[:, 0] <= cb[0] + TOL)
                & (boxes[:, 1] <= cb[1] + TOL)
                & (boxes[:, 2] >= cb[2] - TOL)
                & (boxes[:, 3] >= cb[3] - TOL)
            )[0]
            if not any(
                all(parents[i].contains_point(v) for v in child.vertices)
                for i in cand
            ):
                raise HypothesisError(
                    f"levels are not nested: a level-{k + 2} piece is not "
                    f"contained in any level-{k + 1} piece"
                )


def build_level(
    pieces: Sequence[ConvexPolygon],
    frame: Frame,
    domain: tuple[float, float],
) -> PLGraph:
    """The piecewise-linear interpolant of one level.

    Over each piece's frame-x interval the function interpolates the left
    and right support ordinates; between consecutive pieces it follows the
    connecting chord; before the first piece and after the last it is
    constant. Pieces abutting in frame-x share a breakpoint (their support
    ordinates must agree); overlapping frame-x intervals are an error.
    """
    if not pieces:
        raise PreconditionError("cannot build a level from zero pieces")
    a, b = domain
    recs = _piece_records(pieces, frame)
    if recs[0][0] < a - TOL or recs[-1][2] > b + TOL:
        raise PreconditionError("domain does not cover the pieces")

    xs: list[float] = []
    ys: list[float] = []

    def push(x: float, y: float) -> None:
        if xs and abs(x - xs[-1]) <= 1e-12:
            if abs(y - ys[-1]) > TOL:
                raise HypothesisError(
                    f"abutting pieces disagree at x = {x:.6g}: "
                    f"{ys[-1]:.6g} vs {y:.6g} (discontinuity)"
                )
            return
        xs.append(x)
        ys.append(y)

    if a < recs[0][0] - TOL:
        push(a, recs[0][1])
    for x_l, y_l, x_r, y_r in recs:
        push(x_l, y_l)
        push(x_r, y_r)
    if b > recs[-1][2] + TOL:
        push(b, recs[-1][3])
    return PLGraph(frame=frame, xs=tuple(xs), ys=tuple(ys), domain=(a, b))


@dataclass(frozen=True)
class GraphRun:
    """Result of the full multi-level construction."""

    graphs: tuple[PLGraph, ...]
    sup_diffs: tuple[float, ...]
    measured_lipschitz: float
    tail_bound: float

    @property
    def deepest(self) -> PLGraph:
        return self.graphs[-1]


def sup_difference(g1: PLGraph, g2: PLGraph) -> float:
    """Exact sup-norm distance of two piecewise-linear functions over their
    common domain: evaluated at the union of breakpoints (where the sup of a
    PL difference is attained) plus uniform guard samples."""
    a = max(g1.domain[0], g2.domain[0])
    b = min(g1.domain[1], g2.domain[1])
    knots = np.asarray(
        sorted({a, b}.union(x for x in g1.xs + g2.xs if a <= x <= b))
    )
    samples = np.linspace(a, b, _SAMPLES)
    grid = np.concatenate([knots, samples])
    return float(np.max(np.abs(g1(grid) - g2(grid))))


def build_graph(
    levels: Sequence[Sequence[ConvexPolygon]],
    frame: Frame,
    hypotheses: GraphHypotheses,
    domain: tuple[float, float] | None = None,
) -> GraphRun:
    """Build g_n for every level and certify the geometric Cauchy estimate
    sup |g_{n+1} - g_n| <= c * sigma^n between consecutive levels.

    The default domain is the frame-x projection of the convex hull of the
    first level. The returned tail bound c * sigma^L / (1 - sigma) is the
    certified sup-distance from the deepest function to the limit.
    """
    if domain is None:
        pts = [frame.to_frame(v) for p in levels[0] for v in p.vertices]
        xs = [p[0] for p in pts]
        domain = (min(xs), max(xs))
    graphs = tuple(build_level(lv, frame, domain) for lv in levels)
    diffs = []
    for n, (g1, g2) in enumerate(zip(graphs, graphs[1:]), start=1):
        d = sup_difference(g1, g2)
        bound = hypotheses.c * hypotheses.sigma**n
        if d > bound + TOL:
            raise HypothesisError(
                f"Cauchy estimate violated between levels {n} and {n + 1}: "
                f"sup diff {d:.6g} > c * sigma^n = {bound:.6g}"
            )
        diffs.append(d)
    tail = hypotheses.c * hypotheses.sigma ** len(graphs) / (1.0 - hypotheses.sigma)
    return GraphRun(
        graphs=graphs,
        sup_diffs=tuple(diffs),
        measured_lipschitz=graphs[-1].lipschitz(),
        tail_bound=tail,
    )


@dataclass(frozen=True)
class ContainmentReport:
    passed: bool
    max_distance: float
    radius: float
    witness: Point | None


def containment_check(
    pieces: Sequence[ConvexPolygon], graph: PLGraph, radius: float
) -> ContainmentReport:
    """Check that every piece vertex lies within the stated frame-vertical
    distance of the graph."""
    worst = 0.0
    witness: Point | None = None
    for poly in pieces:
        for v in poly.vertices:
            x, y = graph.frame.to_frame(v)
            d = abs(y - float(graph(x)))
            if d > worst:
                worst = d
                witness = v
    return ContainmentReport(
        passed=worst <= radius + TOL,
        max_distance=worst,
        radius=radius,
        witness=witness,
    )
