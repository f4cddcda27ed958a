"""Planar similarity maps and iterated function systems.

A similarity map is x -> r * R(angle) * x + z with contraction ratio
r in (0, 1). An IFS is a finite family of such maps; its generations are
the unions of the images of a seed set under all words of a given length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import PreconditionError, ResourceCapError
from .geometry import (
    TOL,
    ConvexPolygon,
    Point,
    clip_convex,
    hull_of_points,
    polygon_area,
)

TWO_PI = 2.0 * math.pi
DEFAULT_PIECE_CAP = 10**7

Word = tuple[int, ...]
"""A composition word: a tuple of 1-based map indices."""


@dataclass(frozen=True)
class SimilarityMap:
    """An orientation-preserving planar similarity x -> r * R(rotation) * x + z."""

    r: float
    rotation: float
    z: Point

    def __post_init__(self) -> None:
        if not 0.0 < self.r < 1.0:
            raise PreconditionError(f"scale must lie in (0, 1), got {self.r}")
        object.__setattr__(self, "rotation", float(self.rotation) % TWO_PI)
        object.__setattr__(self, "z", (float(self.z[0]), float(self.z[1])))

    def apply(self, p: Point) -> Point:
        c = math.cos(self.rotation)
        s = math.sin(self.rotation)
        x, y = p
        return (
            self.r * (c * x - s * y) + self.z[0],
            self.r * (s * x + c * y) + self.z[1],
        )

    def apply_polygon(self, poly: ConvexPolygon) -> ConvexPolygon:
        # an orientation-preserving similarity keeps CCW order
        return ConvexPolygon(tuple(self.apply(v) for v in poly.vertices))

    def after(self, inner: "SimilarityMap") -> "SimilarityMap":
        """The composition self o inner."""
        return SimilarityMap(
            r=self.r * inner.r,
            rotation=self.rotation + inner.rotation,
            z=self.apply(inner.z),
        )

    def fixed_point(self) -> Point:
        """The unique solution of x = r * R * x + z (a 2x2 linear solve)."""
        c = self.r * math.cos(self.rotation)
        s = self.r * math.sin(self.rotation)
        # (I - rR) x = z with I - rR = [[1-c, s], [-s, 1-c]]
        det = (1.0 - c) ** 2 + s * s
        zx, zy = self.z
        return (((1.0 - c) * zx - s * zy) / det, (s * zx + (1.0 - c) * zy) / det)

    def is_rotation_free(self, tol: float = 1e-12) -> bool:
        rot = self.rotation % TWO_PI
        return min(rot, TWO_PI - rot) <= tol


def similarity_dimension(scales: Sequence[float], tol: float = 1e-12) -> float:
    """The unique s >= 0 with sum(r_j ** s) = 1, by bisection.

    The map s -> sum(r_j ** s) is strictly decreasing, so the root is unique.
    A single-map system has dimension 0.
    """
    scales = [float(r) for r in scales]
    if not scales:
        raise PreconditionError("need at least one scale")
    for r in scales:
        if not 0.0 < r < 1.0:
            raise PreconditionError(f"scales must lie in (0, 1), got {r}")
    if len(scales) == 1:
        return 0.0

    def f(s: float) -> float:
        return sum(r**s for r in scales) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol and abs(f(mid)) <= tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Ifs:
    """A finite family of similarity maps, sorted by scale (ascending)."""

    maps: tuple[SimilarityMap, ...]
    osc: bool = False
    """Declared open-set condition. Not verified algorithmically; the
    generation overlap index serves as a falsifier."""

    def __post_init__(self) -> None:
        if not self.maps:
            raise PreconditionError("an IFS needs at least one map")
        object.__setattr__(
            self, "maps", tuple(sorted(self.maps, key=lambda m: m.r))
        )

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def r_max(self) -> float:
        return self.maps[-1].r

    @property
    def similarity_dim(self) -> float:
        return similarity_dimension([m.r for m in self.maps])

    def is_rotation_free(self, tol: float = 1e-12) -> bool:
        return all(m.is_rotation_free(tol) for m in self.maps)


def compose(ifs: Ifs, word: Word) -> SimilarityMap:
    """The composition f_{w_1} o f_{w_2} o ... o f_{w_n}.

    The result has scale prod(r_{w_i}), rotation sum of rotations mod 2*pi,
    and the translation accumulated by applying outer maps to inner offsets.
    """
    if not word:
        raise PreconditionError("cannot compose the empty word (identity is not a contraction)")
    n = ifs.n_maps
    for j in word:
        if not 1 <= j <= n:
            raise PreconditionError(f"word index {j} outside 1..{n}")
    current = ifs.maps[word[0] - 1]
    for j in word[1:]:
        current = current.after(ifs.maps[j - 1])
    return current


def fixed_point(m: SimilarityMap) -> Point:
    return m.fixed_point()


def attractor_hull(
    ifs: Ifs, depth: int = 8, cap: int = DEFAULT_PIECE_CAP
) -> tuple[ConvexPolygon, float]:
    """Convex hull of the attractor, with a reported Hausdorff error bound.

    Rotation-free systems: the hull of the map fixed points, which is exact;
    the error bound is 0. Systems with rotations: the hull of the fixed
    points of all words of length 1..depth, with error bound
    diam(hull) * r_max ** depth.
    """
    if ifs.is_rotation_free():
        hull = hull_of_points([m.fixed_point() for m in ifs.maps])
        return hull, 0.0
    if depth < 1:
        raise PreconditionError("rotational hull approximation needs depth >= 1")
    total = sum(ifs.n_maps**k for k in range(1, depth + 1))
    if total > cap:
        raise ResourceCapError(
            f"hull approximation at depth {depth} needs {total} words (cap {cap})"
        )
    points: list[Point] = []
    level: list[SimilarityMap] = list(ifs.maps)
    for k in range(depth):
        points.extend(m.fixed_point() for m in level)
        if k < depth - 1:
            level = [m.after(f) for m in level for f in ifs.maps]
    hull = hull_of_points(points)
    return hull, hull.diameter() * ifs.r_max**depth


@dataclass(frozen=True)
class Generation:
    """All length-n images of a seed polygon, in lexicographic word order."""

    level: int
    pieces: tuple[tuple[Word, ConvexPolygon], ...]
    seed: ConvexPolygon

    @property
    def polygons(self) -> tuple[ConvexPolygon, ...]:
        return tuple(p for _, p in self.pieces)


@dataclass(frozen=True)
class GenerationReport:
    overlap_index: int
    nested: bool

    def __post_init__(self) -> None:
        if self.overlap_index < 1:
            raise PreconditionError("overlap index must be >= 1")


def generation(
    ifs: Ifs, seed: ConvexPolygon, n: int, cap: int = DEFAULT_PIECE_CAP
) -> Generation:
    """Level-n pieces, enumerated depth-first in lexicographic word order."""
    if n < 0:
        raise PreconditionError("generation level must be >= 0")
    if ifs.n_maps**n > cap:
        raise ResourceCapError(
            f"generation {n} has {ifs.n_maps ** n} pieces (cap {cap})"
        )
    if n == 0:
        return Generation(0, (((), seed),), seed)
    current: list[tuple[Word, SimilarityMap]] = [
        ((j,), ifs.maps[j - 1]) for j in range(1, ifs.n_maps + 1)
    ]
    for _ in range(n - 1):
        current = [
            (w + (j,), m.after(ifs.maps[j - 1]))
            for w, m in current
            for j in range(1, ifs.n_maps + 1)
        ]
    pieces = tuple((w, m.apply_polygon(seed)) for w, m in current)
    return Generation(n, pieces, seed)


def overlap_index(gen: Generation) -> GenerationReport:
    """Greedy upper bound on the interior-overlap chromatic index.

    Builds the graph of piece pairs with positive intersection area
    (tolerance-guarded), colors it greedily in piece order, and returns the
    color count. Exact (= 1) when no interiors overlap. Also reports whether
    every piece lies inside the seed.
    """
    polys = gen.polygons
    n = len(polys)
    boxes = [p.bbox() for p in polys]
    areas = [abs(p.area()) for p in polys]
    order = sorted(range(n), key=lambda i: boxes[i][0])
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for a_pos in range(n):
        i = order[a_pos]
        for b_pos in range(a_pos + 1, n):
            j = order[b_pos]
            if boxes[j][0] > boxes[i][2] + TOL:
                break
            if boxes[j][1] > boxes[i][3] + TOL or boxes[i][1] > boxes[j][3] + TOL:
                continue
            small = min(areas[i], areas[j])
            area_tol = max(1e-18, 1e-9 * small)
            if len(polys[i].vertices) < 3 or len(polys[j].vertices) < 3:
                continue
            inter = clip_convex(polys[i], polys[j])
            if polygon_area(inter) > area_tol:
                adjacency[i].add(j)
                adjacency[j].add(i)
    colors: dict[int, int] = {}
    for i in range(n):
        used = {colors[j] for j in adjacency[i] if j in colors}
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    omega = 1 + max(colors.values()) if colors else 1
    nested = all(
        all(gen.seed.contains_point(v) for v in p.vertices) for p in polys
    )
    return GenerationReport(overlap_index=omega, nested=nested)


@dataclass(frozen=True)
class LineSlice:
    """The sub-IFS of maps leaving a given line invariant, with the
    similarity dimension of the slice attractor."""

    indices: tuple[int, ...]
    maps: tuple[SimilarityMap, ...]
    dimension: float
    is_empty: bool


def line_invariant_subifs(
    ifs: Ifs, line_angle: float, line_offset: float, tol: float = TOL
) -> LineSlice:
    """Maps g of the IFS with g(L) inside L for the line L at angle
    ``line_angle`` through signed normal offset ``line_offset``.

    A similarity keeps a line invariant exactly when its rotation is 0 or pi
    (so the direction is preserved up to sign) and it maps one point of the
    line back onto the line.
    """
    nx, ny = -math.sin(line_angle), math.cos(line_angle)
    base = (line_offset * nx, line_offset * ny)
    picked: list[int] = []
    for idx, m in enumerate(ifs.maps, start=1):
        rot = m.rotation % math.pi
        if min(rot, math.pi - rot) > tol:
            continue
        q = m.apply(base)
        if abs(q[0] * nx + q[1] * ny - line_offset) <= tol:
            picked.append(idx)
    maps = tuple(ifs.maps[i - 1] for i in picked)
    if not maps:
        return LineSlice((), (), 0.0, True)
    return LineSlice(
        tuple(picked), maps, similarity_dimension([m.r for m in maps]), False
    )


def ifs_from_config(data: dict) -> Ifs:
    """Build an IFS from a parsed TOML table: repeated ``[[map]]`` entries
    with keys ``r``, ``theta`` (radians), ``z = [x, y]``, plus an optional
    top-level ``osc`` flag."""
    entries = data.get("map")
    if not entries or not isinstance(entries, list):
        raise PreconditionError("config needs at least one [[map]] entry")
    maps = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise PreconditionError(f"[[map]] entry {k} is not a table")
        unknown = set(entry) - {"r", "theta", "z"}
        if unknown:
            raise PreconditionError(
                f"[[map]] entry {k} has unknown keys: {sorted(unknown)}"
            )
        try:
            r = float(entry["r"])
            theta = float(entry.get("theta", 0.0))
            zx, zy = entry["z"]
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"[[map]] entry {k} is malformed: {exc}") from exc
        maps.append(SimilarityMap(r=r, rotation=theta, z=(float(zx), float(zy))))
    osc = bool(data.get("osc", False))
    return Ifs(tuple(maps), osc=osc)
