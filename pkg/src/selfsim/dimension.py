"""Dimension lower bounds for nested convex-piece families, plus a
flatness-sum diagnostic.

The branching bound: if level n of a nested family splits every piece into
v_n children whose diameters stay comparable, the dimension of the limit
set is at least liminf log(v_1 ... v_n) / (-log d_n), where d_n is the
minimum piece diameter at level n. The finite-depth surrogate reported here
takes the cumulative branching count through level n against the level-n
diameter and minimizes over the last half of the provided levels; the
constant-factor difference from any fixed indexing convention vanishes in
the liminf.

The flatness diagnostic sums squared line-deviation numbers over dyadic
cubes: bounded sums indicate containment in a rectifiable curve, flat
growth indicates the opposite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .geometry import ConvexPolygon


@dataclass(frozen=True)
class NestedStats:
    """Per-level branching counts and diameter ranges of a nested family.

    ``levels[n]`` holds (v_n, d_n, D_n): the per-piece child count, the
    minimum and the maximum piece diameter at level n+1 (0-indexed input,
    levels numbered from 1).
    """

    levels: tuple[tuple[int, float, float], ...]
    b: float = 0.0

    def __post_init__(self) -> None:
        if not self.levels:
            raise PreconditionError("need at least one level")
        prev_max = math.inf
        for v, d, big_d in self.levels:
            if v < 1:
                raise PreconditionError("branching counts must be >= 1")
            if d > big_d + 1e-15:
                raise PreconditionError("min diameter exceeds max diameter")
            if big_d > prev_max + 1e-15:
                raise PreconditionError("max diameters must be non-increasing")
            if self.b > 0 and d / big_d <= self.b:
                raise PreconditionError(
                    f"diameter uniformity d/D = {d / big_d:.6g} <= b = {self.b}"
                )
            prev_max = big_d


def hata_bound(stats: NestedStats) -> tuple[float, list[float]]:
    """Finite-depth dimension lower-bound surrogate.

    Returns the minimum over the last half of the provided levels of
    log(v_1 * ... * v_n) / (-log d_n), along with the full per-level
    sequence for convergence inspection. Levels with d_n >= 1 are an error
    (the denominator changes sign)."""
    seq: list[float] = []
    log_count = 0.0
    for v, d, _ in stats.levels:
        log_count += math.log(v)
        if d >= 1.0:
            raise PreconditionError(
                f"min diameter {d} >= 1: rescale the family so diameters are < 1"
            )
        seq.append(log_count / (-math.log(d)))
    half_start = len(seq) // 2
    return min(seq[half_start:]), seq


def uniform_family_stats(
    n_children: int, ratio: float, seed_diameter: float, depth: int
) -> NestedStats:
    """Stats for a uniform self-similar family: every piece splits into
    ``n_children`` copies scaled by ``ratio`` per level."""
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    levels = tuple(
        (n_children, seed_diameter * ratio ** (n + 1), seed_diameter * ratio ** (n + 1))
        for n in range(depth)
    )
    return NestedStats(levels=levels)


# ---------------------------------------------------------------------------
# flatness (line-deviation) sums over dyadic cubes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaReport:
    depth: int
    per_depth_sums: tuple[float, ...]
    cube_count: tuple[int, ...]

    @property
    def total(self) -> float:
        return sum(self.per_depth_sums)


def _beta_of_points(pts: np.ndarray, scale: float, n_angles: int = 256) -> float:
    """Best-line deviation of a point cloud, normalized by ``scale``.

    For a fixed direction the optimal line is the midline of the directional
    width, so the deviation is half that width; the direction search uses a
    coarse grid refined by golden-section (the width is unimodal near its
    minimum for the accuracy needed here)."""
    if len(pts) < 2:
        return 0.0

    def half_width(theta: float) -> float:
        n = np.array([-math.sin(theta), math.cos(theta)])
        vals = pts @ n
        return 0.5 * (float(vals.max()) - float(vals.min()))

    thetas = np.linspace(0.0, math.pi, n_angles, endpoint=False)
    widths = [half_width(t) for t in thetas]
    k = int(np.argmin(widths))
    lo = thetas[k] - math.pi / n_angles
    hi = thetas[k] + math.pi / n_angles
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = half_width(x1), half_width(x2)
    for _ in range(40):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = half_width(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = half_width(x2)
    best = min(widths[k], f1, f2)
    return min(1.0, best / scale)


def beta_sum(
    pieces: Sequence[ConvexPolygon], max_depth: int, window: float | None = None
) -> BetaReport:
    """Squared line-deviation sums over dyadic cubes.

    Piece vertices are sampled; for each dyadic cube (up to ``max_depth``)
    that contains samples in its tripled concentric cube, the deviation of
    those samples from the best approximating line is computed, normalized
    by the tripled cube's diameter (hence always in [0, 1]), and the sum of
    squared deviations weighted by cube diameter is accumulated per depth."""
    if max_depth < 0:
        raise PreconditionError("max_depth must be >= 0")
    pts = np.asarray([v for p in pieces for v in p.vertices], dtype=np.float64)
    if len(pts) == 0:
        raise PreconditionError("no sample points")
    origin = pts.min(axis=0)
    side = float(max(pts.max(axis=0) - origin)) or 1.0
    if window is not None:
        side = max(side, window)
    sums: list[float] = []
    counts: list[int] = []
    for depth in range(max_depth + 1):
        cell = side / (1 << depth)
        cube_diam_3 = 3.0 * cell * math.sqrt(2.0)
        occupied = set(
            map(tuple, np.floor((pts - origin) / cell).astype(np.int64).tolist())
        )
        total = 0.0
        for ix, iy in occupied:
            lo = origin + np.array([(ix - 1) * cell, (iy - 1) * cell])
            hi = lo + 3.0 * cell
            mask = np.all((pts >= lo - 1e-12) & (pts <= hi + 1e-12), axis=1)
            beta = _beta_of_points(pts[mask], cube_diam_3)
            total += beta * beta * cell * math.sqrt(2.0)
        sums.append(total)
        counts.append(len(occupied))
    return BetaReport(
        depth=max_depth, per_depth_sums=tuple(sums), cube_count=tuple(counts)
    )
