"""Rotational pipeline: uniformize a rotating system, find good projection
angles per generation, pick an angle whose rotation orbit stays in the good
sets, and build nested subsets with separated projections.

Stages:

1. ``uniformize`` replaces an IFS whose maps rotate by rational multiples of
   pi with a family of equal-length composition words sharing one scale and
   one rotation, trimmed so its dimension lands in a target window below 1.
2. ``good_angle_set`` marks the directions where a generation's pieces
   project onto many well-separated intervals.
3. ``find_persistent_angle`` picks a direction whose orbit under the common
   rotation hits the per-level good sets with high density.
4. ``build_nested_plan`` selects, per level, a maximal separated child
   family in the rotated frame; by self-similarity the same selection
   applies inside every parent piece.
5. ``certify_rotational`` turns the plan's counts into a dimension lower
   bound and compares the realized Lipschitz constant with the target
   formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dimension import NestedStats, hata_bound
from .errors import (
    PersistentAngleError,
    PreconditionError,
    ResourceCapError,
    UniformizationFailedError,
    UnsupportedInputError,
)
from .favard import AngleGrid
from .geometry import Angle, ConvexPolygon, Interval, interval_gap, min_width, project
from .ifs import (
    DEFAULT_PIECE_CAP,
    Ifs,
    SimilarityMap,
    Word,
    attractor_hull,
    compose,
    generation,
)

TWO_PI = 2.0 * math.pi
_DIM_TOL = 1e-9
_UNIFORM_TOL = 1e-12
_KAPPA_WINDOW = 64
_HULL_DEPTH = 3
"""Hull approximation depth for uniform systems: with N >= 2 maps of equal
scale r <= 1/4 the Hausdorff error diam * r**3 is far below every separation
scale used here, while the word count stays modest."""


# ---------------------------------------------------------------------------
# uniformization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uifs:
    """A uniform system: equal-length words of a parent IFS sharing one
    scale ``r`` and one rotation ``alpha``, with dimension ``gamma``."""

    system: Ifs
    parent: Ifs
    r: float
    alpha: float
    gamma: float
    source_words: tuple[Word, ...]
    kappa: int
    multiplicities: tuple[int, ...]
    r_bracket: tuple[float, float]
    r_in_bracket: bool
    kappa_bracket: tuple[float, float]
    kappa_in_bracket: bool

    def __post_init__(self) -> None:
        for m in self.system.maps:
            if abs(m.r - self.r) > _UNIFORM_TOL:
                raise PreconditionError(
                    f"non-uniform scale {m.r} vs common scale {self.r}"
                )
            diff = (m.rotation - self.alpha) % TWO_PI
            if min(diff, TWO_PI - diff) > _UNIFORM_TOL:
                raise PreconditionError(
                    f"non-uniform rotation {m.rotation} vs common angle {self.alpha}"
                )
        expected = math.log(self.system.n_maps) / math.log(1.0 / self.r)
        if abs(self.gamma - expected) > 1e-9:
            raise PreconditionError(
                f"gamma {self.gamma} != log(#maps)/log(1/r) = {expected}"
            )

    @property
    def n_maps(self) -> int:
        return self.system.n_maps


def _require_rational_rotations(ifs: Ifs) -> None:
    for k, m in enumerate(ifs.maps, start=1):
        ratio = m.rotation / math.pi
        # cap the denominator well below the generic Diophantine range so
        # that irrational multiples of pi are not absorbed by an accidental
        # high-denominator convergent
        frac = Fraction(ratio).limit_denominator(1000)
        if abs(ratio - float(frac)) > 1e-9:
            raise UnsupportedInputError(
                f"map {k} rotates by {m.rotation:.12g} rad, not a rational "
                "multiple of pi to within 1e-9"
            )


def _g_inverse(y: float) -> float:
    """Inverse of g(x) = x / log(x) on the increasing branch x > e.

    Returns nan when y < e (no solution on that branch)."""
    if y < math.e:
        return math.nan
    lo, hi = math.e + 1e-12, max(10.0, 4.0 * y * math.log(max(y, 2.0)))
    while hi / math.log(hi) < y:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid / math.log(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _multiset_words(multiplicities: Sequence[int], limit: int) -> list[Word]:
    """The lexicographically first ``limit`` words in which letter k
    (1-based) appears exactly ``multiplicities[k-1]`` times."""
    remaining = list(multiplicities)
    out: list[Word] = []
    prefix: list[int] = []

    def rec() -> bool:
        if len(out) >= limit:
            return True
        if all(c == 0 for c in remaining):
            out.append(tuple(prefix))
            return len(out) >= limit
        for k, c in enumerate(remaining):
            if c == 0:
                continue
            remaining[k] -= 1
            prefix.append(k + 1)
            done = rec()
            prefix.pop()
            remaining[k] += 1
            if done:
                return True
        return False

    rec()
    return out


def uniformize(
    ifs: Ifs, eta: float, cap: int = DEFAULT_PIECE_CAP
) -> Uifs:
    """Build a uniform word family with dimension in [1 - eta, 1 - eta/2].

    Requires similarity dimension 1 (to 1e-9) and rotations that are
    rational multiples of pi. For each candidate depth kappa the word family
    consists of all orderings of the multiset in which map k appears
    ceil(kappa * r_k) times; every such word shares the scale
    prod(r_k ** v_k) and, because the letter counts are fixed, the same
    total rotation -- the rotation-class partition is a single class. The
    family is trimmed (lexicographically first words kept) so that its
    dimension gamma does not exceed 1 - eta/2; the smallest kappa for which
    gamma also stays >= 1 - eta wins.
    """
    if not 0.0 < eta < 1.0:
        raise PreconditionError("eta must lie in (0, 1)")
    dim = ifs.similarity_dim
    if abs(dim - 1.0) > _DIM_TOL:
        raise PreconditionError(
            f"similarity dimension is {dim:.12g}, uniformization requires 1"
        )
    _require_rational_rotations(ifs)

    n = ifs.n_maps
    scales = [m.r for m in ifs.maps]
    attempts: list[str] = []
    for kappa in range(1, _KAPPA_WINDOW + 2):
        v = [max(1, math.ceil(kappa * r - 1e-12)) for r in scales]
        r = math.prod(rk**vk for rk, vk in zip(scales, v))
        length = sum(v)
        count = math.factorial(length)
        for vk in v:
            count //= math.factorial(vk)
        trim_cap = math.floor(r ** -(1.0 - eta / 2.0) + 1e-9)
        n_keep = min(count, trim_cap)
        if n_keep < 1:
            attempts.append(f"kappa={kappa}: trim cap {trim_cap} empties the family")
            continue
        gamma = math.log(n_keep) / math.log(1.0 / r)
        if gamma < 1.0 - eta - 1e-12:
            attempts.append(
                f"kappa={kappa}: gamma={gamma:.6g} below {1.0 - eta:.6g}"
            )
            continue
        if n_keep > cap:
            raise ResourceCapError(
                f"uniformization at kappa={kappa} keeps {n_keep} words (cap {cap})"
            )
        words = _multiset_words(v, n_keep)
        maps = tuple(compose(ifs, w) for w in words)
        alpha = maps[0].rotation
        system = Ifs(maps, osc=ifs.osc)

        big_t = sum(rk * math.log(1.0 / rk) for rk in scales)
        c1 = math.prod(scales)
        c2 = (4.0 / (3.0 * n)) * big_t
        c3 = 1.5 * n
        r_lo = c1 * (c2 * eta) ** (c3 / eta)
        r_hi = (1.5 * c2 * eta) ** (c3 / (3.0 * eta))
        kappa_lo = _g_inverse(n / (2.0 * big_t * eta))
        kappa_hi = _g_inverse(3.0 * n / (4.0 * big_t * eta))
        kappa_ok = (
            not math.isnan(kappa_lo)
            and not math.isnan(kappa_hi)
            and kappa_lo <= kappa <= kappa_hi
        )
        return Uifs(
            system=system,
            parent=ifs,
            r=r,
            alpha=alpha,
            gamma=gamma,
            source_words=tuple(words),
            kappa=kappa,
            multiplicities=tuple(v),
            r_bracket=(r_lo, r_hi),
            r_in_bracket=r_lo <= r <= r_hi,
            kappa_bracket=(kappa_lo, kappa_hi),
            kappa_in_bracket=kappa_ok,
        )
    raise UniformizationFailedError(
        "no depth in the search window gives a dimension in "
        f"[{1.0 - eta:.6g}, {1.0 - eta / 2.0:.6g}]; tried: " + "; ".join(attempts)
    )


def uifs_hull(uifs: Uifs, depth: int = _HULL_DEPTH) -> ConvexPolygon:
    """Convex hull (approximate for rotating systems) of the uniform
    system's attractor."""
    hull, _ = attractor_hull(uifs.system, depth=depth)
    return hull


# ---------------------------------------------------------------------------
# separated-projection angle sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleSet:
    """A finite union of disjoint open arcs in [0, pi)."""

    arcs: tuple[Interval, ...]

    def __post_init__(self) -> None:
        prev_hi = -math.inf
        for lo, hi in self.arcs:
            if not (0.0 <= lo < hi <= math.pi):
                raise PreconditionError(f"arc ({lo}, {hi}) outside [0, pi)")
            if lo < prev_hi:
                raise PreconditionError("arcs must be disjoint and sorted")
            prev_hi = hi

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.arcs)

    def contains(self, theta: float) -> bool:
        t = theta % math.pi
        return any(lo < t < hi for lo, hi in self.arcs)


@dataclass(frozen=True)
class RegularityConstants:
    """Configured stand-ins for the non-explicit regularity inputs of the
    angle-set threshold: lower/upper measure regularity (a, b), overlap
    multiplicity omega, and the energy constant c_e."""

    a: float = 1.0
    b: float = 1.0
    omega: float = 1.0
    c_e: float = 1.0

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.omega, self.c_e) <= 0.0:
            raise PreconditionError("regularity constants must be positive")


def separated_count_threshold(
    uifs: Uifs,
    n: int,
    epsilon: float,
    hull: ConvexPolygon,
    consts: RegularityConstants = RegularityConstants(),
) -> float:
    """The count floor eps * delta0 * r**(-n*gamma) gating good angles.

    delta0 is assembled from the configured regularity constants and a
    measure lower-bound surrogate; it gates a search only -- the separation
    assertions downstream are the actual contract."""
    gamma, r = uifs.gamma, uifs.r
    diam = hull.diameter()
    nu = min_width(hull)
    if nu <= 0.0 or diam <= 0.0:
        raise PreconditionError("degenerate hull: zero width or diameter")
    h_gamma = (
        consts.a * nu / (8.0 * consts.omega * consts.b * diam ** (1.0 - gamma))
    ) * r ** (1.0 - gamma)
    b0 = (8.0 * consts.omega * consts.b * diam / (consts.a * nu)) * r ** (gamma - 1.0)
    alpha0 = max(diam / 2.0, 4.0 / nu, 1.0)
    delta0 = (
        h_gamma
        * (1.0 - math.exp(-(1.0 - gamma)))
        / (
            15.0
            * consts.c_e
            * alpha0**4
            * (alpha0 + 1.0)
            * consts.omega**2
            * b0
            * (2.0 + 4.0 * alpha0) ** gamma
        )
    )
    return epsilon * delta0 * r ** (-n * gamma)


def greedy_separated(
    intervals: Sequence[Interval], sep: float
) -> tuple[int, ...]:
    """Left-to-right maximal selection of pairwise sep-separated intervals.

    Intervals are visited by ascending left endpoint (then right); one is
    kept when its gap to every interval already kept exceeds ``sep``, which
    reduces to a single comparison against the largest kept right endpoint.
    The output is maximal: every skipped interval sits within ``sep`` of a
    kept one.
    """
    order = sorted(range(len(intervals)), key=lambda i: intervals[i])
    kept: list[int] = []
    max_hi = -math.inf
    for i in order:
        lo, hi = intervals[i]
        if not kept or lo - max_hi > sep:
            kept.append(i)
            max_hi = max(max_hi, hi)
    for a_pos in range(len(kept)):
        for b_pos in range(a_pos + 1, len(kept)):
            gap = interval_gap(intervals[kept[a_pos]], intervals[kept[b_pos]])
            if gap <= sep - 1e-9:
                raise PreconditionError(
                    f"separated selection violated: gap {gap:.6g} <= {sep:.6g}"
                )
    return tuple(sorted(kept))


@dataclass(frozen=True)
class GoodAngleReport:
    level: int
    angle_set: AngleSet
    counts: tuple[int, ...]
    threshold: float
    separation: float

    @property
    def complement_measure(self) -> float:
        return math.pi - self.angle_set.measure


def good_angle_set(
    uifs: Uifs,
    n: int,
    epsilon: float,
    grid: AngleGrid = AngleGrid(),
    hull: ConvexPolygon | None = None,
    consts: RegularityConstants = RegularityConstants(),
    cap: int = DEFAULT_PIECE_CAP,
) -> GoodAngleReport:
    """Directions along which generation n projects onto many separated
    intervals.

    Per grid angle: project every generation-n piece, run the greedy maximal
    r**n-separated selection, and record the count. The good set collects
    the (open) grid cells whose count reaches the threshold; adjacent cells
    are merged."""
    if n < 0:
        raise PreconditionError("level must be >= 0")
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError("epsilon must lie in (0, 1)")
    if hull is None:
        hull = uifs_hull(uifs)
    gen = generation(uifs.system, hull, n, cap=cap)
    sep = uifs.r**n
    threshold = separated_count_threshold(uifs, n, epsilon, hull, consts)
    counts: list[int] = []
    for theta in grid.angles:
        ivs = [project(poly, float(theta)) for poly in gen.polygons]
        counts.append(len(greedy_separated(ivs, sep)))
    cell = math.pi / grid.resolution
    arcs: list[list[float]] = []
    for i, c in enumerate(counts):
        if c >= threshold:
            lo, hi = i * cell, (i + 1) * cell
            if arcs and abs(arcs[-1][1] - lo) < 1e-15:
                arcs[-1][1] = hi
            else:
                arcs.append([lo, hi])
    return GoodAngleReport(
        level=n,
        angle_set=AngleSet(tuple((lo, min(hi, math.pi)) for lo, hi in arcs)),
        counts=tuple(counts),
        threshold=threshold,
        separation=sep,
    )


# ---------------------------------------------------------------------------
# rotation orbits and persistent angles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityRecord:
    theta: float
    phi: float
    per_n: tuple[float, ...]

    def __post_init__(self) -> None:
        for d in self.per_n:
            if not 0.0 <= d <= 1.0:
                raise PreconditionError(f"density {d} outside [0, 1]")


def rotation_orbit(theta: float, phi: float, n_max: int) -> list[float]:
    """T^k(theta) for k = 0..n_max-1 with T(t) = t + phi mod pi.

    When phi is a rational multiple of pi (detected to 1e-15) the orbit is
    computed by exact integer arithmetic on the multiplier, so it carries no
    accumulated drift; otherwise the angle is accumulated in reduced
    coordinates with one renormalization per step."""
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    ratio = phi / math.pi
    frac = Fraction(ratio).limit_denominator(10**6)
    if abs(ratio - float(frac)) < 1e-15:
        p = frac.numerator % frac.denominator
        q = frac.denominator
        base = theta % math.pi
        out = []
        for k in range(n_max):
            t = base + ((k * p) % q) * (math.pi / q)
            out.append(t - math.pi if t >= math.pi else t)
        return out
    t = theta % math.pi
    step = phi % math.pi
    out = []
    for _ in range(n_max):
        out.append(t)
        t += step
        if t >= math.pi:
            t -= math.pi
    return out


def rotation_density(
    theta: float, phi: float, angle_set: AngleSet, n_max: int
) -> DensityRecord:
    """Orbit-hit densities D(n) = #{k < n : T^k(theta) in J} / n, n <= n_max."""
    orbit = rotation_orbit(theta, phi, n_max)
    hits = 0
    per_n: list[float] = []
    for k, t in enumerate(orbit, start=1):
        if angle_set.contains(t):
            hits += 1
        per_n.append(hits / k)
    return DensityRecord(theta=theta % math.pi, phi=phi, per_n=tuple(per_n))


def find_persistent_angle(
    uifs: Uifs,
    sets_per_level: Sequence[AngleSet],
    epsilon: float,
    n_max: int,
    grid: AngleGrid = AngleGrid(),
    tiebreak_counts: Sequence[int] | None = None,
) -> tuple[Angle, DensityRecord]:
    """Grid angle whose rotation orbit hits the per-level good sets densely.

    For each grid theta the orbit point at level k is T^(k-1)(theta) under
    rotation by the common angle; the score is the minimum over n <= n_max
    of the fraction of levels k <= n whose orbit point lies in the level-k
    set. The best theta must score at least 1 - eps/2. Ties in the density
    score (common when the good sets are large) are broken by
    ``tiebreak_counts``, the per-grid-angle separated counts, so the
    returned direction also separates as many children as possible."""
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError("epsilon must lie in (0, 1)")
    if n_max < 1 or n_max > len(sets_per_level):
        raise PreconditionError(
            f"need good sets for levels 1..{n_max}, got {len(sets_per_level)}"
        )
    if tiebreak_counts is not None and len(tiebreak_counts) != grid.resolution:
        raise PreconditionError("tiebreak_counts must match the grid resolution")
    best_theta = 0.0
    best_score = (-1.0, -1.0)
    best_fracs: tuple[float, ...] = ()
    for i, theta in enumerate(grid.angles):
        orbit = rotation_orbit(float(theta), uifs.alpha, n_max)
        hits = 0
        fracs: list[float] = []
        for k in range(1, n_max + 1):
            if sets_per_level[k - 1].contains(orbit[k - 1]):
                hits += 1
            fracs.append(hits / k)
        score = (
            min(fracs),
            float(tiebreak_counts[i]) if tiebreak_counts is not None else 0.0,
        )
        if score > best_score:
            best_score = score
            best_theta = float(theta)
            best_fracs = tuple(fracs)
    record = DensityRecord(theta=best_theta, phi=uifs.alpha, per_n=best_fracs)
    if best_score[0] < 1.0 - epsilon / 2.0 - 1e-12:
        raise PersistentAngleError(
            f"best orbit density {best_score[0]:.6g} at theta = {best_theta:.6g} "
            f"falls short of the floor {1.0 - epsilon / 2.0:.6g}"
        )
    return Angle(best_theta), record


# ---------------------------------------------------------------------------
# nested plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanLevel:
    n: int
    frame_angle: float
    selected: tuple[int, ...]
    count: int
    good: bool
    intervals: tuple[Interval, ...]


@dataclass(frozen=True)
class NestedPlan:
    uifs: Uifs
    theta: Angle
    epsilon: float
    hull: ConvexPolygon
    levels: tuple[PlanLevel, ...]

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(level.count for level in self.levels)

    @property
    def component_counts(self) -> tuple[int, ...]:
        out: list[int] = []
        m = 1
        for level in self.levels:
            m *= level.count
            out.append(m)
        return tuple(out)


def build_nested_plan(
    uifs: Uifs,
    theta: Angle,
    epsilon: float,
    depth: int,
    hull: ConvexPolygon | None = None,
) -> NestedPlan:
    """Select, per level, a maximal separated child family in the rotated
    frame.

    Level-n pieces sit inside level-(n-1) parents of scale r**(n-1) whose
    frame is rotated by (n-1) times the common angle; selecting among the
    first-generation children in the frame direction theta - (n-1)*alpha
    with separation r therefore realizes absolute separation r**n inside
    every parent at once. Every level keeps at least one child; whether the
    count reaches the r**(-(1-eps/2)) floor is recorded, never enforced."""
    if depth < 0:
        raise PreconditionError("depth must be >= 0")
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError("epsilon must lie in (0, 1)")
    if hull is None:
        hull = uifs_hull(uifs)
    children = [m.apply_polygon(hull) for m in uifs.system.maps]
    r = uifs.r
    good_floor = r ** -(1.0 - epsilon / 2.0)
    levels: list[PlanLevel] = []
    for n in range(1, depth + 1):
        frame = (theta.theta - (n - 1) * uifs.alpha) % math.pi
        ivs = [project(child, frame) for child in children]
        selected = greedy_separated(ivs, r)
        if not selected:
            raise PreconditionError("greedy selection kept no child")
        levels.append(
            PlanLevel(
                n=n,
                frame_angle=frame,
                selected=tuple(i + 1 for i in selected),
                count=len(selected),
                good=len(selected) >= good_floor,
                intervals=tuple(ivs[i] for i in selected),
            )
        )
    return NestedPlan(
        uifs=uifs, theta=theta, epsilon=epsilon, hull=hull, levels=tuple(levels)
    )


def plan_pieces(plan: NestedPlan, depth: int) -> list[ConvexPolygon]:
    """The depth-n pieces selected by the plan, as polygons (for rendering
    and flatness diagnostics; the plan itself stores only index sets)."""
    if depth < 0 or depth > len(plan.levels):
        raise PreconditionError("depth outside the plan's levels")
    maps = plan.uifs.system.maps
    current: list[SimilarityMap | None] = [None]
    for level in plan.levels[:depth]:
        nxt: list[SimilarityMap | None] = []
        for outer in current:
            for i in level.selected:
                child = maps[i - 1]
                nxt.append(child if outer is None else outer.after(child))
        current = nxt
    return [
        plan.hull if m is None else m.apply_polygon(plan.hull) for m in current
    ]


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationalCertificate:
    passed: bool
    hata: float
    hata_sequence: tuple[float, ...]
    dim_target: float
    dim_margin: float
    lip_realized: float
    lip_bound: float
    lip_margin: float
    good_levels: int


def certify_rotational(
    plan: NestedPlan, epsilon: float, hull: ConvexPolygon | None = None
) -> RotationalCertificate:
    """Dimension and Lipschitz certification of a nested plan.

    The dimension lower bound feeds the plan's per-level counts and piece
    diameters d_n = r**n * diam(K) into the branching bound. The realized
    Lipschitz constant is (diam(K)/r) * max(1/width, 1); the target formula
    is (diam(K)/prod parent scales) * max(1/width, 1) *
    exp(20 * M / eps * log(1/eps)) with M the parent map count."""
    if not plan.levels:
        raise PreconditionError("cannot certify an empty plan")
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError("epsilon must lie in (0, 1)")
    if hull is None:
        hull = plan.hull
    diam = hull.diameter()
    nu = min_width(hull)
    if nu <= 0.0:
        raise PreconditionError("degenerate hull: zero minimum width")
    r = plan.uifs.r
    stats = NestedStats(
        levels=tuple(
            (level.count, r**level.n * diam, r**level.n * diam)
            for level in plan.levels
        )
    )
    hata, seq = hata_bound(stats)
    dim_target = 1.0 - epsilon
    scale_aspect = max(1.0 / nu, 1.0)
    lip_realized = (diam / r) * scale_aspect
    parent = plan.uifs.parent
    prod_scales = math.prod(m.r for m in parent.maps)
    lip_bound = (
        (diam / prod_scales)
        * scale_aspect
        * math.exp(20.0 * parent.n_maps * (1.0 / epsilon) * math.log(1.0 / epsilon))
    )
    dim_margin = hata - dim_target
    lip_margin = lip_bound - lip_realized
    return RotationalCertificate(
        passed=dim_margin >= -1e-12 and lip_margin >= -1e-12,
        hata=hata,
        hata_sequence=tuple(seq),
        dim_target=dim_target,
        dim_margin=dim_margin,
        lip_realized=lip_realized,
        lip_bound=lip_bound,
        lip_margin=lip_margin,
        good_levels=sum(1 for level in plan.levels if level.good),
    )
