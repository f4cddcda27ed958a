import math

import pytest

from selfsim.cantor4 import UNIT_SQUARE, c4_ifs, generation
from selfsim.dimension import (
    NestedStats,
    beta_sum,
    hata_bound,
    uniform_family_stats,
)
from selfsim.errors import PreconditionError
from selfsim.geometry import ConvexPolygon

SQRT2 = math.sqrt(2.0)


class TestNestedStats:
    def test_validation(self):
        with pytest.raises(PreconditionError):
            NestedStats(((0, 0.1, 0.2),))  # child count must be >= 1
        with pytest.raises(PreconditionError):
            NestedStats(((2, 0.3, 0.2),))  # d must not exceed D
        with pytest.raises(PreconditionError):
            # diameters must be non-increasing across levels
            NestedStats(((2, 0.1, 0.2), (2, 0.3, 0.4)))
        with pytest.raises(PreconditionError):
            # separation-to-diameter ratio must exceed b
            NestedStats(((2, 0.01, 0.2),), b=0.5)

    def test_uniform_factory(self):
        stats = uniform_family_stats(4, 0.25, SQRT2, 3)
        assert len(stats.levels) == 3
        v, d, dd = stats.levels[0]
        assert v == 4
        assert dd == pytest.approx(SQRT2 * 0.25)


class TestHataBound:
    def test_four_children_quarter_ratio(self):
        # 4 children at scale 1/4 per level: the bound approaches 1
        stats = uniform_family_stats(4, 0.25, SQRT2, 20)
        val, seq = hata_bound(stats)
        assert val >= 0.97
        assert len(seq) == 20

    def test_eight_children_sixteenth_ratio(self):
        # 8 children at scale 1/16: limit dimension 3/4
        stats = uniform_family_stats(8, 1.0 / 16.0, SQRT2, 15)
        val, _ = hata_bound(stats)
        assert val == pytest.approx(0.75, abs=0.02)

    def test_single_child_gives_zero(self):
        stats = uniform_family_stats(1, 0.25, SQRT2, 10)
        val, _ = hata_bound(stats)
        assert val == 0.0

    def test_rescaling_shift_is_small(self):
        # scaling all diameters by c shifts the bound by at most
        # |log c| / (-log d_last)
        depth = 18
        a = uniform_family_stats(4, 0.25, SQRT2, depth)
        b = uniform_family_stats(4, 0.25, SQRT2 / 3.0, depth)
        va, _ = hata_bound(a)
        vb, _ = hata_bound(b)
        # the minimum is taken over the last half, so the worst denominator
        # is the diameter at the half-depth level
        d_half = min(SQRT2, SQRT2 / 3.0) * 0.25 ** (depth // 2)
        assert abs(va - vb) <= abs(math.log(3.0)) / (-math.log(d_half)) + 1e-9

    def test_diameter_at_least_one_rejected(self):
        stats = NestedStats(((4, 1.5, 2.0),))
        with pytest.raises(PreconditionError):
            hata_bound(stats)


class TestBetaSum:
    def test_collinear_points_zero(self):
        # pieces lined up on one straight line are flat at every scale
        segs = [
            ConvexPolygon(((0.1 * k, 0.1 * k), (0.1 * k + 0.02, 0.1 * k + 0.02)))
            for k in range(8)
        ]
        rep = beta_sum(segs, 4)
        assert rep.per_depth_sums == pytest.approx([0.0] * len(rep.per_depth_sums), abs=1e-9)

    def test_values_in_unit_range(self):
        gen = generation(c4_ifs(), UNIT_SQUARE, 2)
        rep = beta_sum([p for _, p in gen.pieces], 3)
        assert sum(rep.cube_count) > 0
        for s in rep.per_depth_sums:
            assert s >= -1e-12

    def test_deeper_window_reports_more_levels(self):
        gen = generation(c4_ifs(), UNIT_SQUARE, 2)
        r2 = beta_sum([p for _, p in gen.pieces], 2)
        r4 = beta_sum([p for _, p in gen.pieces], 4)
        assert len(r4.per_depth_sums) >= len(r2.per_depth_sums)
        assert r4.depth == 4
