import math

import pytest

from selfsim.cantor4 import c4_ifs
from selfsim.errors import (
    PersistentAngleError,
    PreconditionError,
    UnsupportedInputError,
)
from selfsim.ifs import Ifs, SimilarityMap
from selfsim.rotational import (
    AngleSet,
    build_nested_plan,
    certify_rotational,
    find_persistent_angle,
    good_angle_set,
    greedy_separated,
    plan_pieces,
    rotation_density,
    rotation_orbit,
    uifs_hull,
    uniformize,
)

PI = math.pi


def _quarter_turn_ifs():
    return Ifs(
        (
            SimilarityMap(0.25, 0.0, (0.0, 0.0)),
            SimilarityMap(0.25, PI / 2.0, (1.0, 0.0)),
            SimilarityMap(0.25, PI, (1.0, 1.0)),
            SimilarityMap(0.25, 3.0 * PI / 2.0, (0.0, 1.0)),
        ),
        osc=True,
    )


class TestUniformize:
    def test_quarter_turn_system(self):
        u = uniformize(_quarter_turn_ifs(), eta=0.5)
        assert u.kappa >= 1
        assert u.gamma >= 1.0 - 0.5
        assert 0.0 < u.r < 1.0
        # every word shares the common scale
        assert all(len(w) == sum(u.multiplicities) for w in u.source_words)
        assert u.r_in_bracket or u.r_bracket[0] <= u.r <= u.r_bracket[1]

    def test_rotation_free_system_accepted(self):
        u = uniformize(c4_ifs(), eta=0.5)
        assert u.alpha % PI == pytest.approx(0.0, abs=1e-9) or u.alpha == pytest.approx(
            0.0, abs=1e-9
        )

    def test_dimension_must_be_one(self):
        ifs = Ifs(
            (
                SimilarityMap(0.5, 0.0, (0.0, 0.0)),
                SimilarityMap(0.25, 0.0, (0.75, 0.0)),
            )
        )
        with pytest.raises(PreconditionError):
            uniformize(ifs, eta=0.5)

    def test_irrational_rotation_rejected(self):
        # rotation by 1 radian: not a rational multiple of pi
        ifs = Ifs(
            (
                SimilarityMap(0.25, 1.0, (0.0, 0.0)),
                SimilarityMap(0.25, 0.0, (1.0, 0.0)),
                SimilarityMap(0.25, 0.0, (1.0, 1.0)),
                SimilarityMap(0.25, 0.0, (0.0, 1.0)),
            )
        )
        with pytest.raises(UnsupportedInputError):
            uniformize(ifs, eta=0.5)

    def test_eta_range(self):
        with pytest.raises(PreconditionError):
            uniformize(_quarter_turn_ifs(), eta=0.0)
        with pytest.raises(PreconditionError):
            uniformize(_quarter_turn_ifs(), eta=1.5)


class TestAngleSet:
    def test_measure_and_contains(self):
        s = AngleSet(((0.0, 1.0), (2.0, 2.5)))
        assert s.measure == pytest.approx(1.5)
        assert s.contains(0.5)
        assert s.contains(2.2)
        assert not s.contains(1.7)

    def test_contains_mod_pi(self):
        s = AngleSet(((0.1, 0.5),))
        assert s.contains(0.3 + PI)


class TestGreedySeparated:
    def test_keeps_separated(self):
        ivs = [(0.0, 1.0), (1.2, 2.2), (2.3, 3.3), (5.0, 6.0)]
        idx = greedy_separated(ivs, sep=0.15)
        kept = [ivs[i] for i in idx]
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                lo = max(kept[i][0], kept[j][0])
                hi = min(kept[i][1], kept[j][1])
                assert lo - hi > 0.15 - 1e-9

    def test_disjoint_all_kept(self):
        ivs = [(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]
        assert list(greedy_separated(ivs, sep=0.5)) == [0, 1, 2]


class TestGoodAngles:
    def test_level1_quarter_turn(self):
        u = uniformize(_quarter_turn_ifs(), eta=0.5)
        hull = uifs_hull(u)
        rep = good_angle_set(u, 1, epsilon=0.45, hull=hull)
        assert rep.level == 1
        assert 0.0 < rep.angle_set.measure <= PI + 1e-9
        assert max(rep.counts) >= 2


class TestRotationOrbit:
    def test_zero_rotation_constant(self):
        orbit = rotation_orbit(0.3, 0.0, 10)
        assert all(t == pytest.approx(0.3) for t in orbit)

    def test_rational_rotation_exact_period(self):
        # phi = pi/3 has period 3 mod pi; far iterates stay exact
        orbit = rotation_orbit(0.1, PI / 3.0, 100000)
        assert orbit[99999] == pytest.approx(orbit[99999 % 3], abs=1e-12)

    def test_density_hits(self):
        s = AngleSet(((0.0, 0.5),))
        rec = rotation_density(0.25, 0.0, s, 50)
        assert rec.per_n[-1] == pytest.approx(1.0)
        rec2 = rotation_density(1.0, 0.0, s, 50)
        assert rec2.per_n[-1] == pytest.approx(0.0)

    def test_equidistribution_golden(self):
        # irrational rotation equidistributes: density of a set of measure
        # 0.9 * pi tends to 0.9
        phi = PI * (math.sqrt(5.0) - 1.0) / 2.0
        s = AngleSet(((0.0, 0.9 * PI),))
        rec = rotation_density(0.123, phi, s, 10000)
        assert rec.per_n[-1] == pytest.approx(0.9, abs=0.05)


class TestPersistentAngle:
    def test_identity_rotation_full_set(self):
        u = uniformize(c4_ifs(), eta=0.5)
        full = AngleSet(((0.0, PI),))
        theta, rec = find_persistent_angle(u, [full] * 3, epsilon=0.45, n_max=3)
        assert rec.per_n[-1] == pytest.approx(1.0)

    def test_empty_sets_fail(self):
        u = uniformize(c4_ifs(), eta=0.5)
        empty = AngleSet(())
        with pytest.raises(PersistentAngleError):
            find_persistent_angle(u, [empty] * 3, epsilon=0.45, n_max=3)


class TestPlanAndCertificate:
    def _plan(self, depth=3, epsilon=0.45):
        u = uniformize(_quarter_turn_ifs(), eta=0.5)
        hull = uifs_hull(u)
        rep = good_angle_set(u, 1, epsilon=epsilon, hull=hull)
        theta, _ = find_persistent_angle(
            u,
            [rep.angle_set] * depth,
            epsilon=epsilon,
            n_max=depth,
            tiebreak_counts=rep.counts,
        )
        return u, build_nested_plan(u, theta, epsilon, depth, hull=hull), hull

    def test_counts_multiply(self):
        _, plan, _ = self._plan()
        counts = plan.counts
        comp = plan.component_counts
        expect = 1
        for c, total in zip(counts, comp):
            expect *= c
            assert total == expect

    def test_pieces_separated_within_parent(self):
        u, plan, _ = self._plan(depth=2)
        level1 = plan.levels[0]
        kept = level1.intervals  # intervals of the selected children only
        assert len(kept) == level1.count
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                lo = max(kept[i][0], kept[j][0])
                hi = min(kept[i][1], kept[j][1])
                assert lo - hi > u.r - 1e-9

    def test_plan_pieces_count(self):
        _, plan, _ = self._plan(depth=2)
        assert len(plan_pieces(plan, 2)) == plan.component_counts[1]
        # depth 0 is the seed hull itself
        assert len(plan_pieces(plan, 0)) == 1

    def test_certificate_smoke(self):
        _, plan, hull = self._plan(depth=3)
        cert = certify_rotational(plan, 0.45, hull=hull)
        assert cert.hata > 0.0
        assert cert.dim_target == pytest.approx(1.0 - 0.45)
        assert cert.lip_realized <= cert.lip_bound
        assert cert.passed == (cert.dim_margin >= -1e-12 and cert.lip_margin >= 0.0)
