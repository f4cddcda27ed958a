import math

import pytest

from selfsim.cantor4 import c4_ifs
from selfsim.errors import PreconditionError
from selfsim.ifs import Ifs, SimilarityMap
from selfsim.subifs import (
    Certificate,
    certify,
    choose_depth,
    extract_separated_subifs,
    separation_scale,
)


class TestChooseDepth:
    def test_c4_half(self):
        choice = choose_depth(0.5, 4, 0.25)
        assert choice.m == 3
        assert choice.c2 == pytest.approx(3.0 / math.log(4.0), abs=1e-12)

    def test_epsilon_near_one_clamps_to_one(self):
        assert choose_depth(0.99, 4, 0.25).m == 1

    def test_small_ratio_c2_floor(self):
        # log(1/r) = 3 > 3, so the max(1, .) branch gives c2 = 1
        choice = choose_depth(0.5, 4, math.exp(-3.0))
        assert choice.c2 == 1.0

    def test_m_grows_as_epsilon_shrinks(self):
        ms = [choose_depth(e, 4, 0.25).m for e in (0.5, 0.25, 0.1, 0.05)]
        assert ms == sorted(ms)
        assert ms[-1] > ms[0]

    def test_invalid_epsilon(self):
        with pytest.raises(PreconditionError):
            choose_depth(0.0, 4, 0.25)
        with pytest.raises(PreconditionError):
            choose_depth(1.5, 4, 0.25)


class TestExtract:
    def test_c4_depth1(self):
        rep = extract_separated_subifs(c4_ifs(), 1)
        assert rep.m == 1
        # delta_1 = nu * (r/(4N))^1 = 1 * (1/64)
        assert rep.delta == pytest.approx(1.0 / 64.0)
        assert len(rep.sub_words) >= 2
        assert rep.sim_dim >= 0.5 - 1e-12
        assert not rep.degenerate

    def test_c4_depth2_separation(self):
        rep = extract_separated_subifs(c4_ifs(), 2)
        assert rep.delta == pytest.approx((1.0 / 64.0) ** 2)
        assert all(len(w) == 2 for w in rep.sub_words)
        # kept projection intervals are pairwise separated by > delta
        ivs = rep.intervals
        for i in range(len(ivs)):
            for j in range(i + 1, len(ivs)):
                lo = max(ivs[i][0], ivs[j][0])
                hi = min(ivs[i][1], ivs[j][1])
                assert lo - hi > rep.delta

    def test_degenerate_hull_rejected(self):
        # a single map has a one-point attractor: zero minimum width
        ifs = Ifs((SimilarityMap(0.5, 0.0, (0.5, 0.0)),))
        with pytest.raises(PreconditionError):
            extract_separated_subifs(ifs, 1)

    def test_deterministic(self):
        a = extract_separated_subifs(c4_ifs(), 2)
        b = extract_separated_subifs(c4_ifs(), 2)
        assert a.sub_words == b.sub_words
        assert a.theta.theta == b.theta.theta
        assert a.lipschitz_bound == b.lipschitz_bound

    def test_separation_scale_formula(self):
        # nu * (r_max / (4 N))^m
        assert separation_scale(1.0, 0.25, 4, 3) == pytest.approx((1.0 / 64.0) ** 3)


class TestCertify:
    def _c4_run(self, epsilon=0.5):
        choice = choose_depth(epsilon, 4, 0.25)
        rep = extract_separated_subifs(c4_ifs(), choice.m)
        return rep, choice

    def test_c4_passes(self):
        rep, choice = self._c4_run()
        cert = certify(rep, 0.5, choice.c0)
        assert cert.passed
        assert cert.dim_margin >= -1e-12
        assert rep.sim_dim >= 1.0 - 0.5 - 1e-12

    def test_dimension_margin_consistent(self):
        rep, choice = self._c4_run()
        cert = certify(rep, 0.5, choice.c0)
        assert cert.dim_margin == pytest.approx(rep.sim_dim - (1.0 - 0.5), abs=1e-12)

    def test_fails_when_epsilon_too_demanding(self):
        # the depth-1 extraction cannot reach dimension 1 - 0.01
        rep = extract_separated_subifs(c4_ifs(), 1)
        choice = choose_depth(0.01, 4, 0.25)
        cert = certify(rep, 0.01, choice.c0)
        assert isinstance(cert, Certificate)
        assert not cert.passed

    def test_lipschitz_bound_matches_formula(self):
        rep, choice = self._c4_run()
        cert = certify(rep, 0.5, choice.c0)
        eps = 0.5
        formula = (rep.diam / rep.nu) * math.exp(
            choice.c0 * (1.0 / eps) * math.log(1.0 / eps)
        )
        assert cert.lip_formula == pytest.approx(formula, rel=1e-12)
        # measured Lipschitz constant stays below the closed-form bound
        assert rep.lipschitz_bound <= cert.lip_formula * (1.0 + 1e-9)
