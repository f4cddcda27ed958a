"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS line with its measured margins; pytest -v adds
the per-test verdict.
"""

import itertools
import json
import math
import random
import subprocess
import sys
import time

import pytest

from selfsim.cantor4 import (
    UNIT_SQUARE,
    DaviesRect,
    adhoc_family,
    adhoc_lambda,
    c4_ifs,
    c4_measure_bracket,
    corner_grandchildren,
    davies_inequality_check,
    davies_m,
    family_levels,
    generic_family,
    generic_lambda,
)
from selfsim.dimension import hata_bound, uniform_family_stats
from selfsim.favard import AngleGrid, favard_length, favard_of_neighborhood
from selfsim.geometry import (
    Angle,
    covers_concentric,
    hull_of_points,
    interval_gap,
    vitali_extract_indices,
)
from selfsim.graph import Frame, verify_hypotheses
from selfsim.ifs import generation, similarity_dimension
from selfsim.report import load_config, run
from selfsim.rotational import (
    build_nested_plan,
    certify_rotational,
    find_persistent_angle,
    good_angle_set,
    rotation_density,
    uifs_hull,
    uniformize,
)

SQRT2 = math.sqrt(2.0)


def test_criterion_01_similarity_dimensions():
    t0 = time.monotonic()
    err_c4 = abs(similarity_dimension([0.25] * 4) - 1.0)
    assert err_c4 <= 1e-12
    s1 = adhoc_family(1).s_m
    assert abs(s1 - math.log(3.0) / math.log(4.0)) <= 1e-10
    s2 = adhoc_family(2).s_m
    assert abs(s2 - math.log((3.0 + math.sqrt(17.0)) / 2.0) / math.log(4.0)) <= 1e-10
    s3 = adhoc_family(3).s_m
    assert abs(4.0**s3 - 3.8026) <= 1e-4 * math.log(4.0) * 4.0**s3 + 1e-4
    assert abs(s3 - math.log(3.8026) / math.log(4.0)) <= 1e-4
    for m in range(1, 7):
        assert generic_family(m).s_m == pytest.approx(1.0 - 1.0 / (2.0 * m), abs=1e-12)
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    print(
        f"criterion 1 PASS: s(C4) err {err_c4:.2e} <= 1e-12, s1/s2 err <= 1e-10, "
        f"s3 to 1e-4, generic exact; {elapsed:.2f}s < 1s"
    )


def test_criterion_02_projection_measure_bracket():
    t0 = time.monotonic()
    worst_lo = worst_hi = 0.0
    for n in range(1, 7):
        lo, hi = c4_measure_bracket(n)
        worst_lo = max(worst_lo, abs(lo - 3.0 / math.sqrt(5.0)))
        worst_hi = max(worst_hi, abs(hi - SQRT2))
    assert worst_hi == 0.0  # cover sum is exactly sqrt(2) at every level
    assert worst_lo <= 1e-9
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    print(
        f"criterion 2 PASS: cover sum = sqrt(2) exactly, projection err "
        f"{worst_lo:.2e} <= 1e-9 for n=1..6; {elapsed:.2f}s < 5s"
    )


def test_criterion_03_adhoc_graph_construction():
    t0 = time.monotonic()
    from selfsim.graph import build_graph, containment_check

    fam = adhoc_family(1)
    levels = family_levels(fam.words, 6)
    frame = Frame(Angle(fam.theta_m))
    hyp = verify_hypotheses(levels, frame)
    graphs_run = build_graph(levels, frame, hyp)
    worst_lip = 0.0
    for g in graphs_run.graphs:
        worst_lip = max(worst_lip, g.lipschitz())
        assert g.lipschitz() <= 3.0 + 1e-9
    for n, d in enumerate(graphs_run.sup_diffs, start=1):
        assert d <= SQRT2 * 4.0**-n + 1e-12
    for n in range(1, 7):
        # levels[n-1] / graphs[n-1] hold depth-n data
        rep = containment_check(
            levels[n - 1], graphs_run.graphs[n - 1], SQRT2 * 4.0**-n
        )
        assert rep.passed, f"containment failed at level {n}: {rep.max_distance}"
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    print(
        f"criterion 3 PASS: Lip <= 3+1e-9 (worst {worst_lip:.12f}), sup diffs <= "
        f"sqrt(2) 4^-n, containment within sqrt(2) 4^-n for n=1..6; "
        f"{elapsed:.2f}s < 10s"
    )


def test_criterion_04_lipschitz_bound_formulas():
    budget = 2000
    worst_margin = math.inf
    for m in range(1, 5):
        for fam, lam_formula in (
            (adhoc_family(m), adhoc_lambda(m)),
            (generic_family(m), generic_lambda(m)),
        ):
            depth = 1
            while len(fam.words) ** (depth + 1) <= budget:
                depth += 1
            levels = family_levels(fam.words, depth)
            hyp = verify_hypotheses(levels, Frame(Angle(fam.theta_m)))
            worst_margin = min(worst_margin, lam_formula - hyp.lam)
            assert lam_formula - hyp.lam >= -1e-6, (m, type(fam).__name__)
    assert worst_margin >= -1e-6
    # table envelopes: fitted c * eps^-2 (recursive family, c fitted at m=1)
    c_dim = 2.0 * (1.0 - adhoc_family(1).s_m)
    for m in range(1, 5):
        eps = 1.0 - adhoc_family(m).s_m
        envelope = (5.0 / 3.0) * (2.0 * c_dim) ** 2 * eps**-2
        assert adhoc_lambda(m) <= envelope + 1e-9, m
    # and c * 2^(1/eps) for the last-letter-restricted family
    c_gen = (2.0 * ((5.0 / 18.0) * 4.0 + 2.0 / 3.0 - 1.0) + 1.0) / 4.0
    for m in range(1, 5):
        eps = 1.0 / (2.0 * m)
        envelope = c_gen * 2.0 ** (1.0 / eps)
        assert generic_lambda(m) <= envelope + 1e-9, m
    print(
        f"criterion 4 PASS: closed-form lambda >= fitted lambda (worst margin "
        f"{worst_margin:.2e} >= -1e-6) and both envelopes hold for m=1..4"
    )


def test_criterion_05_vitali_lemma():
    t0 = time.monotonic()
    rng = random.Random(20260823)
    delta = 1.0
    for trial in range(10**4):
        n = rng.randint(1, 12)
        eps = rng.uniform(0.0, 2.0) * delta
        # generator regime: lengths in [2 delta, 6 delta], where the stated
        # (3 + eps/delta) cover factor is provable
        ivs = []
        for _ in range(n):
            lo = rng.uniform(-20.0, 20.0)
            ivs.append((lo, lo + rng.uniform(2.0 * delta, 6.0 * delta)))
        idx = vitali_extract_indices(ivs, eps=eps, delta=delta)
        kept = [ivs[i] for i in idx]
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                assert interval_gap(kept[i], kept[j]) > eps - 1e-9, trial
        factor = 3.0 + eps / delta
        for iv in ivs:
            assert any(
                covers_concentric(iv, k, factor + 1e-9) for k in kept
            ), trial
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    print(
        f"criterion 5 PASS: 10^4 seeded inputs, output eps-separated and "
        f"(3+eps/delta)-cover holds; {elapsed:.2f}s < 5s"
    )


def test_criterion_06_favard():
    t0 = time.monotonic()
    grid = AngleGrid(1024)
    square = generation(c4_ifs(), UNIT_SQUARE, 0)
    fav_square = favard_length(square, grid).value
    assert abs(fav_square - 4.0 / math.pi) <= 1e-4
    favs = {}
    worst_ratio = 0.0
    for n in range(1, 6):
        gen = generation(c4_ifs(), UNIT_SQUARE, n)
        favs[n] = favard_length(gen, grid).value
        delta_n = (1.0 / 64.0) ** n
        inflated = favard_of_neighborhood(gen, delta_n, grid).value
        worst_ratio = max(worst_ratio, inflated / favs[n])
        assert inflated <= 10.0 * favs[n]
    for n in (6, 7):
        favs[n] = favard_length(generation(c4_ifs(), UNIT_SQUARE, n), grid).value
    floor = 0.5 * favs[1]
    for n in range(1, 8):
        assert n * favs[n] >= floor, n
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    print(
        f"criterion 6 PASS: square Favard err {abs(fav_square - 4.0 / math.pi):.2e} "
        f"<= 1e-4, neighborhood ratio <= {worst_ratio:.3f} < 10 for n=1..5, "
        f"n*Fav(C_n) >= 0.5 * Fav(C_1) for n<=7; {elapsed:.1f}s < 60s"
    )


def test_criterion_07_hata_bound():
    t0 = time.monotonic()
    worst = 0.0
    # the square system: 4 children at scale 1/4, analytic dimension 1
    val, _ = hata_bound(uniform_family_stats(4, 0.25, SQRT2, 15))
    worst = max(worst, abs(val - 1.0))
    # the last-letter-restricted families: 2^(2m-1) children at scale 4^-m
    for m in range(1, 7):
        fam = generic_family(m)
        stats = uniform_family_stats(len(fam.words), 4.0**-m, SQRT2, 15)
        val, _ = hata_bound(stats)
        worst = max(worst, abs(val - fam.s_m))
    assert worst <= 0.03
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    print(
        f"criterion 7 PASS: depth-15 surrogate within {worst:.4f} <= 0.03 of the "
        f"analytic dimension; {elapsed:.2f}s < 1s"
    )


def test_criterion_08_davies_functional():
    t0 = time.monotonic()
    cells = corner_grandchildren()
    mu = davies_m(cells[0])[2]
    expected = {1: 1.0, 2: 2.5, 3: 3.25, 4: 4.0}
    for k, factor in expected.items():
        for sub in itertools.combinations(range(4), k):
            pts = [v for i in sub for v in cells[i].vertices]
            val = davies_m(hull_of_points(pts))[2]
            assert val == pytest.approx(factor * mu, abs=1e-12), (k, sub)
    rng = random.Random(8)
    worst = math.inf
    for _ in range(10**4):
        rect = DaviesRect(
            center=(rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)),
            half_diag=rng.uniform(1e-3, 1.0),
            half_anti=rng.uniform(1e-3, 1.0),
        )
        chk = davies_inequality_check(rect)
        worst = min(worst, chk.margin)
        assert chk.margin >= -1e-9
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    print(
        f"criterion 8 PASS: cube cases exactly (1, 5/2, 13/4, 4) x mu; 10^4 "
        f"rectangles, worst margin {worst:.2e} >= -1e-9; {elapsed:.2f}s < 5s"
    )


def test_criterion_09_rotational_pipeline_smoke():
    t0 = time.monotonic()
    cfg = load_config("configs/rotational_smoke.toml")
    eta, epsilon, depth = cfg.eta, cfg.epsilon, cfg.depth
    u = uniformize(cfg.ifs, eta=eta)
    assert 1.0 - eta - 1e-12 <= u.gamma <= 1.0 - eta / 2.0 + 1e-12
    hull = uifs_hull(u)
    gar = good_angle_set(u, 1, epsilon=epsilon, hull=hull)
    theta, _ = find_persistent_angle(
        u,
        [gar.angle_set] * depth,
        epsilon=epsilon,
        n_max=depth,
        tiebreak_counts=gar.counts,
    )
    dens = rotation_density(theta.theta, u.alpha, gar.angle_set, depth)
    min_density = min(dens.per_n)
    assert min_density >= 1.0 - epsilon / 2.0
    plan = build_nested_plan(u, theta, epsilon, depth, hull=hull)
    cert = certify_rotational(plan, epsilon, hull=hull)
    assert cert.hata >= 1.0 - epsilon - 0.05
    assert cert.passed
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    print(
        f"criterion 9 PASS: gamma {u.gamma:.5f} in [{1 - eta}, {1 - eta / 2}], "
        f"min density {min_density:.3f} >= {1 - epsilon / 2}, Hata {cert.hata:.4f} "
        f">= {1 - epsilon - 0.05}; {elapsed:.1f}s < 120s"
    )


def test_criterion_10_determinism(tmp_path):
    outs = []
    for tag_ in ("a", "b"):
        json_path = tmp_path / f"{tag_}.json"
        svg_path = tmp_path / f"{tag_}.svg"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "selfsim.cli",
                "run",
                "--config",
                "configs/c4_adhoc.toml",
                "--out",
                str(json_path),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        render = subprocess.run(
            [
                sys.executable,
                "-m",
                "selfsim.cli",
                "render",
                "--config",
                "configs/c4_adhoc.toml",
                "--depth",
                "3",
                "--out",
                str(svg_path),
            ],
            capture_output=True,
            text=True,
        )
        assert render.returncode == 0
        outs.append((json_path.read_bytes(), svg_path.read_bytes()))
    assert outs[0][0] == outs[1][0]
    assert outs[0][1] == outs[1][1]
    json.loads(outs[0][0])
    print("criterion 10 PASS: repeated runs produce byte-identical JSON and SVG")
