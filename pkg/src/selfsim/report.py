"""Run configuration, pipeline orchestration, and deterministic output.

A TOML config selects one of four pipelines and its parameters; ``run``
executes it end to end and returns a report tree in which every numeric
value is tagged with the formula or measurement that produced it. The JSON
and SVG writers are hand-rolled so that identical inputs produce
byte-identical output on every platform: floats are printed with 17
significant digits in JSON and 6 decimals in SVG, and no timestamps or
environment data enter the documents. Timings go to the stderr logger only.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from .cantor4 import (
    UNIT_SQUARE,
    adhoc_family,
    c4_ifs,
    family_levels,
    generic_family,
)
from .dimension import NestedStats, hata_bound
from .errors import ConfigError
from .favard import AngleGrid
from .geometry import Angle, ConvexPolygon, hull_of_points
from .graph import Frame, build_graph, containment_check, verify_hypotheses
from .ifs import Ifs, attractor_hull, generation, ifs_from_config
from .rotational import (
    RegularityConstants,
    build_nested_plan,
    certify_rotational,
    find_persistent_angle,
    good_angle_set,
    plan_pieces,
    uifs_hull,
    uniformize,
)
from .subifs import certify, choose_depth, extract_separated_subifs

log = logging.getLogger("selfsim")

PIPELINES = ("rotfree", "rotational", "cantor4-adhoc", "cantor4-generic")
SCHEMA_VERSION = 1
_DEFAULT_LEVEL_BUDGET = 2000
"""Default cap on the piece count of the deepest graph level; the default
depth is the largest one staying under it. Kept modest because slope
measurements between deep, nearly-abutting pieces amplify coordinate
rounding; at this budget the fitted slopes match the closed forms to well
under 1e-6."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConstants:
    """Configured stand-ins for non-explicit constants: projection-average
    floor c_M, energy constant c_e, measure regularity a and b, overlap
    multiplicity omega. All default to 1."""

    c_M: float = 1.0
    c_e: float = 1.0
    a: float = 1.0
    b: float = 1.0
    omega: float = 1.0

    def regularity(self) -> RegularityConstants:
        return RegularityConstants(a=self.a, b=self.b, omega=self.omega, c_e=self.c_e)


@dataclass(frozen=True)
class RunConfig:
    pipeline: str
    epsilon: float = 0.5
    eta: float = 0.5
    depth: int | None = None
    grid: int = 1024
    seed: int = 0
    ifs: Ifs | None = None
    seed_polygon: ConvexPolygon | None = None
    constants: RunConstants = field(default_factory=RunConstants)
    json_path: str | None = None
    svg_path: str | None = None

    def __post_init__(self) -> None:
        if self.pipeline not in PIPELINES:
            raise ConfigError(
                f"unknown pipeline {self.pipeline!r}; expected one of {PIPELINES}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not 0.0 < self.eta < 1.0:
            raise ConfigError("eta must lie in (0, 1)")
        if self.depth is not None and self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.grid < 8:
            raise ConfigError("grid resolution must be >= 8")
        if self.pipeline in ("rotfree", "rotational") and self.ifs is None:
            raise ConfigError(f"pipeline {self.pipeline!r} needs [[map]] entries")


_TOP_KEYS = {
    "pipeline",
    "epsilon",
    "eta",
    "depth",
    "grid",
    "seed",
    "osc",
    "map",
    "seed_polygon",
    "constants",
    "output",
}


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "pipeline" not in data:
        raise ConfigError("config must set 'pipeline'")

    ifs = None
    if "map" in data:
        ifs = ifs_from_config({"map": data["map"], "osc": data.get("osc", False)})

    seed_polygon = None
    if "seed_polygon" in data:
        sp = data["seed_polygon"]
        if not isinstance(sp, dict) or set(sp) != {"vertices"}:
            raise ConfigError("[seed_polygon] must contain exactly 'vertices'")
        try:
            pts = [(float(x), float(y)) for x, y in sp["vertices"]]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed seed_polygon vertices: {exc}") from exc
        seed_polygon = hull_of_points(pts)

    consts = RunConstants()
    if "constants" in data:
        cd = data["constants"]
        if not isinstance(cd, dict):
            raise ConfigError("[constants] must be a table")
        unknown = set(cd) - {"c_M", "c_e", "a", "b", "omega"}
        if unknown:
            raise ConfigError(f"unknown constants keys: {sorted(unknown)}")
        try:
            consts = RunConstants(**{k: float(v) for k, v in cd.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed constants: {exc}") from exc

    json_path = svg_path = None
    if "output" in data:
        od = data["output"]
        if not isinstance(od, dict) or set(od) - {"json", "svg"}:
            raise ConfigError("[output] accepts only 'json' and 'svg' paths")
        json_path = od.get("json")
        svg_path = od.get("svg")

    def _num(key: str, default, caster):
        try:
            return caster(data.get(key, default))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed {key!r}: {exc}") from exc

    depth = data.get("depth")
    if depth is not None:
        depth = _num("depth", None, int)
    return RunConfig(
        pipeline=str(data["pipeline"]),
        epsilon=_num("epsilon", 0.5, float),
        eta=_num("eta", 0.5, float),
        depth=depth,
        grid=_num("grid", 1024, int),
        seed=_num("seed", 0, int),
        ifs=ifs,
        seed_polygon=seed_polygon,
        constants=consts,
        json_path=json_path,
        svg_path=svg_path,
    )


def load_config(path: str) -> RunConfig:
    try:
        import tomllib  # Python >= 3.11
    except ImportError:  # pragma: no cover - depends on interpreter version
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid TOML: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# tagged report values
# ---------------------------------------------------------------------------


def tag(value: Any, source: str) -> dict:
    """A report numeric together with the formula or measurement that
    produced it."""
    return {"value": value, "source": source}


@dataclass(frozen=True)
class Scene:
    """Renderable output of a pipeline: filled pieces, an optional graph
    polyline in world coordinates, and an optional frame angle."""

    polygons: tuple[ConvexPolygon, ...]
    polyline: tuple[tuple[float, float], ...] = ()
    frame_theta: float | None = None


@dataclass(frozen=True)
class RunResult:
    report: dict
    passed: bool
    scene: Scene | None


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------


def _seed_hull(config: RunConfig, ifs: Ifs) -> ConvexPolygon:
    if config.seed_polygon is not None:
        return config.seed_polygon
    hull, _ = attractor_hull(ifs)
    return hull


def _uniform_hata(
    scales: Sequence[float], n_words: int, diam: float, depth: int = 15
) -> tuple[float, list[float]] | None:
    """Branching dimension bound for a word family iterated uniformly;
    None when the first-level diameter is not below 1 (log-sign guard)."""
    lo, hi = min(scales), max(scales)
    if hi * diam >= 1.0 or n_words < 1:
        return None
    stats = NestedStats(
        levels=tuple(
            (n_words, lo ** (n + 1) * diam, hi ** (n + 1) * diam)
            for n in range(depth)
        )
    )
    return hata_bound(stats)


def _run_rotfree(config: RunConfig) -> RunResult:
    ifs = config.ifs
    assert ifs is not None
    dc = choose_depth(config.epsilon, ifs.n_maps, ifs.r_max)
    grid = AngleGrid(config.grid)
    m = config.depth if config.depth is not None else dc.m
    rep = extract_separated_subifs(
        ifs, m, grid=grid, c_m=config.constants.c_M, ahlfors_b=config.constants.b
    )
    cert = certify(rep, config.epsilon, dc.c0)
    scales = [
        math.prod(ifs.maps[j - 1].r for j in w) for w in rep.sub_words
    ]
    hata = _uniform_hata(scales, len(rep.sub_words), rep.diam)
    report = {
        "pipeline": "rotfree",
        "epsilon": tag(config.epsilon, "config"),
        "depth_m": tag(rep.m, "m = ceil(c2/eps * log(1/eps)) or config depth"),
        "c0": tag(dc.c0, "c0 = c2 * log(4N/r_max)"),
        "theta": tag(rep.theta.theta, "argmax of grid projection lengths"),
        "delta": tag(rep.delta, "nu * (r_max/(4N))^m"),
        "sub_words": [list(w) for w in rep.sub_words],
        "sim_dim": tag(rep.sim_dim, "root of sum(scale^s) = 1 over sub-words"),
        "s0_bound": tag(
            rep.s0_bound, "1 - (log m + log c1)/(m log(1/r_max))"
        ),
        "lipschitz_measured": tag(rep.lipschitz_bound, "diam(K)/delta"),
        "lipschitz_formula": tag(
            cert.lip_formula, "(diam/nu) exp(c0/eps log(1/eps))"
        ),
        "hata_bound": tag(
            hata[0] if hata else None,
            "min over last half of log(prod v)/(-log d_n), depth 15",
        ),
        "certificate": {
            "passed": cert.passed,
            "dim_margin": tag(cert.dim_margin, "sim_dim - (1 - eps)"),
            "lip_margin": tag(cert.lip_margin, "formula - measured"),
            "note": cert.note,
        },
    }
    hull, _ = attractor_hull(ifs)
    gen = generation(ifs, hull, rep.m)
    kept = set(rep.sub_words)
    scene = Scene(
        polygons=tuple(p for w, p in gen.pieces if w in kept),
        frame_theta=rep.theta.theta,
    )
    return RunResult(report=report, passed=cert.passed, scene=scene)


def _default_family_depth(branching: int, cap: int = _DEFAULT_LEVEL_BUDGET) -> int:
    depth = 1
    while branching ** (depth + 1) <= cap:
        depth += 1
    return depth


def _run_cantor4(config: RunConfig) -> RunResult:
    if config.pipeline == "cantor4-adhoc":
        m = 1
        while 1.0 - adhoc_family(m).s_m > config.epsilon and m < 12:
            m += 1
        fam = adhoc_family(m)
        family_name = "recursive"
    else:
        m = max(1, math.ceil(1.0 / (2.0 * config.epsilon) - 1e-9))
        fam = generic_family(m)
        family_name = "last-letter-restricted"
    depth = (
        config.depth
        if config.depth is not None
        else _default_family_depth(len(fam.words))
    )
    levels = family_levels(fam.words, depth)
    frame = Frame(Angle(fam.theta_m))
    hyp = verify_hypotheses(levels, frame)
    run = build_graph(levels, frame, hyp)
    radius = hyp.c * hyp.sigma**depth
    cont = containment_check(levels[-1], run.deepest, radius)
    lam_ok = (
        run.measured_lipschitz <= fam.lambda_m + 1e-9
        and hyp.lam <= fam.lambda_m + 1e-6
    )
    passed = lam_ok and cont.passed
    report = {
        "pipeline": config.pipeline,
        "family": family_name,
        "epsilon": tag(config.epsilon, "config"),
        "m": tag(m, "smallest m with 1 - s_m <= eps"),
        "depth": tag(depth, "config depth or piece-budget default"),
        "word_count": tag(len(fam.words), "family size"),
        "theta": tag(fam.theta_m, "closed-form frame angle"),
        "sim_dim": tag(fam.s_m, "closed-form similarity dimension"),
        "lambda_formula": tag(fam.lambda_m, "closed-form slope bound"),
        "lambda_fitted": tag(hyp.lam, "max piece and connector slope over levels"),
        "lipschitz_measured": tag(
            run.measured_lipschitz, "max segment slope of the deepest graph"
        ),
        "sigma": tag(hyp.sigma, "worst consecutive level-diameter ratio"),
        "c_envelope": tag(hyp.c, "max D_n / sigma^n"),
        "sup_diffs": [
            tag(d, "sup |g_{n+1} - g_n| at breakpoints") for d in run.sup_diffs
        ],
        "tail_bound": tag(run.tail_bound, "c sigma^L / (1 - sigma)"),
        "containment": {
            "passed": cont.passed,
            "radius": tag(radius, "c * sigma^depth"),
            "max_distance": tag(cont.max_distance, "max vertical vertex distance"),
        },
        "certificate": {"passed": passed},
    }
    scene = Scene(
        polygons=tuple(levels[-1]),
        polyline=tuple(run.deepest.world_polyline()),
        frame_theta=fam.theta_m,
    )
    return RunResult(report=report, passed=passed, scene=scene)


def _run_rotational(config: RunConfig) -> RunResult:
    ifs = config.ifs
    assert ifs is not None
    uifs = uniformize(ifs, config.eta)
    hull = config.seed_polygon or uifs_hull(uifs)
    depth = config.depth if config.depth is not None else 20
    grid = AngleGrid(config.grid)
    consts = config.constants.regularity()
    # The level-1 good set is reused at every level: the uniform system's
    # generations are self-similar up to the common rotation, which the
    # per-level frame already accounts for, and deeper generations are far
    # beyond the piece cap.
    gar = good_angle_set(uifs, 1, config.epsilon, grid, hull, consts)
    sets = [gar.angle_set] * depth
    theta, density = find_persistent_angle(
        uifs, sets, config.epsilon, depth, grid, tiebreak_counts=gar.counts
    )
    plan = build_nested_plan(uifs, theta, config.epsilon, depth, hull)
    cert = certify_rotational(plan, config.epsilon, hull)
    passed = cert.passed
    report = {
        "pipeline": "rotational",
        "epsilon": tag(config.epsilon, "config"),
        "eta": tag(config.eta, "config"),
        "kappa": tag(uifs.kappa, "smallest depth hitting the gamma window"),
        "kappa_bracket": [
            tag(uifs.kappa_bracket[0], "g_inv(M/(2 T eta))"),
            tag(uifs.kappa_bracket[1], "g_inv(3M/(4 T eta))"),
        ],
        "kappa_in_bracket": uifs.kappa_in_bracket,
        "r": tag(uifs.r, "prod r_k^(v_k)"),
        "r_bracket": [
            tag(uifs.r_bracket[0], "c1 (c2 eta)^(c3/eta)"),
            tag(uifs.r_bracket[1], "((3/2) c2 eta)^(c3/(3 eta))"),
        ],
        "r_in_bracket": uifs.r_in_bracket,
        "alpha": tag(uifs.alpha, "common word rotation mod 2 pi"),
        "gamma": tag(uifs.gamma, "log(#words kept)/log(1/r)"),
        "word_count": tag(uifs.n_maps, "trimmed uniform family size"),
        "good_angle_measure": tag(gar.angle_set.measure, "measure of good arcs"),
        "good_angle_threshold": tag(
            gar.threshold, "eps * delta0 * r^(-gamma)"
        ),
        "theta": tag(theta.theta, "grid argmax of minimum orbit density"),
        "density_min": tag(min(density.per_n), "min over n of orbit density"),
        "level_counts": [tag(c, "greedy separated child count") for c in plan.counts],
        "component_counts": [
            tag(c, "product of level counts") for c in plan.component_counts
        ],
        "good_levels": tag(
            cert.good_levels, "levels with count >= r^(-(1-eps/2)); reported only"
        ),
        "hata_bound": tag(
            cert.hata, "min over last half of log(prod N)/(-log d_n)"
        ),
        "lipschitz_measured": tag(cert.lip_realized, "(diam/r) max(1/nu, 1)"),
        "lipschitz_formula": tag(
            cert.lip_bound,
            "(diam/prod r_k) max(1/nu,1) exp(20 M/eps log(1/eps))",
        ),
        "certificate": {
            "passed": passed,
            "dim_margin": tag(cert.dim_margin, "hata - (1 - eps)"),
            "lip_margin": tag(cert.lip_margin, "formula - measured"),
        },
    }
    render_depth = min(len(plan.levels), _render_depth(uifs.n_maps))
    scene = Scene(
        polygons=tuple(plan_pieces(plan, render_depth)),
        frame_theta=theta.theta,
    )
    return RunResult(report=report, passed=passed, scene=scene)


def _render_depth(branching: int, cap: int = 4096) -> int:
    depth = 1
    while branching ** (depth + 1) <= cap:
        depth += 1
    return depth


def run(config: RunConfig) -> RunResult:
    """Execute the configured pipeline and assemble the tagged report."""
    start = time.perf_counter()
    if config.pipeline == "rotfree":
        result = _run_rotfree(config)
    elif config.pipeline == "rotational":
        result = _run_rotational(config)
    else:
        result = _run_cantor4(config)
    elapsed = time.perf_counter() - start
    log.info("pipeline %s finished in %.3f s", config.pipeline, elapsed)
    report = {
        "schema": SCHEMA_VERSION,
        "seed": config.seed,
        "grid": config.grid,
        **result.report,
    }
    return RunResult(report=report, passed=result.passed, scene=result.scene)


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = f"{x:.17g}"
    # make the float-ness explicit so round-tripping preserves types
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def json_dumps(obj: Any, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant
    digits, 2-space indentation, newline-terminated at the top level."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k), ensure_ascii=True)}: "
            f"{json_dumps(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{json_dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise ConfigError(f"cannot serialize {type(obj).__name__} to JSON")


def write_json(report: dict, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(json_dumps(report))
        fh.write("\n")


# ---------------------------------------------------------------------------
# deterministic SVG
# ---------------------------------------------------------------------------


def _f6(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def render_svg(scene: Scene, size: float = 640.0) -> str:
    """Deterministic SVG: filled polygons, an optional polyline, and dashed
    frame-axis arrows; fixed viewBox, 6-decimal coordinates."""
    if not scene.polygons and not scene.polyline:
        raise ConfigError("cannot render an empty scene")
    pts = [v for p in scene.polygons for v in p.vertices] + list(scene.polyline)
    x0 = min(p[0] for p in pts)
    x1 = max(p[0] for p in pts)
    y0 = min(p[1] for p in pts)
    y1 = max(p[1] for p in pts)
    span = max(x1 - x0, y1 - y0, 1e-9)
    margin = 0.05 * span
    scale = size / (span + 2.0 * margin)

    def world_to_svg(p: tuple[float, float]) -> tuple[float, float]:
        # y grows downward in SVG
        return (
            (p[0] - x0 + margin) * scale,
            size - (p[1] - y0 + margin) * scale,
        )

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_f6(size)} '
        f'{_f6(size)}" width="{_f6(size)}" height="{_f6(size)}">',
    ]
    for poly in scene.polygons:
        coords = " ".join(
            f"{_f6(px)},{_f6(py)}"
            for px, py in (world_to_svg(v) for v in poly.vertices)
        )
        lines.append(
            f'<polygon points="{coords}" fill="#c7d7ef" stroke="#31425c" '
            'stroke-width="0.5"/>'
        )
    if scene.frame_theta is not None:
        cx, cy = world_to_svg((0.5 * (x0 + x1), 0.5 * (y0 + y1)))
        half = 0.45 * size
        for extra, color in ((0.0, "#3a7a3a"), (0.5 * math.pi, "#7a3a7a")):
            ang = scene.frame_theta + extra
            dx = half * math.cos(ang)
            dy = -half * math.sin(ang)  # SVG y-down
            lines.append(
                f'<line x1="{_f6(cx - dx)}" y1="{_f6(cy - dy)}" '
                f'x2="{_f6(cx + dx)}" y2="{_f6(cy + dy)}" stroke="{color}" '
                'stroke-width="1" stroke-dasharray="6 4"/>'
            )
            tip = (cx + dx, cy + dy)
            back = 0.02 * size
            bx = back * math.cos(ang)
            by = -back * math.sin(ang)
            px, py = -by, bx
            arrow = (
                f"{_f6(tip[0])},{_f6(tip[1])} "
                f"{_f6(tip[0] - bx + 0.5 * px)},{_f6(tip[1] - by + 0.5 * py)} "
                f"{_f6(tip[0] - bx - 0.5 * px)},{_f6(tip[1] - by - 0.5 * py)}"
            )
            lines.append(f'<polygon points="{arrow}" fill="{color}"/>')
    if scene.polyline:
        coords = " ".join(
            f"{_f6(px)},{_f6(py)}"
            for px, py in (world_to_svg(v) for v in scene.polyline)
        )
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="#a8322f" '
            'stroke-width="1.25"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(scene: Scene, path: str, size: float = 640.0) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(render_svg(scene, size))
