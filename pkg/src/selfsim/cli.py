"""Command-line driver.

Subcommands: ``run`` (full pipeline with JSON report and optional SVG),
``favard`` (projection-average report for a generation), ``graph``
(piecewise-linear graph construction for the built-in subfamilies),
``dims`` (branching dimension bound and flatness sums), and ``render``
(generation figure). Exit codes: 0 success, 1 certificate failure, 2 input
error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .dimension import beta_sum, hata_bound, uniform_family_stats
from .errors import InputError, ResourceCapError, SelfsimError
from .favard import AngleGrid, favard_length
from .ifs import attractor_hull, generation
from .report import (
    RunConfig,
    Scene,
    json_dumps,
    load_config,
    run,
    tag,
    write_json,
    write_svg,
)

log = logging.getLogger("selfsim")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description=(
            "Self-similar set pipelines: separated sub-family extraction, "
            "Lipschitz graph construction, projection averages, and "
            "dimension bounds."
        ),
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log stage timings to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool = True) -> None:
        p.add_argument(
            "--config", required=needs_config, help="TOML configuration file"
        )
        p.add_argument("--epsilon", type=float, help="override config epsilon")
        p.add_argument("--depth", type=int, help="override config depth")
        p.add_argument("--grid", type=int, help="override angle grid resolution")
        p.add_argument("--seed", type=int, help="override config random seed")
        p.add_argument("--out", help="output path (JSON, or SVG for render)")

    common(sub.add_parser("run", help="execute the configured pipeline"))
    common(sub.add_parser("favard", help="projection-average of a generation"))
    common(sub.add_parser("graph", help="graph construction for a subfamily"))
    common(sub.add_parser("dims", help="dimension bound and flatness sums"))
    common(sub.add_parser("render", help="SVG figure of a generation"))
    return parser


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    if args.epsilon is not None:
        updates["epsilon"] = args.epsilon
    if args.depth is not None:
        updates["depth"] = args.depth
    if args.grid is not None:
        updates["grid"] = args.grid
    if args.seed is not None:
        updates["seed"] = args.seed
    return dataclasses.replace(config, **updates) if updates else config


def _emit(report: dict, out: str | None) -> None:
    if out:
        write_json(report, out)
    else:
        sys.stdout.write(json_dumps(report) + "\n")


def _config_ifs(config: RunConfig):
    if config.ifs is not None:
        return config.ifs
    from .cantor4 import c4_ifs

    return c4_ifs()


def _cmd_run(config: RunConfig, args: argparse.Namespace) -> int:
    result = run(config)
    _emit(result.report, args.out or config.json_path)
    if config.svg_path and result.scene is not None:
        write_svg(result.scene, config.svg_path)
    return 0 if result.passed else 1


def _cmd_favard(config: RunConfig, args: argparse.Namespace) -> int:
    ifs = _config_ifs(config)
    hull = config.seed_polygon or attractor_hull(ifs)[0]
    depth = config.depth if config.depth is not None else 3
    gen = generation(ifs, hull, depth)
    rep = favard_length(gen, AngleGrid(config.grid))
    _emit(
        {
            "schema": 1,
            "depth": depth,
            "grid": config.grid,
            "favard": tag(rep.value, "midpoint average of projection lengths"),
            "argmax_angle": tag(rep.argmax_angle, "grid angle of longest projection"),
            "argmax_length": tag(rep.argmax_length, "longest projection length"),
        },
        args.out,
    )
    return 0


def _cmd_graph(config: RunConfig, args: argparse.Namespace) -> int:
    if config.pipeline not in ("cantor4-adhoc", "cantor4-generic"):
        raise InputError(
            "the graph subcommand needs pipeline 'cantor4-adhoc' or "
            "'cantor4-generic'"
        )
    result = run(config)
    _emit(result.report, args.out or config.json_path)
    if config.svg_path and result.scene is not None:
        write_svg(result.scene, config.svg_path)
    return 0 if result.passed else 1


def _cmd_dims(config: RunConfig, args: argparse.Namespace) -> int:
    ifs = _config_ifs(config)
    hull = config.seed_polygon or attractor_hull(ifs)[0]
    report: dict = {"schema": 1}
    scales = [m.r for m in ifs.maps]
    if max(scales) - min(scales) <= 1e-12 and max(scales) * hull.diameter() < 1.0:
        depth = config.depth if config.depth is not None else 15
        stats = uniform_family_stats(ifs.n_maps, scales[0], hull.diameter(), depth)
        bound, seq = hata_bound(stats)
        report["hata_bound"] = tag(
            bound, "min over last half of log(prod v)/(-log d_n)"
        )
        report["hata_sequence"] = [tag(v, "per-level bound") for v in seq]
    gen_depth = 3 if ifs.n_maps**3 <= 4096 else 2
    gen = generation(ifs, hull, gen_depth)
    beta = beta_sum(gen.polygons, max_depth=4)
    report["beta_generation_depth"] = gen_depth
    report["beta_per_depth"] = [
        tag(v, "sum of beta^2 diam(Q) over occupied cubes")
        for v in beta.per_depth_sums
    ]
    report["beta_total"] = tag(beta.total, "sum over depths")
    _emit(report, args.out)
    return 0


def _cmd_render(config: RunConfig, args: argparse.Namespace) -> int:
    ifs = _config_ifs(config)
    hull = config.seed_polygon or attractor_hull(ifs)[0]
    depth = config.depth if config.depth is not None else 2
    gen = generation(ifs, hull, depth)
    scene = Scene(polygons=gen.polygons)
    out = args.out or config.svg_path
    if not out:
        raise InputError("render needs --out (or [output].svg in the config)")
    write_svg(scene, out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _apply_overrides(load_config(args.config), args)
        handler = {
            "run": _cmd_run,
            "favard": _cmd_favard,
            "graph": _cmd_graph,
            "dims": _cmd_dims,
            "render": _cmd_render,
        }[args.command]
        return handler(config, args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except SelfsimError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
