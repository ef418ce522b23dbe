"""The ``peacock`` command: generate fixtures, color layouts and render colored layouts as SVG."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bundling import DetectionParams, dump_bundles
from .coloring import OptimizerConfig
from .config import (
    DEFAULT_DIMS,
    DEFAULT_EPSILON,
    DEFAULT_K_MIN,
    DEFAULT_MAX_ITERS,
    DEFAULT_REL_TOL,
    DEFAULT_SEED,
    DEFAULT_T_FRAC,
    ColoringMethod,
    FixtureStyle,
    InitMode,
    SampleMode,
)
from .errors import PeacockError, ParameterError
from .fixtures import detects_as_generated, make_crossing_bundles, make_ordered_bundles, save_ground_truth
from .model import load_layout, save_layout
from .pipeline import (
    PipelineDiagnostics,
    display_colors,
    load_colors,
    run_baseline,
    run_peacock,
    save_colors,
    show_diagnostics,
    stage,
)
from .render import RenderOptions, fan_segment_map, render_svg, save_svg

_log = logging.getLogger(__name__)


def _add_render_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("SVG style")
    group.add_argument("--stroke-width", type=float, default=1.5)
    group.add_argument("--opacity", type=float, default=0.8, help="Stroke opacity of the edges.")
    group.add_argument("--show-nodes", action="store_true", help="Draw the nodes of the layout.")
    group.add_argument("--flip-y", action="store_true", help="Mirror the y axis.")


def _render_options(args: argparse.Namespace, fans_only: bool = False) -> RenderOptions:
    return RenderOptions(
        stroke_width=args.stroke_width,
        opacity=args.opacity,
        show_nodes=args.show_nodes,
        fans_only=fans_only,
        flip_y=args.flip_y,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peacock", description="Color the edges of bundled graph drawings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Log more, may be repeated.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Generate a synthetic bundled layout with known bundles.")
    gen.add_argument("--style", choices=FixtureStyle.choices(), default="ordered")
    gen.add_argument("--groups", type=int, default=6, help="Node groups of the ordered style (even).")
    gen.add_argument("--edges", type=int, default=6, help="Edges per bundle.")
    gen.add_argument("--bundles", type=int, default=3, help="Bundles of the crossing style.")
    gen.add_argument("--reverse-last", action="store_true", help="Connect the last ordered bundle in reverse.")
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--out", type=Path, required=True, help="Layout JSON to write.")
    gen.add_argument("--truth", type=Path, default=None,
                     help="Ground truth JSON to write, <out>.truth.json by default.")

    color = subparsers.add_parser("color", help="Compute edge colors for a layout.")
    color.add_argument("--input", type=Path, required=True, help="Layout JSON.")
    color.add_argument("--method", choices=ColoringMethod.choices(), default="peacock")
    color.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                       help="Weight of non-bundled pairs, in [0, 1].")
    threshold = color.add_mutually_exclusive_group()
    threshold.add_argument("--t-frac", type=float, default=None,
                           help=f"Distance threshold as a fraction of the layout size (default {DEFAULT_T_FRAC}).")
    threshold.add_argument("--t-abs", type=float, default=None, help="Absolute distance threshold.")
    color.add_argument("--kmin", type=float, default=DEFAULT_K_MIN,
                       help="Fraction of close control points needed for a bundle, in (0, 1].")
    color.add_argument("--samples", choices=SampleMode.choices(), default="controls")
    color.add_argument("--dims", type=int, choices=(1, 2, 3), default=DEFAULT_DIMS)
    color.add_argument("--seed", type=int, default=DEFAULT_SEED)
    color.add_argument("--init", choices=InitMode.choices(), default="endpoint-projection")
    color.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    color.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    color.add_argument("--threads", type=int, default=1, help="Detection worker threads, 0 uses all cores.")
    color.add_argument("--progress", action="store_true", help="Show progress bars.")
    color.add_argument("--info", action="store_true", help="Print a summary of the run.")
    color.add_argument("--out-colors", type=Path, default=None, help="Color JSON to write.")
    color.add_argument("--out-svg", type=Path, default=None, help="SVG to write.")
    color.add_argument("--fans-only", action="store_true",
                       help="Only color the segments where edges enter and leave bundles.")
    color.add_argument("--dump-bundles", type=Path, default=None, help="Write the detected pairs as JSON.")
    _add_render_options(color)

    render = subparsers.add_parser("render", help="Draw a layout with colors from a color JSON.")
    render.add_argument("--input", type=Path, required=True, help="Layout JSON.")
    render.add_argument("--colors", type=Path, required=True, help="Color JSON written by 'peacock color'.")
    render.add_argument("--out-svg", type=Path, required=True)
    _add_render_options(render)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = max(logging.DEBUG, logging.WARNING - 10 * verbosity)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _run_gen(args: argparse.Namespace) -> None:
    style = FixtureStyle.get(args.style)
    if style is FixtureStyle.ORDERED:
        fixture = make_ordered_bundles(args.groups, args.edges, args.reverse_last, args.seed)
    else:
        fixture = make_crossing_bundles(args.bundles, args.edges, args.seed)
    truth_path = args.truth
    if truth_path is None:
        truth_path = args.out.with_name(args.out.stem + ".truth.json")
    save_layout(fixture.layout, args.out)
    save_ground_truth(fixture.truth, truth_path)
    if style is FixtureStyle.ORDERED and not detects_as_generated(fixture):
        truth = fixture.truth
        warnings.warn(f"The bundles detected in {args.out} with t_frac={truth.t_frac}, k_min={truth.k_min} differ"
                      + " from the generated ones")


def _color_settings(args: argparse.Namespace) -> tuple[DetectionParams, OptimizerConfig]:
    params = DetectionParams(
        t_abs=args.t_abs,
        t_frac=args.t_frac,
        k_min=args.kmin,
        epsilon=args.epsilon,
        samples=args.samples,
    )
    cfg = OptimizerConfig(
        q=args.dims,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        seed=args.seed,
        init=args.init,
        progress=args.progress,
    )
    if args.fans_only and params.samples is not SampleMode.CONTROLS:
        raise ParameterError("--fans-only needs --samples controls")
    if args.threads < 0:
        raise ParameterError(f"--threads must be >= 0, not {args.threads}")
    return params, cfg


def _run_color(args: argparse.Namespace, params: DetectionParams, cfg: OptimizerConfig) -> None:
    layout = load_layout(args.input)
    method = ColoringMethod.get(args.method)
    if method is ColoringMethod.BASELINE:
        table, diagnostics = run_baseline(layout, params, threads=args.threads)
    else:
        table, diagnostics = run_peacock(layout, params, cfg, threads=args.threads)
    rgb = display_colors(table)

    if args.out_colors is not None:
        save_colors(args.out_colors, table, rgb, diagnostics.stress, diagnostics.iterations)
    if args.dump_bundles is not None:
        dump_bundles(diagnostics.weight_matrix, args.dump_bundles)
    if args.out_svg is not None:
        with stage("render", diagnostics):
            fans = None
            if args.fans_only:
                fans = fan_segment_map(layout, diagnostics.weight_matrix, diagnostics.threshold, params.k_min)
            svg = render_svg(layout, rgb, _render_options(args, fans_only=args.fans_only), fan_segments=fans)
        save_svg(svg, args.out_svg)
    if args.info:
        show_diagnostics(diagnostics)


def _run_render(args: argparse.Namespace) -> None:
    layout = load_layout(args.input)
    _, _, rgb = load_colors(args.colors)
    with stage("render", PipelineDiagnostics()):
        if len(rgb) != layout.m:
            raise ParameterError(f"{args.colors} has colors for {len(rgb)} edges, the layout has {layout.m}")
        svg = render_svg(layout, rgb, _render_options(args))
    save_svg(svg, args.out_svg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``peacock`` command.

    Returns 0 on success, 1 when the input or a pipeline stage fails and 2 for invalid command line arguments.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        if args.command == "color":
            try:
                settings = _color_settings(args)
            except ParameterError as error:
                parser.error(str(error))
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else 2

    try:
        if args.command == "gen":
            _run_gen(args)
        elif args.command == "color":
            _run_color(args, *settings)
        elif args.command == "render":
            _run_render(args)
    except ParameterError as error:
        print(f"peacock {args.command}: error: {error}", file=sys.stderr)
        return 2
    except (PeacockError, OSError) as error:
        print(f"peacock {args.command}: error: {error}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
