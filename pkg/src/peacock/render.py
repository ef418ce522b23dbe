"""SVG output of colored layouts and the fan-in / fan-out segments where edges enter and leave bundles."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from bs4 import BeautifulSoup
from lxml import etree

from .bundling import BundleWeightMatrix, close_points, first_run_start, required_run_length
from .config import SVG_PADDING, SVG_PRECISION
from .errors import FanSegmentError
from .model import EdgeCurve, GraphLayout, PathLike, Point2

_log = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"

RGB = tuple[float, float, float]


@dataclass(frozen=True)
class FanSegments:
    """Where edge ``i`` enters and leaves its bundled run along edge ``j``.

    Indices are 0-based. Control point indices ``run_start ... run_end`` form the run, segment ``s`` joins control
    points ``s`` and ``s + 1``. ``fan_in`` is the segment ending at the run start and ``fan_out`` the segment starting
    at the run end; either is None when the run touches that end of the curve.
    """

    run_start: int
    run_end: int
    fan_in: Optional[int]
    fan_out: Optional[int]


def find_fan_segments(edge_i: EdgeCurve, edge_j: EdgeCurve, threshold: float, run_length: int) -> FanSegments:
    """Fan segments of ``edge_i`` for its bundle with ``edge_j``.

    The run is the earliest one of ``run_length`` close control points, extended forward as long as the following
    control points stay close to ``edge_j``.

    Raises
    ------
    FanSegmentError
        If ``edge_i`` is not bundled with ``edge_j``.
    """
    controls = edge_i.control_array
    close = close_points(controls, edge_j.control_array, threshold)
    start = first_run_start(close, run_length)
    if start is None:
        raise FanSegmentError(f"edge {edge_i.id} is not bundled with edge {edge_j.id}")

    end = start + run_length - 1
    while end + 1 < len(controls) and close[end + 1]:
        end += 1
    fan_in = start - 1 if start > 0 else None
    fan_out = end if end < len(controls) - 1 else None
    return FanSegments(start, end, fan_in, fan_out)


def fan_segment_map(layout: GraphLayout, weight_matrix: BundleWeightMatrix, threshold: float,
                    k_min: float) -> dict[int, list[int]]:
    """Sorted fan-in and fan-out segment indices of every edge, over all its bundled partners."""
    segments: dict[int, set] = {edge.id: set() for edge in layout.edges}
    for i, j in np.argwhere(weight_matrix.bundled_flag):
        edge_i, edge_j = layout.edges[i], layout.edges[j]
        run_length = required_run_length(edge_i.num_controls, edge_j.num_controls, k_min)
        fans = find_fan_segments(edge_i, edge_j, threshold, run_length)
        segments[int(i)].update(s for s in (fans.fan_in, fans.fan_out) if s is not None)
    return {edge_id: sorted(found) for edge_id, found in segments.items()}


@dataclass(frozen=True)
class RenderOptions:
    """How the SVG is drawn.

    Parameters
    ----------
    stroke_width : float (optional, default=1.5)
    opacity : float (optional, default=0.8)
        Stroke opacity of the edges.
    show_nodes : bool (optional, default=False)
        Draw a circle for every node of the layout.
    node_radius : float (optional)
        Radius of node and endpoint circles, by default 0.5% of the larger side of the layout.
    fans_only : bool (optional, default=False)
        Draw edges in gray and only color the fan-in and fan-out segments and the endpoints.
    flip_y : bool (optional, default=False)
        Mirror the y axis, for layouts where y grows upwards.
    gray : str (optional, default="#c8c8c8")
    precision : int (optional, default=3)
        Decimal places of the coordinates.
    """

    stroke_width: float = 1.5
    opacity: float = 0.8
    show_nodes: bool = False
    node_radius: Optional[float] = None
    fans_only: bool = False
    flip_y: bool = False
    gray: str = "#c8c8c8"
    precision: int = SVG_PRECISION


def to_hex(rgb: Sequence[float]) -> str:
    """``#rrggbb`` with 8 bits per channel."""
    channels = (int(round(min(max(float(c), 0.0), 1.0) * 255)) for c in rgb)
    return "#" + "".join(f"{c:02x}" for c in channels)


def from_hex(color: str) -> RGB:
    color = color.lstrip("#")
    return tuple(int(color[k:k + 2], 16) / 255 for k in (0, 2, 4))


class _Formatter:
    def __init__(self, layout: GraphLayout, opts: RenderOptions) -> None:
        self.precision = opts.precision
        self.flip_y = opts.flip_y
        extent = layout.extent
        self.y_sum = extent.min_y + extent.max_y

    def number(self, value: float) -> str:
        text = f"{value:.{self.precision}f}"
        if float(text) == 0:
            text = f"{0.0:.{self.precision}f}"
        return text

    def point(self, point: Point2) -> tuple[str, str]:
        y = self.y_sum - point.y if self.flip_y else point.y
        return self.number(point.x), self.number(y)

    def path(self, points: Sequence[Point2]) -> str:
        commands = []
        for idx, point in enumerate(points):
            x, y = self.point(point)
            commands.append(f"{'M' if idx == 0 else 'L'}{x},{y}")
        return " ".join(commands)


def _view_box(layout: GraphLayout, fmt: _Formatter) -> str:
    extent = layout.extent
    pad = SVG_PADDING * max(extent.width, extent.height)
    if pad == 0:
        pad = 1.0
    return " ".join(fmt.number(v) for v in (
        extent.min_x - pad, extent.min_y - pad, extent.width + 2 * pad, extent.height + 2 * pad
    ))


def render_svg(layout: GraphLayout, colors: Sequence[RGB], opts: RenderOptions = RenderOptions(),
               fan_segments: Optional[dict[int, list[int]]] = None) -> str:
    """Draw the layout with one colored polyline per edge.

    Parameters
    ----------
    layout : GraphLayout
    colors : list of RGB triples in [0, 1]
        One color per edge, in edge id order.
    opts : RenderOptions
    fan_segments : dict (optional)
        Segment indices per edge, see :func:`fan_segment_map`. Required when ``opts.fans_only`` is set.

    Returns
    -------
    str
        The SVG document. Identical inputs give identical text.
    """
    if len(colors) != layout.m:
        raise ValueError(f"need one color per edge, got {len(colors)} colors for {layout.m} edges")
    if opts.fans_only and fan_segments is None:
        raise ValueError("fans_only rendering needs the fan segments of every edge")

    fmt = _Formatter(layout, opts)
    extent = layout.extent
    radius = opts.node_radius
    if radius is None:
        radius = 0.005 * max(extent.width, extent.height) or 0.5

    root = etree.Element(f"{{{SVG_NS}}}svg", nsmap={None: SVG_NS})
    root.set("version", "1.1")
    root.set("viewBox", _view_box(layout, fmt))

    edge_group = etree.SubElement(root, f"{{{SVG_NS}}}g", id="edges", fill="none")
    edge_group.set("stroke-width", fmt.number(opts.stroke_width))
    edge_group.set("stroke-opacity", fmt.number(opts.opacity))
    edge_group.set("stroke-linecap", "round")
    edge_group.set("stroke-linejoin", "round")
    for edge, rgb in zip(layout.edges, colors):
        path = etree.SubElement(edge_group, f"{{{SVG_NS}}}path", id=f"edge-{edge.id}")
        path.set("class", "edge")
        path.set("d", fmt.path(edge.controls))
        path.set("stroke", opts.gray if opts.fans_only else to_hex(rgb))

    if opts.fans_only:
        fan_group = etree.SubElement(root, f"{{{SVG_NS}}}g", id="fans", fill="none")
        fan_group.set("stroke-width", fmt.number(2 * opts.stroke_width))
        for edge, rgb in zip(layout.edges, colors):
            color = to_hex(rgb)
            for segment in fan_segments.get(edge.id, ()):
                path = etree.SubElement(fan_group, f"{{{SVG_NS}}}path")
                path.set("class", "fan")
                path.set("d", fmt.path(edge.controls[segment:segment + 2]))
                path.set("stroke", color)
            for point in edge.endpoints:
                x, y = fmt.point(point)
                dot = etree.SubElement(fan_group, f"{{{SVG_NS}}}circle", cx=x, cy=y, r=fmt.number(radius))
                dot.set("class", "endpoint")
                dot.set("fill", color)

    if opts.show_nodes and layout.nodes:
        node_group = etree.SubElement(root, f"{{{SVG_NS}}}g", id="nodes", fill="#404040")
        for node_id, point in layout.nodes:
            x, y = fmt.point(point)
            circle = etree.SubElement(node_group, f"{{{SVG_NS}}}circle", cx=x, cy=y, r=fmt.number(radius))
            etree.SubElement(circle, f"{{{SVG_NS}}}title").text = node_id

    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8").decode("utf-8")


def save_svg(svg: str, path: PathLike) -> None:
    Path(path).write_text(svg, encoding="utf-8")
    _log.info("Wrote %s", path)


def read_svg_strokes(svg: str) -> list[str]:
    """Stroke color of every edge path of an SVG made by :func:`render_svg`, in document order."""
    soup = BeautifulSoup(svg.encode("utf-8"), "xml")
    return [path["stroke"] for path in soup.find_all("path", attrs={"class": "edge"})]
