from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence, Union

try:
    from typing import Self, TypeAlias
except ImportError:
    from typing_extensions import Self, TypeAlias

import numpy as np

from .errors import LayoutError

_log = logging.getLogger(__name__)

PathLike: TypeAlias = Union[str, Path]


class Point2(NamedTuple):
    """A point on screen, in the abstract units of the layout."""

    x: float
    y: float


class Extent(NamedTuple):
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y


def _is_finite_point(point: Sequence[float]) -> bool:
    return all(math.isfinite(value) for value in point)


@dataclass(frozen=True)
class EdgeCurve:
    """One drawn edge of a bundled layout.

    Parameters
    ----------
    id : int
        Index of the edge, ``0 <= id < M``.
    v1, v2 : Point2
        On-screen coordinates of the two nodes the edge connects. Dissimilarities are computed from these.
    controls : tuple[Point2, ...]
        The control points of the drawn curve, in drawing order. The curve is treated as the polyline through them.
    """

    id: int
    v1: Point2
    v2: Point2
    controls: tuple[Point2, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "v1", Point2(*self.v1))
        object.__setattr__(self, "v2", Point2(*self.v2))
        object.__setattr__(self, "controls", tuple(Point2(*p) for p in self.controls))
        if len(self.controls) < 1:
            raise LayoutError("edge must have at least one control point", edge_id=self.id)
        for name, point in (("v1", self.v1), ("v2", self.v2)):
            if not _is_finite_point(point):
                raise LayoutError(f"{name} has a non-finite coordinate {tuple(point)}", edge_id=self.id)
        for idx, point in enumerate(self.controls):
            if not _is_finite_point(point):
                raise LayoutError(f"control point {idx} has a non-finite coordinate {tuple(point)}", edge_id=self.id)

    @property
    def num_controls(self) -> int:
        return len(self.controls)

    @cached_property
    def control_array(self) -> np.ndarray:
        """The control points as a read-only ``(C_i, 2)`` float array."""
        array = np.array(self.controls, dtype=float).reshape(-1, 2)
        array.setflags(write=False)
        return array

    @property
    def endpoints(self) -> tuple[Point2, Point2]:
        return self.v1, self.v2


@dataclass(frozen=True)
class GraphLayout:
    """A node layout with already bundled edge curves.

    Parameters
    ----------
    edges : tuple[EdgeCurve, ...]
        Edges ordered by id, ids ``0 ... M-1``.
    nodes : tuple[tuple[str, Point2], ...] (optional)
        Node positions, only used for drawing.
    """

    edges: tuple[EdgeCurve, ...]
    nodes: Optional[tuple[tuple[str, Point2], ...]] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.nodes is not None:
            object.__setattr__(self, "nodes", tuple((node_id, Point2(*p)) for node_id, p in self.nodes))
        if len(self.edges) < 1:
            raise LayoutError("layout must contain at least one edge")
        for expected_id, edge in enumerate(self.edges):
            if edge.id != expected_id:
                raise LayoutError(f"edges must have ids 0...{len(self.edges) - 1} in order, found id {edge.id} "
                                  f"at position {expected_id}", edge_id=edge.id)
        for node_id, point in self.nodes or ():
            if not _is_finite_point(point):
                raise LayoutError(f"node {node_id!r} has a non-finite coordinate {tuple(point)}")

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def extent(self) -> Extent:
        """Bounding box of all endpoints and control points (node markers are not included)."""
        return compute_extent(self.edges)

    @cached_property
    def endpoint_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """The ``v1`` and ``v2`` coordinates of every edge as two ``(M, 2)`` arrays."""
        v1 = np.array([edge.v1 for edge in self.edges], dtype=float)
        v2 = np.array([edge.v2 for edge in self.edges], dtype=float)
        v1.setflags(write=False)
        v2.setflags(write=False)
        return v1, v2

    def transformed(self, matrix: Sequence[Sequence[float]] = ((1.0, 0.0), (0.0, 1.0)),
                    offset: Sequence[float] = (0.0, 0.0)) -> Self:
        """Apply the affine map ``p -> matrix @ p + offset`` to every point of the layout."""
        (a, b), (c, d) = matrix
        dx, dy = offset

        def move(point: Point2) -> Point2:
            return Point2(a * point.x + b * point.y + dx, c * point.x + d * point.y + dy)

        edges = tuple(
            EdgeCurve(edge.id, move(edge.v1), move(edge.v2), tuple(move(p) for p in edge.controls))
            for edge in self.edges
        )
        nodes = None if self.nodes is None else tuple((node_id, move(p)) for node_id, p in self.nodes)
        return type(self)(edges, nodes)


def compute_extent(edges: Sequence[EdgeCurve]) -> Extent:
    xs = []
    ys = []
    for edge in edges:
        for point in (edge.v1, edge.v2, *edge.controls):
            xs.append(point.x)
            ys.append(point.y)
    return Extent(min(xs), min(ys), max(xs), max(ys))


def layout_extent(layout: GraphLayout) -> tuple[float, float]:
    """Width and height of the bounding box of all endpoints and control points."""
    extent = layout.extent
    return extent.width, extent.height


# File format ----------------------------------------------------------------------------------------------------------


def _parse_point(value: Any, what: str, edge_id: Optional[int] = None) -> Point2:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise LayoutError(f"{what} must be a pair of numbers [x, y], got {value!r}", edge_id=edge_id)
    try:
        return Point2(float(value[0]), float(value[1]))
    except OverflowError:
        raise LayoutError(f"{what} has a coordinate too large for a double", edge_id=edge_id) from None


def _parse_edge(raw: Any, position: int) -> EdgeCurve:
    if not isinstance(raw, dict):
        raise LayoutError(f"edge entry {position} must be an object")
    edge_id = raw.get("id")
    if not isinstance(edge_id, int) or isinstance(edge_id, bool):
        raise LayoutError(f"edge entry {position} has no integer id (got {edge_id!r})")

    for key in ("v1", "v2", "controls"):
        if key not in raw:
            raise LayoutError(f"missing field {key!r}", edge_id=edge_id)
    controls = raw["controls"]
    if not isinstance(controls, list):
        raise LayoutError("'controls' must be a list of [x, y] pairs", edge_id=edge_id)
    if not controls:
        raise LayoutError("empty control point list", edge_id=edge_id)

    return EdgeCurve(
        id=edge_id,
        v1=_parse_point(raw["v1"], "v1", edge_id),
        v2=_parse_point(raw["v2"], "v2", edge_id),
        controls=tuple(_parse_point(p, f"control point {idx}", edge_id) for idx, p in enumerate(controls)),
    )


def layout_from_dict(document: Any) -> GraphLayout:
    """Build a validated :class:`GraphLayout` from the decoded JSON layout document."""
    if not isinstance(document, dict):
        raise LayoutError("layout document must be a JSON object")
    raw_edges = document.get("edges")
    if not isinstance(raw_edges, list):
        raise LayoutError("layout document needs an 'edges' list")

    edges = [_parse_edge(raw, position) for position, raw in enumerate(raw_edges)]
    seen = set()
    for edge in edges:
        if edge.id in seen:
            raise LayoutError("duplicate edge id", edge_id=edge.id)
        seen.add(edge.id)
    for edge in edges:
        if not 0 <= edge.id < len(edges):
            raise LayoutError(f"edge ids must be 0...{len(edges) - 1} without gaps", edge_id=edge.id)
    edges.sort(key=lambda edge: edge.id)

    nodes = None
    if "nodes" in document:
        raw_nodes = document["nodes"]
        if not isinstance(raw_nodes, list):
            raise LayoutError("'nodes' must be a list")
        nodes = []
        for raw in raw_nodes:
            if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
                raise LayoutError(f"node entries need a string id, got {raw!r}")
            nodes.append((raw["id"], _parse_point([raw.get("x"), raw.get("y")], f"node {raw['id']!r}")))
        nodes = tuple(nodes)

    return GraphLayout(tuple(edges), nodes)


def layout_to_dict(layout: GraphLayout) -> dict:
    document: dict = {
        "edges": [
            {
                "id": edge.id,
                "v1": [edge.v1.x, edge.v1.y],
                "v2": [edge.v2.x, edge.v2.y],
                "controls": [[p.x, p.y] for p in edge.controls],
            }
            for edge in layout.edges
        ]
    }
    if layout.nodes is not None:
        document["nodes"] = [{"id": node_id, "x": p.x, "y": p.y} for node_id, p in layout.nodes]
    return document


def load_layout(path: PathLike) -> GraphLayout:
    """Read and validate a JSON layout file.

    Parameters
    ----------
    path : str or Path

    Returns
    -------
    GraphLayout

    Raises
    ------
    LayoutError
        If the file is not valid JSON or violates the layout invariants. Errors tied to one edge name its id.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except UnicodeDecodeError as e:
        raise LayoutError(f"{path}: not UTF-8 text ({e.reason} at byte {e.start})") from e
    except json.JSONDecodeError as e:
        raise LayoutError(f"{path}: malformed JSON ({e.msg} at line {e.lineno}, column {e.colno})") from e
    except ValueError as e:
        raise LayoutError(f"{path}: unreadable JSON ({e})") from e

    layout = layout_from_dict(document)
    _log.info("Loaded %d edges from %s", layout.m, path)
    return layout


def dumps_layout(layout: GraphLayout) -> str:
    """Canonical text of the layout: sorted keys, two space indent and a trailing newline."""
    return json.dumps(layout_to_dict(layout), indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_layout(layout: GraphLayout, path: PathLike) -> None:
    Path(path).write_text(dumps_layout(layout), encoding="utf-8")
