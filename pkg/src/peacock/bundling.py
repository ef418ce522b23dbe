"""Pairwise bundling detection between edge curves.

Edge ``i`` is bundled with edge ``j`` if ``K_ij`` consecutive sample points of ``i`` each lie within distance ``T`` of
at least one sample point of ``j``. The relation is directional. Non-bundled pairs get the weight ``epsilon`` in the
stress, which sets the tradeoff between local (within bundle) and global color differentiation.
"""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .config import DEFAULT_EPSILON, DEFAULT_K_MIN, DEFAULT_T_FRAC, MAX_DENSE_EDGES, SampleMode
from .errors import ParameterError
from .model import EdgeCurve, GraphLayout, PathLike
from .progress import progressbar

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectionParams:
    """Parameters of the bundling detection.

    Parameters
    ----------
    t_abs : float (optional)
        Absolute distance threshold ``T`` in layout units.
    t_frac : float (optional, default=0.03 when ``t_abs`` is not given)
        Threshold as a fraction of ``max(width, height)`` of the layout. Exactly one of ``t_abs`` and ``t_frac`` may
        be given.
    k_min : float (optional, default=0.4)
        Required fraction of the larger control point count that must be close, see :func:`required_run_length`.
    epsilon : float (optional, default=0.001)
        Weight of non-bundled pairs. 0 colors only within bundles, 1 differentiates all edges equally.
    samples : SampleMode (optional, default="controls")
        Which points of the curves are compared, the control points or the midpoints of the polyline segments.
    """

    t_abs: Optional[float] = None
    t_frac: Optional[float] = None
    k_min: float = DEFAULT_K_MIN
    epsilon: float = DEFAULT_EPSILON
    samples: SampleMode = SampleMode.CONTROLS

    def __post_init__(self) -> None:
        if self.t_abs is not None and self.t_frac is not None:
            raise ParameterError("give either an absolute threshold (t_abs) or a fractional one (t_frac), not both")
        if self.t_abs is None and self.t_frac is None:
            object.__setattr__(self, "t_frac", DEFAULT_T_FRAC)
        if self.t_abs is not None and not (math.isfinite(self.t_abs) and self.t_abs > 0):
            raise ParameterError(f"t_abs must be a finite number > 0, not {self.t_abs}")
        if self.t_frac is not None and not (0 < self.t_frac <= 1):
            raise ParameterError(f"t_frac must be in the range (0, 1], not {self.t_frac}")
        if not (0 < self.k_min <= 1):
            raise ParameterError(f"k_min must be in the range (0, 1], not {self.k_min}")
        if not (0 <= self.epsilon <= 1):
            raise ParameterError(f"epsilon must be in the range [0, 1], not {self.epsilon}")
        object.__setattr__(self, "samples", SampleMode.get(self.samples))

    def resolve_threshold(self, layout: GraphLayout) -> float:
        """The absolute distance threshold ``T`` for ``layout``."""
        if self.t_abs is not None:
            return float(self.t_abs)
        extent = layout.extent
        threshold = self.t_frac * max(extent.width, extent.height)
        if threshold <= 0:
            raise ParameterError(
                "the layout has zero extent, so a fractional threshold resolves to T = 0;"
                " give an absolute threshold (t_abs / --t-abs) instead"
            )
        return threshold


@dataclass(frozen=True)
class BundleWeightMatrix:
    """Stress weights from bundling detection.

    Attributes
    ----------
    weights : np.ndarray
        ``(M, M)`` weights, 1 for bundled ordered pairs, ``epsilon`` for the others and 0 on the diagonal.
    bundled_flag : np.ndarray
        ``(M, M)`` boolean detection outcome. May be asymmetric.
    epsilon : float
    """

    weights: np.ndarray
    bundled_flag: np.ndarray
    epsilon: float

    @classmethod
    def from_flags(cls, bundled_flag: np.ndarray, epsilon: float) -> BundleWeightMatrix:
        flags = np.array(bundled_flag, dtype=bool)
        np.fill_diagonal(flags, False)
        weights = np.where(flags, 1.0, float(epsilon))
        np.fill_diagonal(weights, 0.0)
        flags.setflags(write=False)
        weights.setflags(write=False)
        return cls(weights=weights, bundled_flag=flags, epsilon=float(epsilon))

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def num_bundled_pairs(self) -> int:
        return int(np.count_nonzero(self.bundled_flag))

    def with_epsilon(self, epsilon: float) -> BundleWeightMatrix:
        """Same detection outcome with a different weight for the non-bundled pairs."""
        if not (0 <= epsilon <= 1):
            raise ParameterError(f"epsilon must be in the range [0, 1], not {epsilon}")
        return BundleWeightMatrix.from_flags(self.bundled_flag, epsilon)

    def partners(self, i: int) -> np.ndarray:
        """Edges bundled with edge ``i`` in either direction, in increasing order."""
        return np.flatnonzero(self.bundled_flag[i] | self.bundled_flag[:, i])


def check_dense_size(m: int) -> None:
    if m > MAX_DENSE_EDGES:
        raise ParameterError(f"{m} edges exceed the limit of {MAX_DENSE_EDGES} for dense M x M matrices")


def required_run_length(c_i: int, c_j: int, k_min: float) -> int:
    """Number of consecutive close points needed for edge ``i`` to count as bundled with edge ``j``.

    ``K_ij = max(1, floor(max(C_i, C_j) * k_min))``
    """
    return max(1, math.floor(max(c_i, c_j) * k_min))


def curve_samples(edge: EdgeCurve, mode: SampleMode = SampleMode.CONTROLS) -> np.ndarray:
    """The points of ``edge`` that take part in bundling detection, as a ``(C, 2)`` array.

    With ``"midpoints"`` each polyline segment is represented by its midpoint. A curve with a single control point
    has no segments and is represented by that point.
    """
    controls = edge.control_array
    if SampleMode.get(mode) == SampleMode.MIDPOINTS and len(controls) > 1:
        return 0.5 * (controls[:-1] + controls[1:])
    return controls


def first_run_start(close: np.ndarray, run_length: int) -> Optional[int]:
    """Index of the first of ``run_length`` consecutive True values in ``close``, or None if there is no such run."""
    close = np.asarray(close, dtype=bool)
    if run_length < 1 or len(close) < run_length:
        return None
    window_sums = np.convolve(close.astype(np.int64), np.ones(run_length, dtype=np.int64), mode="valid")
    hits = np.flatnonzero(window_sums == run_length)
    if len(hits) == 0:
        return None
    return int(hits[0])


def close_points(points_i: np.ndarray, points_j: np.ndarray, threshold: float) -> np.ndarray:
    """For each point of ``points_i``, whether some point of ``points_j`` is within ``threshold`` (inclusive)."""
    return (cdist(points_i, points_j) <= threshold).any(axis=1)


def detect_pair(edge_i: EdgeCurve, edge_j: EdgeCurve, threshold: float, run_length: int,
                samples: SampleMode = SampleMode.CONTROLS) -> bool:
    """Whether ``edge_i`` is bundled with ``edge_j``.

    True iff ``run_length`` consecutive sample points of ``edge_i`` are each within ``threshold`` of at least one
    sample point of ``edge_j``. False when ``edge_i`` has fewer than ``run_length`` sample points.
    """
    points_i = curve_samples(edge_i, samples)
    if len(points_i) < run_length:
        return False
    close = close_points(points_i, curve_samples(edge_j, samples), threshold)
    return first_run_start(close, run_length) is not None


class GridIndex:
    """Uniform grid over the layout with square cells of side ``T``.

    Every point within ``T`` of a query lies in the query's cell or one of its eight neighbours, so scanning that
    3x3 block and filtering by exact distance finds all of them.

    Parameters
    ----------
    points : np.ndarray
        ``(N, 2)`` indexed points.
    owners : np.ndarray
        ``(N,)`` edge id of every point.
    positions : np.ndarray
        ``(N,)`` index of every point within its edge.
    cell_size : float
    origin : tuple[float, float]
        Lower left corner of cell ``(0, 0)``.
    """

    def __init__(self, points: np.ndarray, owners: np.ndarray, positions: np.ndarray, cell_size: float,
                 origin: tuple[float, float]) -> None:
        if not cell_size > 0:
            raise ParameterError(f"cell size must be > 0, not {cell_size}")
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.owners = np.asarray(owners, dtype=np.int64)
        self.positions = np.asarray(positions, dtype=np.int64)
        self.cell_size = float(cell_size)
        self.origin = np.asarray(origin, dtype=float)

        buckets: dict[tuple[int, int], list[int]] = {}
        for flat_idx, cell in enumerate(map(tuple, self.cells_of(self.points))):
            buckets.setdefault(cell, []).append(flat_idx)
        self.cells = {cell: np.array(members, dtype=np.int64) for cell, members in buckets.items()}

    def cells_of(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.floor((points - self.origin) / self.cell_size).astype(np.int64)

    def candidates(self, points: np.ndarray) -> np.ndarray:
        """Sorted flat indices of all indexed points in the 3x3 neighbourhoods of ``points``."""
        found = []
        for cx, cy in {tuple(cell) for cell in self.cells_of(points)}:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    members = self.cells.get((cx + dx, cy + dy))
                    if members is not None:
                        found.append(members)
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(found))

    def query(self, point, radius: Optional[float] = None) -> list[tuple[int, int]]:
        """``(edge id, point index)`` of every indexed point within ``radius`` (default: the cell size) of ``point``."""
        radius = self.cell_size if radius is None else radius
        if radius > self.cell_size:
            raise ParameterError(f"query radius {radius} is larger than the cell size {self.cell_size}")
        point = np.asarray(point, dtype=float).reshape(1, 2)
        candidates = self.candidates(point)
        if len(candidates) == 0:
            return []
        within = candidates[cdist(point, self.points[candidates])[0] <= radius]
        return [(int(self.owners[k]), int(self.positions[k])) for k in within]


def build_spatial_index(layout: GraphLayout, threshold: float,
                        samples: SampleMode = SampleMode.CONTROLS) -> GridIndex:
    """Index the sample points of every edge in a grid with cell size ``threshold``."""
    if not threshold > 0:
        raise ParameterError(f"threshold must be > 0, not {threshold}")
    per_edge = [curve_samples(edge, samples) for edge in layout.edges]
    points = np.concatenate(per_edge)
    owners = np.concatenate([np.full(len(p), edge_id, dtype=np.int64) for edge_id, p in enumerate(per_edge)])
    positions = np.concatenate([np.arange(len(p), dtype=np.int64) for p in per_edge])
    extent = layout.extent
    return GridIndex(points, owners, positions, threshold, (extent.min_x, extent.min_y))


def _detect_row(i: int, index: GridIndex, counts: np.ndarray, threshold: float, k_min: float) -> np.ndarray:
    row = np.zeros(len(counts), dtype=bool)
    own = index.owners == i
    points_i = index.points[own]
    candidates = index.candidates(points_i)
    candidates = candidates[index.owners[candidates] != i]
    if len(candidates) == 0:
        return row

    close = cdist(points_i, index.points[candidates]) <= threshold
    owners = index.owners[candidates]
    for j in np.unique(owners):
        run_length = required_run_length(counts[i], counts[j], k_min)
        if counts[i] < run_length:
            continue
        row[j] = first_run_start(close[:, owners == j].any(axis=1), run_length) is not None
    return row


def build_weight_matrix(layout: GraphLayout, params: DetectionParams, threads: int = 1,
                        progress: bool = False) -> BundleWeightMatrix:
    """Detect bundling between all ordered pairs of edges and turn it into stress weights.

    Parameters
    ----------
    layout : GraphLayout
    params : DetectionParams
    threads : int (optional, default=1)
        Number of worker threads, 0 uses all cores. The result does not depend on it.
    progress : bool (optional, default=False)
        Show a progress bar over the edges.
    """
    m = layout.m
    check_dense_size(m)
    threshold = params.resolve_threshold(layout)
    _log.info("Detecting bundles among %d edges with T=%g, K_min=%g", m, threshold, params.k_min)

    index = build_spatial_index(layout, threshold, params.samples)
    counts = np.bincount(index.owners, minlength=m)

    def detect(i):
        return _detect_row(i, index, counts, threshold, params.k_min)

    workers = (os.cpu_count() or 1) if threads == 0 else max(1, threads)
    if workers == 1:
        rows = [detect(i) for i in progressbar(range(m), enabled=progress, desc="Detecting bundles")]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(progressbar(executor.map(detect, range(m)), enabled=progress, total=m,
                                    desc="Detecting bundles"))

    weight_matrix = BundleWeightMatrix.from_flags(np.vstack(rows), params.epsilon)
    _log.info("Found %d bundled ordered pairs", weight_matrix.num_bundled_pairs)
    if weight_matrix.num_bundled_pairs == 0 and params.epsilon > 0 and m > 1:
        warnings.warn(
            "No bundled edge pairs were detected, the coloring will be purely global. Consider increasing the"
            + " distance threshold or decreasing k_min."
        )
    return weight_matrix


def build_weight_matrix_bruteforce(layout: GraphLayout, params: DetectionParams) -> BundleWeightMatrix:
    """Same as :func:`build_weight_matrix`, by evaluating every ordered pair directly. Slow, used as a reference."""
    m = layout.m
    check_dense_size(m)
    threshold = params.resolve_threshold(layout)
    counts = [len(curve_samples(edge, params.samples)) for edge in layout.edges]
    flags = np.zeros((m, m), dtype=bool)
    for i, edge_i in enumerate(layout.edges):
        for j, edge_j in enumerate(layout.edges):
            if i == j:
                continue
            run_length = required_run_length(counts[i], counts[j], params.k_min)
            flags[i, j] = detect_pair(edge_i, edge_j, threshold, run_length, params.samples)
    return BundleWeightMatrix.from_flags(flags, params.epsilon)


def bundle_pairs(weight_matrix: BundleWeightMatrix) -> list[tuple[int, int]]:
    """All flagged ordered pairs ``(i, j)``, sorted lexicographically."""
    return [(int(i), int(j)) for i, j in np.argwhere(weight_matrix.bundled_flag)]


def dump_bundles(weight_matrix: BundleWeightMatrix, path: PathLike) -> None:
    payload = [{"i": i, "j": j} for i, j in bundle_pairs(weight_matrix)]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
