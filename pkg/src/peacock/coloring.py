"""Color optimization: weighted stress minimization with SMACOF followed by per-bundle range normalization.

The cost of an embedding ``y`` (one ``q``-dimensional color feature per edge) is

    stress(y) = sum_i sum_j w_ij (d_ij - |y_i - y_j|)^2

over ordered pairs, with bundling weights ``w`` and endpoint dissimilarities ``d``. Since ``d`` and the embedding
distances are symmetric, this equals the unordered sum with the symmetrized weights ``w_ij + w_ji``, which is what the
Guttman transform works with.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .bundling import BundleWeightMatrix
from .config import DEFAULT_DIMS, DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, DEFAULT_SEED, InitMode
from .dissimilarity import DissimilarityMatrix
from .errors import OptimizationError, ParameterError
from .model import GraphLayout
from .progress import progressbar

_log = logging.getLogger(__name__)

_TINY = 1e-300

# Stops of the built-in gradient for one-dimensional colors: blue -> red -> yellow
GRADIENT_STOPS = (0.0, 0.5, 1.0)
GRADIENT_COLORS = ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0))


@dataclass(frozen=True)
class ColorEmbedding:
    """``(M, q)`` optimized color features, before normalization."""

    y: np.ndarray

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=float)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        if y.ndim != 2 or y.shape[1] not in (1, 2, 3):
            raise OptimizationError(f"embedding must have shape (M, q) with q in 1, 2, 3, not {y.shape}")
        if not np.all(np.isfinite(y)):
            raise OptimizationError("embedding has non-finite entries")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def q(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the SMACOF optimization.

    Parameters
    ----------
    q : int (optional, default=1)
        Number of color dimensions, 1 (position on a gradient), 2 or 3 (RGB).
    max_iters : int (optional, default=500)
    rel_tol : float (optional, default=1e-6)
        Stop once the relative stress decrease of one step falls below this.
    seed : int (optional, default=0)
        Seed of the random initialization.
    init : InitMode (optional, default="endpoint-projection")
        ``"endpoint-projection"`` starts from the standardized edge midpoints, ``"seeded-random"`` from a seeded
        standard normal sample.
    progress : bool (optional, default=False)
        Show a progress bar over the iterations.
    """

    q: int = DEFAULT_DIMS
    max_iters: int = DEFAULT_MAX_ITERS
    rel_tol: float = DEFAULT_REL_TOL
    seed: int = DEFAULT_SEED
    init: InitMode = InitMode.ENDPOINT_PROJECTION
    progress: bool = False

    def __post_init__(self) -> None:
        if self.q not in (1, 2, 3):
            raise ParameterError(f"q must be one of 1, 2, 3, not {self.q}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be at least 1, not {self.max_iters}")
        if not self.rel_tol > 0:
            raise ParameterError(f"rel_tol must be > 0, not {self.rel_tol}")
        object.__setattr__(self, "init", InitMode.get(self.init))


@dataclass(frozen=True)
class ColorTable:
    """``(M, q)`` normalized colors, every entry in ``[0, 1]``."""

    col: np.ndarray

    @property
    def m(self) -> int:
        return self.col.shape[0]

    @property
    def q(self) -> int:
        return self.col.shape[1]


@dataclass(frozen=True)
class OptimizationResult:
    embedding: ColorEmbedding
    stress: float
    iterations: int
    converged: bool
    history: tuple[float, ...]


def _check_shapes(y: ColorEmbedding, w: BundleWeightMatrix, d: DissimilarityMatrix) -> None:
    if not (y.m == w.m == d.m):
        raise OptimizationError(f"dimension mismatch: embedding has {y.m} rows, weights are {w.m}x{w.m},"
                                f" dissimilarities are {d.m}x{d.m}")


def stress(y: ColorEmbedding, w: BundleWeightMatrix, d: DissimilarityMatrix) -> float:
    """Weighted stress of ``y`` summed over all ordered pairs ``i != j``."""
    _check_shapes(y, w, d)
    residual = d.d - cdist(y.y, y.y)
    return float(np.sum(w.weights * residual * residual))


def _symmetric_weights(w: BundleWeightMatrix) -> np.ndarray:
    w_sym = w.weights + w.weights.T
    np.fill_diagonal(w_sym, 0.0)
    return w_sym


def _laplacian(w_sym: np.ndarray) -> np.ndarray:
    v = -w_sym
    np.fill_diagonal(v, w_sym.sum(axis=1))
    return v


def _guttman_transform(y: np.ndarray, w_sym: np.ndarray, d: np.ndarray, v_pinv: np.ndarray) -> np.ndarray:
    dist = cdist(y, y)
    # Coincident points contribute nothing to B(y)
    ratio = np.divide(d, dist, out=np.zeros_like(dist), where=dist > 0)
    b = -w_sym * ratio
    np.fill_diagonal(b, 0.0)
    np.fill_diagonal(b, -b.sum(axis=1))
    return v_pinv @ (b @ y)


def _require_weights(w: BundleWeightMatrix) -> None:
    if not np.any(w.weights > 0):
        raise OptimizationError(
            "all weights are zero, there is nothing to optimize (no bundles were detected and epsilon is 0)"
        )


def smacof_step(y: ColorEmbedding, w: BundleWeightMatrix, d: DissimilarityMatrix) -> ColorEmbedding:
    """One Guttman transform. The stress of the result is never larger than the stress of ``y``."""
    _check_shapes(y, w, d)
    _require_weights(w)
    w_sym = _symmetric_weights(w)
    v_pinv = np.linalg.pinv(_laplacian(w_sym))
    return ColorEmbedding(_guttman_transform(y.y, w_sym, d.d, v_pinv))


def _standardize(features: np.ndarray) -> np.ndarray:
    centered = features - features.mean(axis=0)
    scale = centered.std(axis=0)
    scale[scale == 0] = 1.0
    return centered / scale


def initial_embedding(cfg: OptimizerConfig, m: int, layout: Optional[GraphLayout] = None) -> ColorEmbedding:
    """Starting point of the optimization.

    ``"endpoint-projection"`` uses the midpoint of each edge's endpoints: its x coordinate for ``q=1``, ``(x, y)`` for
    ``q=2`` and ``(x, y, x + y)`` for ``q=3``, standardized per dimension. It needs the layout.
    """
    if cfg.init == InitMode.SEEDED_RANDOM:
        return ColorEmbedding(np.random.default_rng(cfg.seed).standard_normal((m, cfg.q)))

    if layout is None:
        raise ParameterError("the endpoint-projection initialization needs the layout")
    if layout.m != m:
        raise OptimizationError(f"dimension mismatch: layout has {layout.m} edges, expected {m}")
    v1, v2 = layout.endpoint_arrays
    mid = 0.5 * (v1 + v2)
    features = np.column_stack([mid[:, 0], mid[:, 1], mid[:, 0] + mid[:, 1]])[:, : cfg.q]
    return ColorEmbedding(_standardize(features))


def optimize(w: BundleWeightMatrix, d: DissimilarityMatrix, cfg: OptimizerConfig = OptimizerConfig(),
             layout: Optional[GraphLayout] = None, init: Optional[ColorEmbedding] = None) -> OptimizationResult:
    """Minimize the weighted stress with SMACOF.

    Iterates the Guttman transform until the relative stress decrease
    ``(stress_prev - stress) / max(stress_prev, tiny)`` is below ``cfg.rel_tol`` or ``cfg.max_iters`` steps are done.
    The result only depends on the inputs and ``cfg``.

    Parameters
    ----------
    w : BundleWeightMatrix
    d : DissimilarityMatrix
    cfg : OptimizerConfig
    layout : GraphLayout (optional)
        Needed for the endpoint-projection initialization.
    init : ColorEmbedding (optional)
        Explicit starting point, overrides ``cfg.init``.

    Raises
    ------
    OptimizationError
        If all weights are zero.
    """
    if w.m != d.m:
        raise OptimizationError(f"dimension mismatch: weights are {w.m}x{w.m}, dissimilarities are {d.m}x{d.m}")
    _require_weights(w)
    y = init if init is not None else initial_embedding(cfg, w.m, layout)
    _check_shapes(y, w, d)
    if y.q != cfg.q:
        raise OptimizationError(f"initial embedding has {y.q} dimensions, expected {cfg.q}")

    w_sym = _symmetric_weights(w)
    v_pinv = np.linalg.pinv(_laplacian(w_sym))

    current = stress(y, w, d)
    history = [current]
    converged = False
    iterations = 0
    for _ in progressbar(range(cfg.max_iters), enabled=cfg.progress, desc="SMACOF"):
        y = ColorEmbedding(_guttman_transform(y.y, w_sym, d.d, v_pinv))
        previous, current = current, stress(y, w, d)
        history.append(current)
        iterations += 1
        if (previous - current) / max(previous, _TINY) < cfg.rel_tol:
            converged = True
            break

    if converged:
        _log.info("SMACOF converged after %d iterations, stress %g", iterations, current)
    else:
        warnings.warn(f"SMACOF stopped after max_iters={cfg.max_iters} iterations without reaching rel_tol="
                      f"{cfg.rel_tol} (stress {current:g})")
    return OptimizationResult(y, current, iterations, converged, tuple(history))


def _minmax(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    spread = hi - lo
    scaled = np.divide(values - lo, spread, out=np.full_like(values, 0.5), where=spread > 0)
    return np.clip(scaled, 0.0, 1.0)


def normalize_colors(y: ColorEmbedding, w: BundleWeightMatrix) -> ColorTable:
    """Map the embedding into ``[0, 1]`` separately for each edge's bundle neighbourhood.

    For edge ``i`` the neighbourhood is ``i`` plus every edge bundled with it in either direction. Each dimension is
    min-max scaled over the neighbourhood and edge ``i`` keeps its own scaled value, so every bundle spans the full
    range. An edge without bundle partners is scaled by the global range. A dimension with no spread maps to 0.5.
    """
    if y.m != w.m:
        raise OptimizationError(f"dimension mismatch: embedding has {y.m} rows, weights are {w.m}x{w.m}")
    values = y.y
    global_lo = values.min(axis=0)
    global_hi = values.max(axis=0)
    neighbours = w.bundled_flag | w.bundled_flag.T

    col = np.empty_like(values)
    for i in range(y.m):
        members = neighbours[i].copy()
        if members.any():
            members[i] = True
            lo = values[members].min(axis=0)
            hi = values[members].max(axis=0)
        else:
            lo, hi = global_lo, global_hi
        col[i] = _minmax(values[i], lo, hi)
    col.setflags(write=False)
    return ColorTable(col)


def gradient_color(value: float) -> tuple[float, float, float]:
    """Position ``value`` in ``[0, 1]`` on the blue -> red -> yellow gradient."""
    return tuple(float(np.interp(value, GRADIENT_STOPS, channel)) for channel in zip(*GRADIENT_COLORS))


def colors_to_display(col: ColorTable, q: Optional[int] = None) -> list[tuple[float, float, float]]:
    """RGB triples in ``[0, 1]`` for every edge.

    ``q=3`` uses the normalized colors as RGB directly, ``q=2`` uses them as red and blue with green fixed at 0 and
    ``q=1`` looks them up on the built-in gradient.
    """
    q = col.q if q is None else q
    if q != col.q:
        raise ParameterError(f"color table has {col.q} dimensions, not {q}")
    if q == 3:
        return [tuple(float(c) for c in row) for row in col.col]
    if q == 2:
        return [(float(r), 0.0, float(b)) for r, b in col.col]
    if q == 1:
        return [gradient_color(value) for value in col.col[:, 0]]
    raise ParameterError(f"q must be one of 1, 2, 3, not {q}")

