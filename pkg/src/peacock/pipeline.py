"""Runs the whole coloring: detection, dissimilarities, stress optimization and normalization."""

from __future__ import annotations

import json
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .baseline import BaselineColorTable, baseline_colors
from .bundling import BundleWeightMatrix, DetectionParams, build_weight_matrix
from .coloring import (
    ColorEmbedding,
    ColorTable,
    OptimizerConfig,
    colors_to_display,
    normalize_colors,
    optimize,
    stress,
)
from .dissimilarity import DissimilarityMatrix, build_dissimilarity_matrix
from .errors import LayoutError, PeacockError, StageError
from .model import GraphLayout, PathLike

_log = logging.getLogger(__name__)

STAGES = ("detect", "dissimilarity", "optimize", "normalize", "render")


@dataclass
class PipelineDiagnostics:
    """What happened during one coloring run.

    Attributes
    ----------
    stress : float
        Final stress of the raw embedding. For the baseline it is the stress of the baseline colors.
    iterations : int
        SMACOF iterations, 0 for the baseline.
    converged : bool
    bundled_pairs : int
        Number of flagged ordered pairs.
    threshold : float
        The resolved distance threshold ``T``.
    timings : dict
        Wall time in seconds per stage, in the order the stages ran.
    """

    stress: float = math.nan
    iterations: int = 0
    converged: bool = False
    bundled_pairs: int = 0
    threshold: float = math.nan
    timings: dict[str, float] = field(default_factory=dict)
    weight_matrix: Optional[BundleWeightMatrix] = field(default=None, repr=False)
    dissimilarities: Optional[DissimilarityMatrix] = field(default=None, repr=False)
    embedding: Optional[ColorEmbedding] = field(default=None, repr=False)


@contextmanager
def stage(name: str, diagnostics: PipelineDiagnostics):
    """Time a pipeline stage and attribute errors raised inside it to the stage."""
    if name not in STAGES:
        raise ValueError(f"unknown stage {name!r}, must be one of {STAGES}")
    _log.debug("Starting stage %s", name)
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except PeacockError as error:
        raise StageError(name, error) from error
    finally:
        diagnostics.timings[name] = time.perf_counter() - start
    _log.debug("Stage %s took %.3fs", name, diagnostics.timings[name])


def _detect(layout: GraphLayout, params: DetectionParams, diagnostics: PipelineDiagnostics, threads: int,
            progress: bool) -> BundleWeightMatrix:
    with stage("detect", diagnostics):
        diagnostics.threshold = params.resolve_threshold(layout)
        weight_matrix = build_weight_matrix(layout, params, threads=threads, progress=progress)
    diagnostics.weight_matrix = weight_matrix
    diagnostics.bundled_pairs = weight_matrix.num_bundled_pairs
    return weight_matrix


def _dissimilarities(layout: GraphLayout, diagnostics: PipelineDiagnostics) -> DissimilarityMatrix:
    with stage("dissimilarity", diagnostics):
        d = build_dissimilarity_matrix(layout)
    diagnostics.dissimilarities = d
    return d


def _optimize_and_normalize(layout: GraphLayout, weight_matrix: BundleWeightMatrix, d: DissimilarityMatrix,
                            cfg: OptimizerConfig, diagnostics: PipelineDiagnostics) -> ColorTable:
    with stage("optimize", diagnostics):
        result = optimize(weight_matrix, d, cfg, layout=layout)
    diagnostics.embedding = result.embedding
    diagnostics.stress = result.stress
    diagnostics.iterations = result.iterations
    diagnostics.converged = result.converged

    with stage("normalize", diagnostics):
        table = normalize_colors(result.embedding, weight_matrix)
    return table


def run_peacock(layout: GraphLayout, params: DetectionParams = DetectionParams(),
                cfg: OptimizerConfig = OptimizerConfig(), threads: int = 1) -> tuple[ColorTable, PipelineDiagnostics]:
    """Color the edges of a bundled layout.

    Runs bundling detection, the endpoint dissimilarities, SMACOF and the per-bundle normalization in that order.
    Nothing is cached between calls, so the same inputs always give the same colors.

    Parameters
    ----------
    layout : GraphLayout
    params : DetectionParams
    cfg : OptimizerConfig
    threads : int (optional, default=1)
        Worker threads for the detection, 0 uses all cores.

    Returns
    -------
    ColorTable
    PipelineDiagnostics

    Raises
    ------
    StageError
        Wrapping the error of the stage that failed, e.g. ``"optimize: ..."`` when all weights are zero.
    """
    diagnostics = PipelineDiagnostics()
    weight_matrix = _detect(layout, params, diagnostics, threads, cfg.progress)
    d = _dissimilarities(layout, diagnostics)
    table = _optimize_and_normalize(layout, weight_matrix, d, cfg, diagnostics)
    _log.info("Colored %d edges, stress %g after %d iterations", layout.m, diagnostics.stress,
              diagnostics.iterations)
    return table, diagnostics


def run_baseline(layout: GraphLayout, params: DetectionParams = DetectionParams(),
                 threads: int = 1) -> tuple[BaselineColorTable, PipelineDiagnostics]:
    """The endpoint-position baseline, with the stress of its colors under the same weights as a peacock run.

    The optimizer is never run.
    """
    diagnostics = PipelineDiagnostics()
    weight_matrix = _detect(layout, params, diagnostics, threads, False)
    d = _dissimilarities(layout, diagnostics)
    table = baseline_colors(layout)
    diagnostics.stress = stress(ColorEmbedding(table.col), weight_matrix, d)
    diagnostics.converged = True
    return table, diagnostics


def sweep_epsilon(layout: GraphLayout, params: DetectionParams, cfg: OptimizerConfig,
                  epsilons: Iterable[float], threads: int = 1) -> list[tuple[float, ColorTable, PipelineDiagnostics]]:
    """Color the layout once per ``epsilon``, detecting bundles and computing dissimilarities only once."""
    shared = PipelineDiagnostics()
    weight_matrix = _detect(layout, params, shared, threads, cfg.progress)
    d = _dissimilarities(layout, shared)

    results = []
    for epsilon in epsilons:
        diagnostics = PipelineDiagnostics(
            bundled_pairs=shared.bundled_pairs,
            threshold=shared.threshold,
            timings=dict(shared.timings),
            dissimilarities=d,
        )
        with stage("detect", diagnostics):
            weights = weight_matrix.with_epsilon(epsilon)
        diagnostics.weight_matrix = weights
        diagnostics.timings["detect"] = shared.timings["detect"]
        table = _optimize_and_normalize(layout, weights, d, cfg, diagnostics)
        _log.info("epsilon=%g: stress %g after %d iterations", epsilon, diagnostics.stress, diagnostics.iterations)
        results.append((float(epsilon), table, diagnostics))
    return results


def show_diagnostics(diagnostics: PipelineDiagnostics) -> None:
    """Print a summary of a coloring run.

    Parameters
    ----------
    diagnostics : PipelineDiagnostics
    """
    print(f"{'Coloring info':>25}")
    print("-" * 40)
    print(f"{'Threshold T':>25} | {diagnostics.threshold:.6g}")
    print(f"{'Bundled ordered pairs':>25} | {diagnostics.bundled_pairs}")
    print(f"{'Stress':>25} | {diagnostics.stress:.6g}")
    print(f"{'Iterations':>25} | {diagnostics.iterations}")
    print(f"{'Converged':>25} | {'yes' if diagnostics.converged else 'no'}")
    for name, seconds in diagnostics.timings.items():
        print(f"{'Time ' + name + ' [s]':>25} | {seconds:.3f}")


def colors_document(table: Union[ColorTable, BaselineColorTable], rgb: Sequence[Sequence[float]], stress_value: float,
                    iterations: int) -> dict:
    col = np.asarray(table.col)
    return {
        "q": int(col.shape[1]),
        "colors": [[float(c) for c in row] for row in col],
        "rgb": [[float(c) for c in color] for color in rgb],
        "stress": float(stress_value),
        "iters": int(iterations),
    }


def save_colors(path: PathLike, table: Union[ColorTable, BaselineColorTable], rgb: Sequence[Sequence[float]],
                stress_value: float, iterations: int) -> None:
    """Write the color dump. The same inputs always give byte-identical files."""
    document = colors_document(table, rgb, stress_value, iterations)
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _log.info("Wrote colors of %d edges to %s", len(rgb), path)


def load_colors(path: PathLike) -> tuple[int, np.ndarray, list[tuple[float, float, float]]]:
    """Read a color dump written by :func:`save_colors`.

    Returns
    -------
    q : int
    colors : np.ndarray
        ``(M, q)`` normalized colors.
    rgb : list of RGB triples
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        q = int(document["q"])
        colors = np.array(document["colors"], dtype=float).reshape(-1, q)
        rgb = [tuple(float(c) for c in color) for color in document["rgb"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as error:
        raise LayoutError(f"{path} is not a valid color file: {error}") from error
    if len(rgb) != len(colors) or any(len(color) != 3 for color in rgb):
        raise LayoutError(f"{path} is not a valid color file: colors and rgb entries do not match")
    return q, colors, rgb


def display_colors(table: Union[ColorTable, BaselineColorTable]) -> list[tuple[float, float, float]]:
    if isinstance(table, BaselineColorTable):
        return [tuple(float(c) for c in row) for row in table.col]
    return colors_to_display(table)
