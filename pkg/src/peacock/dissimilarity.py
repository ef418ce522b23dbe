"""How different the colors of two edges should be, measured by where their endpoints are."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .bundling import check_dense_size
from .model import EdgeCurve, GraphLayout

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric ``(M, M)`` endpoint dissimilarities with a zero diagonal."""

    d: np.ndarray

    @property
    def m(self) -> int:
        return self.d.shape[0]


def endpoint_dissimilarity(edge_i: EdgeCurve, edge_j: EdgeCurve) -> float:
    """Summed endpoint distance of two edges under the better of the two ways to match their endpoints.

    ``min(|v1_i - v1_j| + |v2_i - v2_j|, |v1_i - v2_j| + |v2_i - v1_j|)``, so the direction an edge was drawn in does
    not matter.
    """
    def dist(a, b):
        return math.hypot(a.x - b.x, a.y - b.y)

    same = dist(edge_i.v1, edge_j.v1) + dist(edge_i.v2, edge_j.v2)
    swapped = dist(edge_i.v1, edge_j.v2) + dist(edge_i.v2, edge_j.v1)
    return min(same, swapped)


def build_dissimilarity_matrix(layout: GraphLayout) -> DissimilarityMatrix:
    check_dense_size(layout.m)
    v1, v2 = layout.endpoint_arrays
    same = cdist(v1, v1) + cdist(v2, v2)
    swapped = cdist(v1, v2) + cdist(v2, v1)
    d = np.minimum(same, swapped)
    np.fill_diagonal(d, 0.0)
    d.setflags(write=False)
    _log.debug("Endpoint dissimilarities range up to %g", d.max())
    return DissimilarityMatrix(d)
