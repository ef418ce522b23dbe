"""Reference coloring that puts endpoint positions straight into color channels.

Each edge gets the unnormalized color ``(min(x1, x2), 0, min(y1, y2))`` from its endpoints, and every channel is then
min-max scaled over all edges. The green channel is constant and ends up at 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GraphLayout


@dataclass(frozen=True)
class BaselineColorTable:
    """``(M, 3)`` RGB colors in ``[0, 1]``."""

    col: np.ndarray

    @property
    def m(self) -> int:
        return self.col.shape[0]


def unnormalized_baseline(layout: GraphLayout) -> np.ndarray:
    v1, v2 = layout.endpoint_arrays
    low = np.minimum(v1, v2)
    return np.column_stack([low[:, 0], np.zeros(layout.m), low[:, 1]])


def baseline_colors(layout: GraphLayout) -> BaselineColorTable:
    raw = unnormalized_baseline(layout)
    lo = raw.min(axis=0)
    spread = raw.max(axis=0) - lo
    col = np.divide(raw - lo, spread, out=np.full_like(raw, 0.5), where=spread > 0)
    col = np.clip(col, 0.0, 1.0)
    col.setflags(write=False)
    return BaselineColorTable(col)
