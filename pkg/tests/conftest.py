import math

import numpy as np
import pytest

from peacock.fixtures import make_ordered_bundles
from peacock.model import EdgeCurve, GraphLayout


def _random_layout(seed, max_edges=40, max_controls=12, size=100.0, noise=1.0, dyadic=False):
    """Edges that follow random shared backbones for part of their length, so that some pairs are bundled."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, max_edges + 1))
    num_backbones = int(rng.integers(1, 5))
    backbones = []
    for _ in range(num_backbones):
        start = rng.uniform(0, size, 2)
        steps = rng.normal(0, size / 10, (max_controls, 2))
        backbones.append(start + np.cumsum(steps, axis=0))

    edges = []
    for edge_id in range(m):
        backbone = backbones[int(rng.integers(num_backbones))]
        c = int(rng.integers(1, max_controls + 1))
        first = int(rng.integers(0, max_controls - c + 1))
        controls = backbone[first:first + c] + rng.normal(0, noise, (c, 2))
        v1 = controls[0] + rng.normal(0, noise, 2)
        v2 = controls[-1] + rng.normal(0, noise, 2)
        points = np.vstack([v1, v2, controls])
        if dyadic:
            points = np.round(points * 4) / 4
        points = [tuple(float(v) for v in p) for p in points]
        edges.append(EdgeCurve(edge_id, points[0], points[1], tuple(points[2:])))
    return GraphLayout(tuple(edges))


class LoopDetector:
    """Bundling detection written out as plain loops over the sample points, for checking the array code."""

    @staticmethod
    def samples(edge, midpoints=False):
        points = [(p.x, p.y) for p in edge.controls]
        if midpoints and len(points) > 1:
            return [(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])) for a, b in zip(points[:-1], points[1:])]
        return points

    @staticmethod
    def close_flags(points_i, points_j, threshold):
        close = []
        for xi, yi in points_i:
            hit = False
            for xj, yj in points_j:
                dx, dy = xi - xj, yi - yj
                if math.sqrt(dx * dx + dy * dy) <= threshold:
                    hit = True
                    break
            close.append(hit)
        return close

    @staticmethod
    def runs(close):
        """Maximal runs of True values as inclusive ``(start, end)`` index pairs."""
        runs = []
        start = None
        for idx, flag in enumerate(close):
            if flag and start is None:
                start = idx
            elif not flag and start is not None:
                runs.append((start, idx - 1))
                start = None
        if start is not None:
            runs.append((start, len(close) - 1))
        return runs

    def first_long_run(self, edge_i, edge_j, threshold, k_min, midpoints=False):
        """The earliest maximal run of at least ``K_ij`` close points of ``edge_i``, or None."""
        points_i = self.samples(edge_i, midpoints)
        points_j = self.samples(edge_j, midpoints)
        needed = max(1, int(max(len(points_i), len(points_j)) * k_min))
        for start, end in self.runs(self.close_flags(points_i, points_j, threshold)):
            if end - start + 1 >= needed:
                return start, end
        return None

    def flags(self, layout, threshold, k_min, midpoints=False):
        m = layout.m
        flags = np.zeros((m, m), dtype=bool)
        for i, edge_i in enumerate(layout.edges):
            for j, edge_j in enumerate(layout.edges):
                if i != j:
                    flags[i, j] = self.first_long_run(edge_i, edge_j, threshold, k_min, midpoints) is not None
        return flags


@pytest.fixture(scope="session")
def random_layout():
    return _random_layout


@pytest.fixture
def ordered_fixture():
    return make_ordered_bundles(groups=6, edges_per_bundle=6, reverse_last=True, seed=0)


@pytest.fixture
def parallel_pair():
    """Two parallel unit edges at vertical offset 1."""
    return GraphLayout((
        EdgeCurve(0, (0.0, 0.0), (1.0, 0.0), ((0.0, 0.0), (0.5, 0.0), (1.0, 0.0))),
        EdgeCurve(1, (0.0, 1.0), (1.0, 1.0), ((0.0, 1.0), (0.5, 1.0), (1.0, 1.0))),
    ))


@pytest.fixture(scope="session")
def loop_detector():
    return LoopDetector()
