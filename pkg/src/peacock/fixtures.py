"""Synthetic bundled layouts with known bundles, for tests and demos.

The curves are generated already bundled: all edges of a bundle run through the same corridor of waypoints (with
a little seeded jitter), so no bundling algorithm is needed.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .bundling import BundleWeightMatrix, DetectionParams, build_weight_matrix
from .config import DEFAULT_EPSILON, DEFAULT_K_MIN, DEFAULT_T_FRAC
from .errors import ParameterError
from .model import EdgeCurve, GraphLayout, PathLike, Point2

NUM_WAYPOINTS = 10

# Corridor positions of the crossing fixture, along the bundle's diameter in units of the radius. The four points
# around 0 form the shared crossing region.
CROSSING_WAYPOINTS = (0.6, 0.4, 0.2, 0.015, 0.005, -0.005, -0.015, -0.2, -0.4, -0.6)


@dataclass(frozen=True)
class GroundTruth:
    """Bundles of a generated layout.

    Attributes
    ----------
    bundles : list of lists of int
        Edge ids of each bundle.
    order : list of lists of int
        Rank of each of those edges in the connection order of its bundle.
    t_frac, k_min : float
        Detection parameters the layout was generated for.
    """

    bundles: tuple[tuple[int, ...], ...]
    order: tuple[tuple[int, ...], ...]
    t_frac: float = DEFAULT_T_FRAC
    k_min: float = DEFAULT_K_MIN

    def intra_bundle_flags(self, m: int) -> np.ndarray:
        """``(M, M)`` boolean matrix that is True for every ordered pair of distinct edges in the same bundle."""
        flags = np.zeros((m, m), dtype=bool)
        for bundle in self.bundles:
            ids = np.array(bundle)
            flags[np.ix_(ids, ids)] = True
        np.fill_diagonal(flags, False)
        return flags

    def detection_params(self, epsilon: float = DEFAULT_EPSILON) -> DetectionParams:
        """The detection parameters the bundles are expected to be found with."""
        return DetectionParams(t_frac=self.t_frac, k_min=self.k_min, epsilon=epsilon)

    def to_dict(self) -> dict:
        return {
            "bundles": [list(b) for b in self.bundles],
            "order": [list(o) for o in self.order],
            "t_frac": self.t_frac,
            "k_min": self.k_min,
        }


class Fixture(NamedTuple):
    layout: GraphLayout
    truth: GroundTruth


def _rotate(point: np.ndarray, angle: float) -> Point2:
    c, s = math.cos(angle), math.sin(angle)
    return Point2(float(c * point[0] - s * point[1]), float(s * point[0] + c * point[1]))


def _on_circle(radius: float, angle: float) -> np.ndarray:
    return np.array([radius * math.cos(angle), radius * math.sin(angle)])


def _group_name(g: int) -> str:
    return chr(ord("A") + g) if g < 26 else f"G{g}"


def _offsets(count: int, half_spread: float) -> np.ndarray:
    if count == 1:
        return np.zeros(1)
    return np.linspace(-half_spread, half_spread, count)


def make_ordered_bundles(groups: int = 6, edges_per_bundle: int = 6, reverse_last: bool = True, seed: int = 0,
                         radius: float = 100.0) -> Fixture:
    """Parallel bundles between node groups on a circle.

    Group ``g`` connects to group ``groups - 1 - g`` through its own straight corridor, node ``k`` of the source
    group to node ``k`` of the target group, so nearby sources go to nearby targets. With ``reverse_last`` the last
    bundle connects in reverse order instead. Corridors of different bundles are far enough apart that only edges
    of the same bundle are detected as bundled at the default threshold (for up to 12 groups).

    Parameters
    ----------
    groups : int (optional, default=6)
        Number of node groups, even and at least 2. There are ``groups / 2`` bundles.
    edges_per_bundle : int (optional, default=6)
    reverse_last : bool (optional, default=True)
    seed : int (optional, default=0)
        Seed of the waypoint jitter.
    radius : float (optional, default=100)
        Radius of the circle the nodes are placed on.
    """
    if groups < 2 or groups % 2:
        raise ParameterError(f"groups must be an even number >= 2, not {groups}")
    if edges_per_bundle < 2:
        raise ParameterError(f"edges_per_bundle must be at least 2, not {edges_per_bundle}")
    if not radius > 0:
        raise ParameterError(f"radius must be > 0, not {radius}")
    if groups > 12:
        warnings.warn(f"With {groups} groups the corridors of neighbouring bundles may come within the detection"
                      + " threshold of each other")

    rng = np.random.default_rng(seed)
    rotation = math.pi / 4
    half_spread = 0.25 * math.pi / groups
    jitter = 0.002 * radius
    offsets = _offsets(edges_per_bundle, half_spread)
    fractions = np.linspace(0.2, 0.8, NUM_WAYPOINTS)[:, None]
    num_bundles = groups // 2

    edges = []
    nodes = []
    bundles = []
    order = []
    for b in range(num_bundles):
        theta = 2 * math.pi * (b + 0.5) / groups
        source_name, target_name = _group_name(b), _group_name(groups - 1 - b)
        reverse = reverse_last and b == num_bundles - 1

        corridor_start = _on_circle(radius, theta)
        corridor_end = _on_circle(radius, -theta)
        corridor = corridor_start + fractions * (corridor_end - corridor_start)

        sources = [_on_circle(radius, theta + delta) for delta in offsets]
        targets = [_on_circle(radius, -(theta + delta)) for delta in offsets]
        nodes.extend((f"{source_name}{k}", _rotate(p, rotation)) for k, p in enumerate(sources))
        nodes.extend((f"{target_name}{k}", _rotate(p, rotation)) for k, p in enumerate(targets))

        ids = []
        for k in range(edges_per_bundle):
            source = sources[k]
            target = targets[edges_per_bundle - 1 - k] if reverse else targets[k]
            waypoints = corridor + rng.uniform(-jitter, jitter, size=corridor.shape)
            controls = [source, *waypoints, target]
            edge_id = len(edges)
            edges.append(EdgeCurve(
                edge_id,
                _rotate(source, rotation),
                _rotate(target, rotation),
                tuple(_rotate(p, rotation) for p in controls),
            ))
            ids.append(edge_id)
        bundles.append(tuple(ids))
        order.append(tuple(range(edges_per_bundle)))

    truth = GroundTruth(tuple(bundles), tuple(order))
    return Fixture(GraphLayout(tuple(edges), tuple(nodes)), truth)


def make_crossing_bundles(bundles: int = 3, edges_per_bundle: int = 5, seed: int = 0,
                          radius: float = 100.0) -> Fixture:
    """Bundles along diameters of a circle that all cross in a small region at the center.

    Far from the center the corridors are well separated; in the center four waypoints of every bundle lie within
    ``0.015 * radius`` of the center, which is enough for edges of different bundles to be detected as bundled at the
    default threshold. The ground truth only lists the bundles the edges were generated in.
    """
    if bundles < 2:
        raise ParameterError(f"bundles must be at least 2, not {bundles}")
    if edges_per_bundle < 1:
        raise ParameterError(f"edges_per_bundle must be at least 1, not {edges_per_bundle}")
    if not radius > 0:
        raise ParameterError(f"radius must be > 0, not {radius}")

    rng = np.random.default_rng(seed)
    half_spread = 0.25 * math.pi / bundles
    jitter = 0.0005 * radius
    offsets = _offsets(edges_per_bundle, half_spread)
    positions = np.array(CROSSING_WAYPOINTS)[:, None] * radius

    edges = []
    nodes = []
    groups = []
    order = []
    for b in range(bundles):
        alpha = math.pi * b / bundles
        direction = np.array([math.cos(alpha), math.sin(alpha)])
        corridor = positions * direction
        sources = [_on_circle(radius, alpha + delta) for delta in offsets]
        targets = [_on_circle(radius, alpha + math.pi + delta) for delta in offsets]
        nodes.extend((f"{_group_name(2 * b)}{k}", Point2(*map(float, p))) for k, p in enumerate(sources))
        nodes.extend((f"{_group_name(2 * b + 1)}{k}", Point2(*map(float, p))) for k, p in enumerate(targets))

        ids = []
        for k in range(edges_per_bundle):
            waypoints = corridor + rng.uniform(-jitter, jitter, size=corridor.shape)
            controls = [sources[k], *waypoints, targets[k]]
            edge_id = len(edges)
            edges.append(EdgeCurve(
                edge_id,
                Point2(*map(float, sources[k])),
                Point2(*map(float, targets[k])),
                tuple(Point2(*map(float, p)) for p in controls),
            ))
            ids.append(edge_id)
        groups.append(tuple(ids))
        order.append(tuple(range(edges_per_bundle)))

    truth = GroundTruth(tuple(groups), tuple(order))
    return Fixture(GraphLayout(tuple(edges), tuple(nodes)), truth)


def truth_matches(weight_matrix: BundleWeightMatrix, truth: GroundTruth) -> bool:
    """Whether the detected flags are exactly the intra-bundle pairs of ``truth``."""
    return bool(np.array_equal(weight_matrix.bundled_flag, truth.intra_bundle_flags(weight_matrix.m)))


def detects_as_generated(fixture: Fixture, threads: int = 1) -> bool:
    """Run the detection with the parameters stored in the ground truth and compare with the generated bundles."""
    weight_matrix = build_weight_matrix(fixture.layout, fixture.truth.detection_params(), threads=threads)
    return truth_matches(weight_matrix, fixture.truth)


def save_ground_truth(truth: GroundTruth, path: PathLike) -> None:
    Path(path).write_text(json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_ground_truth(path: PathLike) -> GroundTruth:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    return GroundTruth(
        tuple(tuple(int(i) for i in bundle) for bundle in document["bundles"]),
        tuple(tuple(int(r) for r in ranks) for ranks in document["order"]),
        t_frac=float(document.get("t_frac", DEFAULT_T_FRAC)),
        k_min=float(document.get("k_min", DEFAULT_K_MIN)),
    )
