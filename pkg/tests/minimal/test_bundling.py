import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peacock.bundling import (
    BundleWeightMatrix,
    DetectionParams,
    GridIndex,
    build_spatial_index,
    build_weight_matrix,
    build_weight_matrix_bruteforce,
    bundle_pairs,
    check_dense_size,
    curve_samples,
    detect_pair,
    dump_bundles,
    first_run_start,
    required_run_length,
)
from peacock.config import MAX_DENSE_EDGES, SampleMode
from peacock.errors import ParameterError
from peacock.model import EdgeCurve, GraphLayout


def edge(edge_id, controls):
    return EdgeCurve(edge_id, controls[0], controls[-1], tuple(controls))


@pytest.fixture
def three_edges():
    """Edge 0 leaves along the start of edge 1, edge 2 joins along the end of edge 1."""
    return GraphLayout((
        edge(0, [(0, 0), (1, 0), (1, 3), (1, 6)]),
        edge(1, [(0, 0.1), (1, 0.1), (2, 0.1), (3, 0.1)]),
        edge(2, [(2, 0.2), (3, 0.2), (4, 0.2), (5, 0.2)]),
    ))


class TestRequiredRunLength:
    @pytest.mark.parametrize(
        "c_i, c_j, k_min, expected",
        [(10, 4, 0.4, 4), (1, 1, 0.4, 1), (7, 7, 0.4, 2), (12, 12, 0.4, 4), (5, 3, 1.0, 5), (2, 2, 0.1, 1)],
    )
    def test_values(self, c_i, c_j, k_min, expected):
        assert required_run_length(c_i, c_j, k_min) == expected

    @given(st.integers(1, 200), st.integers(1, 200), st.floats(0.01, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_symmetric_and_positive(self, c_i, c_j, k_min):
        assert required_run_length(c_i, c_j, k_min) == required_run_length(c_j, c_i, k_min)
        assert required_run_length(c_i, c_j, k_min) >= 1


class TestDetectPair:
    def test_identical_curves(self):
        controls = [(0, 0), (1, 2), (3, 1), (4, 4)]
        for run_length in range(1, len(controls) + 1):
            assert detect_pair(edge(0, controls), edge(1, controls), 0.01, run_length)

    def test_far_apart(self):
        a = edge(0, [(0, 0), (1, 0), (2, 0)])
        b = edge(1, [(0, 10), (1, 10), (2, 10)])
        assert not detect_pair(a, b, 1.0, 1)

    def test_three_edges(self, three_edges):
        e0, e1, e2 = three_edges.edges
        assert detect_pair(e0, e1, 0.5, 2)
        assert not detect_pair(e0, e2, 0.5, 2)
        assert detect_pair(e1, e2, 0.5, 2)
        assert not detect_pair(e2, e0, 0.5, 2)

    def test_run_longer_than_curve(self):
        a = edge(0, [(0, 0), (1, 0)])
        assert not detect_pair(a, a, 1.0, 3)

    def test_threshold_is_inclusive(self):
        a = edge(0, [(0, 0)])
        b = edge(1, [(3, 4)])
        assert detect_pair(a, b, 5.0, 1)
        assert not detect_pair(a, b, 4.999, 1)

    def test_run_must_be_consecutive(self):
        a = edge(0, [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)])
        b = edge(1, [(0, 0), (2, 0), (4, 0), (20, 0), (40, 0)])
        assert not detect_pair(a, b, 0.5, 2)
        assert detect_pair(b, a, 0.5, 2)

    @pytest.mark.parametrize(
        "close, run_length, expected",
        [
            ([1, 1, 0, 1, 1, 1], 3, 3),
            ([1, 1, 0, 1, 1, 1], 2, 0),
            ([0, 0, 0], 1, None),
            ([1, 1], 3, None),
            ([0, 1, 1, 1, 1], 4, 1),
        ],
    )
    def test_first_run_start(self, close, run_length, expected):
        assert first_run_start(np.array(close, dtype=bool), run_length) == expected


class TestDetectionParams:
    def test_defaults(self):
        params = DetectionParams()
        assert params.t_abs is None
        assert params.t_frac == 0.03
        assert params.k_min == 0.4
        assert params.epsilon == 0.001
        assert params.samples is SampleMode.CONTROLS

    def test_both_thresholds(self):
        with pytest.raises(ParameterError, match="not both"):
            DetectionParams(t_abs=1.0, t_frac=0.1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"t_abs": 0.0},
            {"t_abs": -1.0},
            {"t_abs": float("inf")},
            {"t_frac": 0.0},
            {"t_frac": 1.5},
            {"k_min": 0.0},
            {"k_min": 1.1},
            {"epsilon": -0.1},
            {"epsilon": 2.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            DetectionParams(**kwargs)

    def test_epsilon_message_names_range(self):
        with pytest.raises(ParameterError, match=r"\[0, 1\]"):
            DetectionParams(epsilon=2)

    def test_samples_from_string(self):
        assert DetectionParams(samples="Midpoints").samples is SampleMode.MIDPOINTS

    def test_resolve_fraction(self, parallel_pair):
        assert DetectionParams(t_frac=0.5).resolve_threshold(parallel_pair) == 0.5
        assert DetectionParams(t_abs=7.0).resolve_threshold(parallel_pair) == 7.0

    def test_zero_extent(self):
        layout = GraphLayout((edge(0, [(1, 1)]), edge(1, [(1, 1)])))
        with pytest.raises(ParameterError, match="absolute threshold"):
            DetectionParams().resolve_threshold(layout)
        assert build_weight_matrix(layout, DetectionParams(t_abs=1.0)).num_bundled_pairs == 2


class TestWeightMatrix:
    def test_epsilon_zero_nothing_close(self):
        layout = GraphLayout((edge(0, [(0, 0), (1, 0)]), edge(1, [(0, 50), (1, 50)])))
        w = build_weight_matrix(layout, DetectionParams(t_abs=1.0, epsilon=0.0))
        assert not w.weights.any()
        assert not w.bundled_flag.any()

    def test_warns_without_bundles(self):
        layout = GraphLayout((edge(0, [(0, 0), (1, 0)]), edge(1, [(0, 50), (1, 50)])))
        with pytest.warns(UserWarning, match="No bundled edge pairs"):
            build_weight_matrix(layout, DetectionParams(t_abs=1.0))

    def test_epsilon_one(self, random_layout):
        w = build_weight_matrix(random_layout(1), DetectionParams(t_abs=3.0, epsilon=1.0))
        expected = np.ones((w.m, w.m))
        np.fill_diagonal(expected, 0)
        np.testing.assert_array_equal(w.weights, expected)

    def test_weights_follow_flags(self, random_layout):
        w = build_weight_matrix(random_layout(2), DetectionParams(t_abs=3.0, epsilon=0.25))
        assert np.all(np.diag(w.weights) == 0)
        assert not np.diag(w.bundled_flag).any()
        off_diagonal = ~np.eye(w.m, dtype=bool)
        assert np.all((w.weights == 1)[off_diagonal] == w.bundled_flag[off_diagonal])
        assert set(np.unique(w.weights[off_diagonal])) <= {0.25, 1.0}

    def test_three_edges_matrix(self, three_edges):
        params = DetectionParams(t_abs=0.5, k_min=0.5)
        w = build_weight_matrix(three_edges, params)
        np.testing.assert_array_equal(
            w.bundled_flag,
            [[False, True, False], [True, False, True], [False, True, False]],
        )

    def test_asymmetric(self):
        layout = GraphLayout((
            edge(0, [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]),
            edge(1, [(0, 0), (2, 0), (4, 0), (20, 0), (40, 0)]),
        ))
        w = build_weight_matrix(layout, DetectionParams(t_abs=0.5))
        assert not w.bundled_flag[0, 1]
        assert w.bundled_flag[1, 0]
        assert w.weights[0, 1] == 0.001
        assert w.weights[1, 0] == 1.0
        np.testing.assert_array_equal(w.partners(0), [1])

    def test_with_epsilon(self, random_layout):
        w = build_weight_matrix(random_layout(5), DetectionParams(t_abs=3.0))
        global_w = w.with_epsilon(1.0)
        np.testing.assert_array_equal(global_w.bundled_flag, w.bundled_flag)
        assert global_w.epsilon == 1.0
        with pytest.raises(ParameterError):
            w.with_epsilon(1.5)

    def test_read_only(self, random_layout):
        w = build_weight_matrix(random_layout(6), DetectionParams(t_abs=3.0))
        with pytest.raises(ValueError):
            w.weights[0, 1] = 0.5

    def test_dense_size_guard(self):
        check_dense_size(MAX_DENSE_EDGES)
        with pytest.raises(ParameterError, match="dense"):
            check_dense_size(MAX_DENSE_EDGES + 1)

    def test_threads_do_not_change_result(self, random_layout):
        layout = random_layout(7)
        params = DetectionParams(t_abs=4.0)
        sequential = build_weight_matrix(layout, params, threads=1)
        for threads in (2, 0):
            parallel = build_weight_matrix(layout, params, threads=threads)
            np.testing.assert_array_equal(parallel.bundled_flag, sequential.bundled_flag)

    def test_fixture_matches_bruteforce(self, ordered_fixture):
        params = DetectionParams()
        fast = build_weight_matrix(ordered_fixture.layout, params)
        slow = build_weight_matrix_bruteforce(ordered_fixture.layout, params)
        np.testing.assert_array_equal(fast.bundled_flag, slow.bundled_flag)
        np.testing.assert_array_equal(fast.weights, slow.weights)

    def test_fixture_matches_loops(self, ordered_fixture, loop_detector):
        layout = ordered_fixture.layout
        params = DetectionParams()
        threshold = params.t_frac * max(layout.extent.width, layout.extent.height)
        expected = loop_detector.flags(layout, threshold, params.k_min)
        np.testing.assert_array_equal(build_weight_matrix(layout, params).bundled_flag, expected)


class TestOracleEquivalence:
    @given(seed=st.integers(0, 2**32 - 1), t_abs=st.floats(0.5, 12.0), k_min=st.sampled_from([0.2, 0.4, 0.7, 1.0]))
    @settings(max_examples=200, deadline=None)
    def test_index_equals_bruteforce(self, random_layout, loop_detector, seed, t_abs, k_min):
        layout = random_layout(seed)
        params = DetectionParams(t_abs=t_abs, k_min=k_min, epsilon=0.0)
        fast = build_weight_matrix(layout, params)
        slow = build_weight_matrix_bruteforce(layout, params)
        np.testing.assert_array_equal(fast.bundled_flag, slow.bundled_flag)
        np.testing.assert_array_equal(fast.bundled_flag, loop_detector.flags(layout, t_abs, k_min))

    @given(seed=st.integers(0, 2**32 - 1), t_abs=st.floats(0.5, 12.0))
    @settings(max_examples=50, deadline=None)
    def test_midpoint_samples_equal_bruteforce(self, random_layout, loop_detector, seed, t_abs):
        layout = random_layout(seed)
        params = DetectionParams(t_abs=t_abs, epsilon=0.0, samples="midpoints")
        fast = build_weight_matrix(layout, params)
        slow = build_weight_matrix_bruteforce(layout, params)
        np.testing.assert_array_equal(fast.bundled_flag, slow.bundled_flag)
        expected = loop_detector.flags(layout, t_abs, params.k_min, midpoints=True)
        np.testing.assert_array_equal(fast.bundled_flag, expected)


class TestMonotonicity:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    @pytest.mark.parametrize("seed", range(50))
    def test_threshold(self, random_layout, seed):
        layout = random_layout(seed)
        previous = None
        for t_abs in (0.5, 1.0, 2.0, 4.0, 8.0):
            flags = build_weight_matrix(layout, DetectionParams(t_abs=t_abs, epsilon=0.0)).bundled_flag
            if previous is not None:
                assert np.all(flags[previous])
            previous = flags

    @pytest.mark.filterwarnings("ignore::UserWarning")
    @pytest.mark.parametrize("seed", range(50))
    def test_k_min(self, random_layout, seed):
        layout = random_layout(seed)
        previous = None
        for k_min in (0.1, 0.3, 0.4, 0.6, 1.0):
            flags = build_weight_matrix(layout, DetectionParams(t_abs=3.0, k_min=k_min, epsilon=0.0)).bundled_flag
            if previous is not None:
                assert not np.any(flags & ~previous)
            previous = flags


class TestRigidMotion:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    @pytest.mark.parametrize("seed", range(20))
    def test_exact_motions(self, random_layout, seed):
        layout = random_layout(seed, dyadic=True)
        params = DetectionParams(t_abs=3.0, epsilon=0.0)
        flags = build_weight_matrix(layout, params).bundled_flag
        motions = [
            (((1, 0), (0, 1)), (17, -5)),
            (((0, -1), (1, 0)), (0, 0)),
            (((-1, 0), (0, -1)), (-250, 3)),
            (((0, 1), (-1, 0)), (8, 8)),
        ]
        for matrix, offset in motions:
            moved = layout.transformed(matrix, offset)
            np.testing.assert_array_equal(build_weight_matrix(moved, params).bundled_flag, flags)

    def test_fixture_under_rotation(self, ordered_fixture):
        params = DetectionParams(t_abs=5.0)
        flags = build_weight_matrix(ordered_fixture.layout, params).bundled_flag
        angle = 0.3
        rotation = ((np.cos(angle), -np.sin(angle)), (np.sin(angle), np.cos(angle)))
        moved = ordered_fixture.layout.transformed(rotation, (12.5, -40.25))
        np.testing.assert_array_equal(build_weight_matrix(moved, params).bundled_flag, flags)


class TestSpatialIndex:
    def test_single_point(self):
        index = GridIndex(np.array([[2.0, 3.0]]), np.array([0]), np.array([0]), 1.0, (0.0, 0.0))
        assert index.query((2.0, 3.0)) == [(0, 0)]

    def test_just_outside(self):
        index = GridIndex(np.array([[0.0, 0.0]]), np.array([0]), np.array([0]), 1.0, (0.0, 0.0))
        assert index.query((1.001, 0.0)) == []
        assert index.query((1.0, 0.0)) == [(0, 0)]

    def test_radius_above_cell_size(self):
        index = GridIndex(np.array([[0.0, 0.0]]), np.array([0]), np.array([0]), 1.0, (0.0, 0.0))
        with pytest.raises(ParameterError):
            index.query((0.0, 0.0), radius=2.0)

    def test_random_cloud_matches_linear_scan(self):
        rng = np.random.default_rng(0)
        points = rng.uniform(0, 100, (500, 2))
        cell = 7.5
        index = GridIndex(points, np.arange(500), np.zeros(500, dtype=int), cell, (0.0, 0.0))
        for query in rng.uniform(-10, 110, (100, 2)):
            expected = np.flatnonzero(np.hypot(*(points - query).T) <= cell)
            assert sorted(owner for owner, _ in index.query(query)) == sorted(expected)

    def test_build_from_layout(self, three_edges):
        index = build_spatial_index(three_edges, 0.5)
        assert len(index.points) == 12
        found = index.query((3.0, 0.15))
        assert sorted(found) == [(1, 3), (2, 1)]


class TestSamples:
    def test_controls(self, parallel_pair):
        np.testing.assert_array_equal(curve_samples(parallel_pair.edges[0]), parallel_pair.edges[0].control_array)

    def test_midpoints(self, parallel_pair):
        np.testing.assert_array_equal(
            curve_samples(parallel_pair.edges[0], SampleMode.MIDPOINTS), [[0.25, 0.0], [0.75, 0.0]]
        )

    def test_single_control_midpoints(self):
        single = edge(0, [(1.0, 2.0)])
        np.testing.assert_array_equal(curve_samples(single, "midpoints"), [[1.0, 2.0]])


class TestBundlePairs:
    def test_sorted_pairs(self, three_edges):
        w = build_weight_matrix(three_edges, DetectionParams(t_abs=0.5, k_min=0.5))
        assert bundle_pairs(w) == [(0, 1), (1, 0), (1, 2), (2, 1)]

    def test_dump(self, tmp_path, three_edges):
        w = build_weight_matrix(three_edges, DetectionParams(t_abs=0.5, k_min=0.5))
        path = tmp_path / "bundles.json"
        dump_bundles(w, path)
        assert json.loads(path.read_text()) == [{"i": 0, "j": 1}, {"i": 1, "j": 0}, {"i": 1, "j": 2}, {"i": 2, "j": 1}]

    def test_from_flags_clears_diagonal(self):
        w = BundleWeightMatrix.from_flags(np.ones((3, 3), dtype=bool), 0.5)
        assert w.num_bundled_pairs == 6
        assert np.all(np.diag(w.weights) == 0)
