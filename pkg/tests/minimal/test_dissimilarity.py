import numpy as np
import pytest
from pytest import approx

from peacock.dissimilarity import build_dissimilarity_matrix, endpoint_dissimilarity
from peacock.model import EdgeCurve, GraphLayout


def straight(edge_id, v1, v2):
    return EdgeCurve(edge_id, v1, v2, (v1, v2))


def swap_endpoints(layout, edge_ids):
    return GraphLayout(tuple(
        EdgeCurve(edge.id, edge.v2, edge.v1, edge.controls) if edge.id in edge_ids else edge
        for edge in layout.edges
    ))


class TestEndpointDissimilarity:
    def test_identical(self):
        assert endpoint_dissimilarity(straight(0, (1, 2), (3, 4)), straight(1, (1, 2), (3, 4))) == 0

    def test_swapped(self):
        assert endpoint_dissimilarity(straight(0, (1, 2), (3, 4)), straight(1, (3, 4), (1, 2))) == 0

    def test_parallel_unit_edges(self):
        i = straight(0, (0, 0), (1, 0))
        j = straight(1, (0, 1), (1, 1))
        assert endpoint_dissimilarity(i, j) == 2

    def test_symmetric(self):
        i = straight(0, (0, 0), (5, 1))
        j = straight(1, (2, 7), (-3, 4))
        assert endpoint_dissimilarity(i, j) == endpoint_dissimilarity(j, i)

    def test_controls_are_ignored(self):
        i = EdgeCurve(0, (0, 0), (1, 0), ((0, 0), (0.5, 30), (1, 0)))
        j = straight(1, (0, 1), (1, 1))
        assert endpoint_dissimilarity(i, j) == 2


class TestDissimilarityMatrix:
    def test_single_edge(self):
        d = build_dissimilarity_matrix(GraphLayout((straight(0, (0, 0), (1, 1)),)))
        np.testing.assert_array_equal(d.d, [[0.0]])

    def test_parallel_pair(self, parallel_pair):
        np.testing.assert_array_equal(build_dissimilarity_matrix(parallel_pair).d, [[0, 2], [2, 0]])

    def test_matches_pairwise(self, ordered_fixture, random_layout):
        for layout in (ordered_fixture.layout, random_layout(11)):
            d = build_dissimilarity_matrix(layout)
            for i, edge_i in enumerate(layout.edges):
                for j, edge_j in enumerate(layout.edges):
                    assert d.d[i, j] == approx(endpoint_dissimilarity(edge_i, edge_j), rel=1e-12, abs=1e-12)

    def test_invariants(self, random_layout):
        d = build_dissimilarity_matrix(random_layout(12)).d
        np.testing.assert_array_equal(d, d.T)
        assert np.all(np.diag(d) == 0)
        assert np.all(np.isfinite(d))
        assert np.all(d >= 0)

    def test_read_only(self, parallel_pair):
        d = build_dissimilarity_matrix(parallel_pair)
        with pytest.raises(ValueError):
            d.d[0, 1] = 3

    def test_endpoint_swap(self, random_layout):
        layout = random_layout(13)
        swapped = swap_endpoints(layout, {0, 2, 3})
        np.testing.assert_array_equal(build_dissimilarity_matrix(swapped).d, build_dissimilarity_matrix(layout).d)

    @pytest.mark.parametrize(
        "matrix, offset",
        [
            (((1, 0), (0, 1)), (17, -5)),
            (((0, -1), (1, 0)), (0, 0)),
            (((-1, 0), (0, -1)), (-250, 3)),
            (((0, 1), (-1, 0)), (8.5, 8.25)),
        ],
    )
    def test_exact_rigid_motions(self, random_layout, matrix, offset):
        layout = random_layout(14, dyadic=True)
        moved = layout.transformed(matrix, offset)
        np.testing.assert_array_equal(build_dissimilarity_matrix(moved).d, build_dissimilarity_matrix(layout).d)

    def test_general_rotation(self, ordered_fixture):
        angle = 1.1
        rotation = ((np.cos(angle), -np.sin(angle)), (np.sin(angle), np.cos(angle)))
        moved = ordered_fixture.layout.transformed(rotation, (3.3, -7.1))
        np.testing.assert_allclose(
            build_dissimilarity_matrix(moved).d, build_dissimilarity_matrix(ordered_fixture.layout).d, atol=1e-9
        )
