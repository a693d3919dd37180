"""
Tests for finite metric spaces, metric validation and Hausdorff distances.
"""

import math

import numpy as np
import pytest

from gh_forge.errors import DomainError, StructuralError
from gh_forge.graph_spaces import build_E, circle_space, sample_graph
from gh_forge.metric_core import (
    FiniteMetricSpace,
    SubsetRef,
    diameter,
    directed_hausdorff,
    distance_to_subset,
    hausdorff_distance,
    random_metric_space,
    scaled_space,
    validate_metric,
)


class TestFiniteMetricSpace:
    """Construction and structural checks."""

    def test_from_matrix_generates_labels(self):
        """Labels default to the point indices."""
        space = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        assert space.labels == ("0", "1")
        assert space.size == 2
        assert len(space) == 2

    def test_matrix_is_read_only(self):
        """The stored matrix cannot be modified in place."""
        space = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            space.dist[0, 1] = 5.0

    def test_constructor_copies_input(self):
        """Mutating the source array does not change the space."""
        source = np.array([[0.0, 1.0], [1.0, 0.0]])
        space = FiniteMetricSpace(("a", "b"), source)
        source[0, 1] = 7.0
        assert space.dist[0, 1] == 1.0

    def test_non_square_matrix(self):
        """A rectangular matrix is a structural error."""
        with pytest.raises(StructuralError, match="square"):
            FiniteMetricSpace(("a", "b"), np.zeros((2, 3)))

    def test_label_count_mismatch(self):
        """One label is needed per row."""
        with pytest.raises(StructuralError, match="labels"):
            FiniteMetricSpace(("a",), np.zeros((2, 2)))

    def test_empty_space(self):
        """A space with no points is rejected."""
        with pytest.raises(DomainError):
            FiniteMetricSpace((), np.zeros((0, 0)))

    def test_from_matrix_rejects_non_metric(self):
        """Validation failures surface as DomainError."""
        with pytest.raises(DomainError, match="triangle"):
            FiniteMetricSpace.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]])

    def test_from_matrix_without_validation(self):
        """validate=False keeps a non-metric matrix."""
        space = FiniteMetricSpace.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]], validate=False)
        assert space.dist[0, 2] == 5

    def test_restrict_and_permute(self, square):
        """Subspaces keep distances; permutations relabel points."""
        sub = square.restrict([0, 2])
        assert sub.labels == ("a", "c")
        assert sub.dist[0, 1] == 2
        perm = square.permuted([3, 2, 1, 0])
        assert perm.labels == ("d", "c", "b", "a")
        assert perm.dist[0, 3] == square.dist[3, 0]

    def test_permuted_requires_permutation(self, square):
        """A repeated index is not a permutation."""
        with pytest.raises(DomainError):
            square.permuted([0, 0, 1, 2])

    def test_single_point(self):
        """The one-point space has diameter zero."""
        assert diameter(FiniteMetricSpace.single_point()) == 0.0


class TestValidateMetric:
    """Axiom checks with witnesses."""

    def test_valid_square(self, square):
        """The 4-cycle metric passes."""
        report = validate_metric(square)
        assert report.ok
        assert report.summary() == "ok"
        assert report.total == 0

    def test_triangle_violation_witness(self):
        """The single violating triple is reported with its excess."""
        report = validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
        assert not report.ok
        triangle = report.by_axiom("triangle")
        assert triangle[0].witness == (0, 2, 1)
        assert triangle[0].excess == pytest.approx(1.0)

    def test_asymmetry(self):
        """An asymmetric matrix fails symmetry once per unordered pair."""
        report = validate_metric([[0, 1], [2, 0]])
        assert [v.witness for v in report.by_axiom("symmetry")] == [(0, 1)]

    def test_negative_and_diagonal(self):
        """Negative entries and nonzero diagonals are both reported."""
        report = validate_metric([[1, -1], [-1, 0]])
        assert report.by_axiom("nonnegativity")
        assert report.by_axiom("zero_diagonal")[0].witness == (0,)

    def test_identity_of_indiscernibles(self):
        """Distinct points at distance zero violate identity."""
        report = validate_metric([[0, 0], [0, 0]])
        assert report.by_axiom("identity")[0].witness == (0, 1)

    def test_tolerance(self):
        """Violations below the tolerance are accepted."""
        matrix = [[0, 1, 2 + 1e-12], [1, 0, 1], [2 + 1e-12, 1, 0]]
        assert validate_metric(matrix).ok
        assert not validate_metric(matrix, tol=0.0).ok

    def test_witness_cap(self):
        """At most max_witnesses violations are kept, total counts all of them."""
        matrix = -np.ones((5, 5))
        np.fill_diagonal(matrix, 0)
        report = validate_metric(matrix, max_witnesses=3)
        assert len(report.violations) == 3
        assert report.total >= 20

    def test_raw_matrix_shape(self):
        """A raw non-square matrix is a structural error."""
        with pytest.raises(StructuralError):
            validate_metric(np.zeros((2, 3)))

    def test_graph_metric_passes(self):
        """Every sampled graph metric is a metric."""
        assert validate_metric(sample_graph(build_E(), math.pi / 16).as_metric).ok

    def test_random_euclidean(self, rng):
        """Euclidean samples always validate."""
        for _ in range(10):
            assert validate_metric(random_metric_space(rng, 7, dim=3)).ok


class TestDiameter:
    """Diameter of finite spaces."""

    def test_circle(self):
        """Antipodal samples are pi apart."""
        assert diameter(circle_space(4)) == pytest.approx(math.pi)
        assert diameter(circle_space(64)) == pytest.approx(math.pi)

    def test_tripod_net(self):
        """The spine of E has length pi."""
        assert diameter(sample_graph(build_E(), math.pi / 64).as_metric) == pytest.approx(math.pi, abs=1e-9)

    def test_permutation_invariant(self, rng):
        """Relabeling does not change the diameter."""
        space = random_metric_space(rng, 6)
        assert diameter(space.permuted(list(rng.permutation(6)))) == diameter(space)


class TestHausdorff:
    """Hausdorff distance and its one-sided parts."""

    def test_equal_subsets(self, circle8):
        """A set is at distance zero from itself."""
        whole = SubsetRef.whole(circle8)
        assert hausdorff_distance(whole, whole) == 0.0

    def test_point_to_circle(self, circle8):
        """From one sample, the farthest point is its antipode."""
        assert hausdorff_distance(SubsetRef(circle8, (0,)), SubsetRef.whole(circle8)) == pytest.approx(math.pi)

    def test_directed_parts(self, circle8):
        """One direction is zero for a subset, the other is not."""
        point = SubsetRef(circle8, (0,))
        whole = SubsetRef.whole(circle8)
        assert directed_hausdorff(point, whole) == 0.0
        assert directed_hausdorff(whole, point) == pytest.approx(math.pi)
        assert distance_to_subset(circle8, 4, point) == pytest.approx(math.pi)

    def test_different_spaces(self, circle8):
        """Subsets of different ambient spaces cannot be compared."""
        other = circle_space(8)
        with pytest.raises(DomainError):
            hausdorff_distance(SubsetRef.whole(circle8), SubsetRef.whole(other))
        with pytest.raises(DomainError):
            distance_to_subset(circle8, 0, SubsetRef.whole(other))

    def test_subset_bounds(self, circle8):
        """Members must be valid indices and the subset nonempty."""
        with pytest.raises(DomainError):
            SubsetRef(circle8, (8,))
        with pytest.raises(DomainError):
            SubsetRef(circle8, ())

    def test_symmetry_and_triangle(self, rng):
        """Hausdorff distance is symmetric and satisfies the triangle inequality."""
        space = random_metric_space(rng, 12)
        for _ in range(30):
            a, b, c = (
                SubsetRef(space, tuple(rng.choice(12, size=int(rng.integers(1, 6)), replace=False)))
                for _ in range(3)
            )
            assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
            assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12


class TestScaling:
    """Scaled copies and random spaces."""

    def test_scaled_space(self, circle8):
        """Distances scale linearly."""
        half = scaled_space(circle8, 0.5)
        assert diameter(half) == pytest.approx(math.pi / 2)
        assert half.labels == circle8.labels

    def test_scale_must_be_positive(self, circle8):
        """Zero or negative factors are rejected."""
        with pytest.raises(DomainError):
            scaled_space(circle8, 0)

    def test_random_space_labels(self, rng):
        """Random points are labelled p0, p1, ..."""
        space = random_metric_space(rng, 3)
        assert space.labels == ("p0", "p1", "p2")
        with pytest.raises(DomainError):
            random_metric_space(rng, 0)
