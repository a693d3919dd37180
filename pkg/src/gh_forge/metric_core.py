"""
Finite metric spaces, metric validation and Hausdorff distances.

Every solver in gh_forge consumes a :class:`FiniteMetricSpace`: a tuple of
opaque labels and a square, read-only distance matrix. Points are identified
by index; labels are only used for reporting.
"""

import dataclasses
import logging
from typing import Literal, Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, StructuralError

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9

# Upper bound on how many violating triples are collected before sorting.
_WITNESS_POOL = 1000

Axiom = Literal["nonnegativity", "zero_diagonal", "symmetry", "identity", "triangle"]


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """
    A finite set of labelled points with a distance matrix.

    The constructor only checks structure (square matrix, one label per row,
    at least one point). Use :func:`validate_metric` or
    :meth:`FiniteMetricSpace.from_matrix` to check the metric axioms.

    Example:
        space = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        diameter(space)  # 1.0
    """

    labels: tuple[str, ...]
    dist: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        dist = np.array(self.dist, dtype=float, copy=True)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise StructuralError(
                f"Distance matrix must be square, got shape {dist.shape}"
            )
        if dist.shape[0] != len(labels):
            raise StructuralError(
                f"Expected {dist.shape[0]} labels for a {dist.shape[0]}x{dist.shape[0]} "
                f"matrix, got {len(labels)}"
            )
        if not labels:
            raise DomainError("A metric space needs at least one point")
        dist.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", dist)

    @classmethod
    def from_matrix(
        cls,
        dist: Union[np.ndarray, Sequence[Sequence[float]]],
        labels: Optional[Sequence[str]] = None,
        validate: bool = True,
    ) -> "FiniteMetricSpace":
        """
        Build a space from a matrix, generating labels "0", "1", ... when omitted.

        Raises:
            DomainError: If ``validate`` is set and an axiom is violated.
        """
        matrix = np.asarray(dist, dtype=float)
        if labels is None:
            labels = [str(i) for i in range(matrix.shape[0] if matrix.ndim else 0)]
        space = cls(tuple(labels), matrix)
        if validate:
            report = validate_metric(space)
            if not report.ok:
                raise DomainError(f"Not a metric: {report.summary()}")
        return space

    @classmethod
    def single_point(cls, label: str = "*") -> "FiniteMetricSpace":
        return cls((label,), np.zeros((1, 1)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def restrict(self, members: Sequence[int]) -> "FiniteMetricSpace":
        """Return the subspace on ``members`` (in the given order)."""
        index = np.asarray(members, dtype=int)
        return FiniteMetricSpace(
            tuple(self.labels[i] for i in index), self.dist[np.ix_(index, index)]
        )

    def permuted(self, order: Sequence[int]) -> "FiniteMetricSpace":
        """Relabel points so that new point ``k`` is old point ``order[k]``."""
        if sorted(order) != list(range(self.size)):
            raise DomainError("order must be a permutation of the point indices")
        return self.restrict(order)


@dataclasses.dataclass(frozen=True)
class SubsetRef:
    """A nonempty subset of the points of one ambient space."""

    space: FiniteMetricSpace
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        members = tuple(int(m) for m in self.members)
        if not members:
            raise DomainError("A subset must have at least one member")
        bad = [m for m in members if m < 0 or m >= self.space.size]
        if bad:
            raise DomainError(
                f"Indices {bad} out of range for a space of {self.space.size} points"
            )
        object.__setattr__(self, "members", members)

    @classmethod
    def whole(cls, space: FiniteMetricSpace) -> "SubsetRef":
        return cls(space, tuple(range(space.size)))


@dataclasses.dataclass(frozen=True)
class Violation:
    """One violated axiom with its witness indices.

    For ``triangle`` the witness is ``(i, k, j)``: d(i, k) > d(i, j) + d(j, k).
    """

    axiom: Axiom
    witness: tuple[int, ...]
    excess: float

    def describe(self) -> str:
        if self.axiom == "triangle":
            i, k, j = self.witness
            return f"triangle ({i},{k}) via {j} exceeds by {self.excess:.3g}"
        return f"{self.axiom} {self.witness} off by {self.excess:.3g}"


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()
    total: int = 0

    def by_axiom(self, axiom: Axiom) -> list[Violation]:
        return [v for v in self.violations if v.axiom == axiom]

    def summary(self) -> str:
        if self.ok:
            return "ok"
        shown = "; ".join(v.describe() for v in self.violations)
        return f"{self.total} violation(s): {shown}"


def _pairs(mask: np.ndarray) -> list[tuple[int, ...]]:
    return [tuple(int(i) for i in idx) for idx in np.argwhere(mask)]


def validate_metric(
    space: Union[FiniteMetricSpace, np.ndarray, Sequence[Sequence[float]]],
    tol: float = TOLERANCE,
    max_witnesses: int = 10,
) -> ValidationReport:
    """
    Check the metric axioms on a distance matrix within ``tol``.

    Args:
        space: A FiniteMetricSpace or a raw square matrix.
        tol: Absolute tolerance for every axiom.
        max_witnesses: How many violations to keep in the report (sorted by
            axiom, then witness indices).

    Returns:
        ValidationReport: ``ok`` iff all axioms hold.

    Raises:
        StructuralError: If a raw matrix is not square.
    """
    if isinstance(space, FiniteMetricSpace):
        dist = space.dist
    else:
        dist = np.asarray(space, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise StructuralError(f"Distance matrix must be square, got shape {dist.shape}")

    found: list[Violation] = []
    total = 0

    negative = dist < -tol
    total += int(negative.sum())
    found += [Violation("nonnegativity", w, float(-dist[w])) for w in _pairs(negative)[:_WITNESS_POOL]]

    diagonal = np.abs(np.diag(dist)) > tol
    total += int(diagonal.sum())
    found += [
        Violation("zero_diagonal", (int(i),), float(abs(dist[i, i])))
        for i in np.flatnonzero(diagonal)[:_WITNESS_POOL]
    ]

    asymmetric = np.triu(np.abs(dist - dist.T) > tol, k=1)
    total += int(asymmetric.sum())
    found += [
        Violation("symmetry", w, float(abs(dist[w] - dist[w[::-1]])))
        for w in _pairs(asymmetric)[:_WITNESS_POOL]
    ]

    coincident = np.triu(np.abs(dist) <= tol, k=1)
    total += int(coincident.sum())
    found += [Violation("identity", w, 0.0) for w in _pairs(coincident)[:_WITNESS_POOL]]

    triangle: list[Violation] = []
    for j in range(dist.shape[0]):
        excess = dist - (dist[:, j, None] + dist[None, j, :])
        bad = excess > tol
        count = int(bad.sum())
        if not count:
            continue
        total += count
        if len(triangle) < _WITNESS_POOL:
            for i, k in _pairs(bad)[: _WITNESS_POOL - len(triangle)]:
                triangle.append(Violation("triangle", (i, k, j), float(excess[i, k])))
    found += triangle

    order = {"nonnegativity": 0, "zero_diagonal": 1, "symmetry": 2, "identity": 3, "triangle": 4}
    found.sort(key=lambda v: (order[v.axiom], v.witness))
    report = ValidationReport(ok=total == 0, violations=tuple(found[:max_witnesses]), total=total)
    if not report.ok:
        logger.debug("Metric validation failed: %s", report.summary())
    return report


def diameter(space: FiniteMetricSpace) -> float:
    """Largest pairwise distance."""
    if space.size == 0:  # pragma: no cover - the constructor rejects empty spaces
        raise DomainError("The diameter of an empty space is undefined")
    return float(space.dist.max())


def distance_to_subset(space: FiniteMetricSpace, point: int, subset: SubsetRef) -> float:
    """d(x, A) = min over a in A of d(x, a)."""
    if subset.space is not space:
        raise DomainError("Subset belongs to a different ambient space")
    return float(space.dist[point, list(subset.members)].min())


def _check_same_space(a: SubsetRef, b: SubsetRef) -> np.ndarray:
    if a.space is not b.space:
        raise DomainError("Hausdorff distance needs two subsets of the same ambient space")
    return a.space.dist[np.ix_(a.members, b.members)]


def directed_hausdorff(a: SubsetRef, b: SubsetRef) -> float:
    """sup over a in A of d(a, B)."""
    block = _check_same_space(a, b)
    return float(block.min(axis=1).max())


def hausdorff_distance(a: SubsetRef, b: SubsetRef) -> float:
    """
    Hausdorff distance between two subsets of one ambient space.

    Raises:
        DomainError: If the subsets live in different spaces.
    """
    block = _check_same_space(a, b)
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


def scaled_space(space: FiniteMetricSpace, factor: float) -> FiniteMetricSpace:
    """Multiply every distance by ``factor`` (> 0)."""
    if factor <= 0:
        raise DomainError(f"Scale factor must be positive, got {factor}")
    return FiniteMetricSpace(space.labels, space.dist * factor)


def random_metric_space(
    rng: np.random.Generator, n_points: int, dim: int = 2, scale: float = 1.0
) -> FiniteMetricSpace:
    """Euclidean metric on ``n_points`` uniform random points of the unit cube."""
    if n_points < 1:
        raise DomainError("n_points must be positive")
    coords = rng.random((n_points, dim)) * scale
    return FiniteMetricSpace(tuple(f"p{i}" for i in range(n_points)), cdist(coords, coords))
