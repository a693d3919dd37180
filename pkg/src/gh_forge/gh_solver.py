"""
Correspondences, distortion and the Gromov-Hausdorff distance of finite spaces.

The GH distance is half the smallest distortion of a correspondence. It is
computed exactly only for tiny spaces (:func:`exact_gh`, :func:`brute_force_gh`);
larger pairs get certified lower bounds and explicit correspondences whose
distortion gives upper bounds. :func:`glue` realizes a correspondence as an
ambient metric space in which both parts sit isometrically.
"""

import dataclasses
import logging
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError, DomainError, PreconditionError
from .graph_spaces import QUARTER, build_star4, circle_space, sample_graph
from .metric_core import (
    TOLERANCE,
    FiniteMetricSpace,
    SubsetRef,
    diameter,
    directed_hausdorff,
    validate_metric,
)

logger = logging.getLogger(__name__)

DEFAULT_SLACK = 1e-6
DEFAULT_BUDGET = 200_000

# Enumerating all correspondences is only feasible up to this many pairs.
MAX_BRUTE_FORCE_PAIRS = 16

# Rows of the cross block computed per chunk while gluing.
_GLUE_CHUNK = 64

# Pair tables above this size keep the first optimum as the witness.
_WITNESS_PAIR_LIMIT = 1024


@dataclasses.dataclass(frozen=True, eq=False)
class Correspondence:
    """
    A relation between two spaces whose projections are both surjective.

    Pairs are stored sorted and without repeats.

    Raises:
        DomainError: If the relation is empty, indexes a missing point or
            misses a point of either side.
    """

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted({(int(x), int(y)) for x, y in self.pairs}))
        if not pairs:
            raise DomainError("A correspondence needs at least one pair")
        xs = {x for x, _ in pairs}
        ys = {y for _, y in pairs}
        if min(xs) < 0 or max(xs) >= self.left.size or min(ys) < 0 or max(ys) >= self.right.size:
            raise DomainError("Correspondence pair out of range")
        if len(xs) != self.left.size:
            raise DomainError(f"Left projection misses {self.left.size - len(xs)} point(s)")
        if len(ys) != self.right.size:
            raise DomainError(f"Right projection misses {self.right.size - len(ys)} point(s)")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def identity(cls, space: FiniteMetricSpace, other: Optional[FiniteMetricSpace] = None) -> "Correspondence":
        other = space if other is None else other
        if other.size != space.size:
            raise DomainError("Identity correspondence needs spaces of equal size")
        return cls(space, other, tuple((i, i) for i in range(space.size)))

    @classmethod
    def full(cls, left: FiniteMetricSpace, right: FiniteMetricSpace) -> "Correspondence":
        return cls(left, right, tuple((x, y) for x in range(left.size) for y in range(right.size)))

    def transpose(self) -> "Correspondence":
        return Correspondence(self.right, self.left, tuple((y, x) for x, y in self.pairs))

    def rebind(self, left: FiniteMetricSpace, right: FiniteMetricSpace) -> "Correspondence":
        """Same pairs over other spaces of the same sizes."""
        return Correspondence(left, right, self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.asarray(self.pairs, dtype=int)
        return pairs[:, 0], pairs[:, 1]


@dataclasses.dataclass(frozen=True)
class GhBounds:
    lower: float
    upper: float
    witness: Optional[Correspondence] = None
    exhausted: bool = False
    nodes: int = 0

    @property
    def tight(self) -> bool:
        return not self.exhausted


@dataclasses.dataclass(frozen=True)
class LowerBoundTerms:
    """Both certified lower bounds for the GH distance, already halved."""

    diameter: float
    distribution: float

    @property
    def best(self) -> float:
        return max(self.diameter, self.distribution)


@dataclasses.dataclass(frozen=True, eq=False)
class GluedSpace:
    """
    Disjoint union of two spaces joined by bridges of a fixed length.

    Cross distances are ``min over (x', y') in links of d(x, x') + link_length + d(y', y)``.
    For :func:`glue` the links are the pairs of a correspondence and
    ``link_length = dis(R) / 2 + slack``; for :func:`star4_embedding` they tie
    quarter arcs of the circle to spoke tips.
    """

    parts: tuple[FiniteMetricSpace, FiniteMetricSpace]
    links: tuple[tuple[int, int], ...]
    link_length: float
    as_metric: FiniteMetricSpace
    bridge: Optional[Correspondence] = None
    slack: float = 0.0

    def offset(self, part: int) -> int:
        return 0 if part == 0 else self.parts[0].size

    def index(self, part: int, point: int) -> int:
        return self.offset(part) + point

    def part_subset(self, part: int) -> SubsetRef:
        start = self.offset(part)
        return SubsetRef(self.as_metric, tuple(range(start, start + self.parts[part].size)))

    @property
    def cross(self) -> np.ndarray:
        """Distances from every point of part 0 to every point of part 1."""
        n = self.parts[0].size
        return self.as_metric.dist[:n, n:]


@dataclasses.dataclass(frozen=True)
class HausdorffConditions:
    """One-sided suprema between the two parts of a glued space."""

    left_to_right: float
    right_to_left: float
    radius: float

    @property
    def left_ok(self) -> bool:
        return self.left_to_right <= self.radius + TOLERANCE

    @property
    def right_ok(self) -> bool:
        return self.right_to_left <= self.radius + TOLERANCE

    @property
    def hausdorff(self) -> float:
        return max(self.left_to_right, self.right_to_left)


def distortion(correspondence: Correspondence) -> float:
    """sup over related pairs (x, y), (x', y') of |d(x, x') - d(y, y')|."""
    xs, ys = correspondence.arrays
    left = correspondence.left.dist[np.ix_(xs, xs)]
    right = correspondence.right.dist[np.ix_(ys, ys)]
    return float(np.abs(left - right).max())


def _sorted_rows(space: FiniteMetricSpace) -> np.ndarray:
    return np.sort(space.dist, axis=1)


def _row_hausdorff(rows_x: np.ndarray, rows_y: np.ndarray) -> np.ndarray:
    """Hausdorff distance between every row of ``rows_x`` and every row of ``rows_y``."""
    result = np.empty((rows_x.shape[0], rows_y.shape[0]))
    for i, row in enumerate(rows_x):
        gaps = np.abs(row[None, :, None] - rows_y[:, None, :])
        result[i] = np.maximum(gaps.min(axis=2).max(axis=1), gaps.min(axis=1).max(axis=1))
    return result


def gh_lower_bound_terms(x: FiniteMetricSpace, y: FiniteMetricSpace) -> LowerBoundTerms:
    """
    Diameter bound and distance-distribution bound.

    For every correspondence R and (x, y) in R, the sets of distances from x and
    from y are within dis(R) in Hausdorff distance, so the largest
    row-to-nearest-row distance never exceeds dis(R). Every term is an actual
    entry ``|d_X - d_Y|``, so the bounds are exact in floating point.
    """
    diam_term = abs(diameter(x) - diameter(y))
    rows = _row_hausdorff(_sorted_rows(x), _sorted_rows(y))
    spread = max(float(rows.min(axis=1).max()), float(rows.min(axis=0).max()))
    return LowerBoundTerms(diameter=diam_term / 2, distribution=spread / 2)


def gh_lower_bounds(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    return gh_lower_bound_terms(x, y).best


class _MapSearch:
    """Depth-first search over pairs of maps f: X -> Y, g: Y -> X."""

    def __init__(self, x: FiniteMetricSpace, y: FiniteMetricSpace, floor: float, budget: int) -> None:
        self.dx = x.dist
        self.dy = y.dist
        self.m = x.size
        self.k = y.size
        self.floor = floor
        self.budget = budget
        self.nodes = 0
        self.exhausted = False
        self.best = float(max(diameter(x), diameter(y)))
        self.best_pairs: list[tuple[int, int]] = [(a, b) for a in range(self.m) for b in range(self.k)]

    def _increments(self, xs: list[int], ys: list[int], depth: int) -> np.ndarray:
        """Distortion added by each candidate partner of the point placed at ``depth``."""
        if depth < self.m:
            if not xs:
                return np.zeros(self.k)
            return np.abs(self.dx[depth, xs][None, :] - self.dy[:, ys]).max(axis=1)
        if not xs:  # pragma: no cover - the f phase always places points first
            return np.zeros(self.m)
        return np.abs(self.dx[:, xs] - self.dy[depth - self.m, ys][None, :]).max(axis=1)

    def run(self) -> None:
        self._visit(0, [], [], 0.0)

    def _visit(self, depth: int, xs: list[int], ys: list[int], running: float) -> bool:
        """Returns True when the search must stop."""
        if self.best <= self.floor:
            return True
        if depth == self.m + self.k:
            self.best = running
            self.best_pairs = sorted(set(zip(xs, ys)))
            logger.debug("exact_gh: improved distortion to %.6g after %d nodes", running, self.nodes)
            return self.best <= self.floor
        levels = np.maximum(self._increments(xs, ys, depth), running)
        for candidate, level in enumerate(levels.tolist()):
            self.nodes += 1
            if self.nodes > self.budget:
                self.exhausted = True
                return True
            if level >= self.best:
                continue
            if depth < self.m:
                xs.append(depth)
                ys.append(candidate)
            else:
                xs.append(candidate)
                ys.append(depth - self.m)
            stop = self._visit(depth + 1, xs, ys, level)
            xs.pop()
            ys.pop()
            if stop:
                return True
        return False


class _WitnessSearch:
    """
    Lexicographically smallest correspondence with distortion at most ``level``.

    Pairs are scanned in ``(x, y)`` order and kept whenever the chosen set can
    still be completed to a correspondence using larger pairs only.
    """

    def __init__(self, x: FiniteMetricSpace, y: FiniteMetricSpace, level: float, budget: int) -> None:
        self.m = x.size
        self.k = y.size
        size = self.m * self.k
        gaps = np.abs(x.dist[:, None, :, None] - y.dist[None, :, None, :]).reshape(size, size)
        self.compatible = gaps <= level
        self.owner_x = np.arange(size) // self.k
        self.owner_y = np.arange(size) % self.k
        self.budget = budget
        self.nodes = 0
        self.exhausted = False

    def _completes(self, allowed: np.ndarray, covered_x: np.ndarray, covered_y: np.ndarray) -> bool:
        missing_x = np.flatnonzero(~covered_x)
        if missing_x.size:
            options = allowed & (self.owner_x == missing_x[0])
        else:
            missing_y = np.flatnonzero(~covered_y)
            if not missing_y.size:
                return True
            options = allowed & (self.owner_y == missing_y[0])
        for q in np.flatnonzero(options).tolist():
            self.nodes += 1
            if self.nodes > self.budget:
                self.exhausted = True
                return False
            next_x = covered_x.copy()
            next_y = covered_y.copy()
            next_x[self.owner_x[q]] = True
            next_y[self.owner_y[q]] = True
            if self._completes(allowed & self.compatible[q], next_x, next_y):
                return True
            if self.exhausted:
                return False
        return False

    def run(self) -> Optional[list[tuple[int, int]]]:
        """The witness pairs, or None when the node budget runs out."""
        size = self.m * self.k
        covered_x = np.zeros(self.m, dtype=bool)
        covered_y = np.zeros(self.k, dtype=bool)
        allowed = np.ones(size, dtype=bool)
        chosen: list[int] = []
        for p in range(size):
            if covered_x.all() and covered_y.all():
                break
            if not allowed[p]:
                continue
            trial = allowed & self.compatible[p]
            trial[: p + 1] = False
            next_x = covered_x.copy()
            next_y = covered_y.copy()
            next_x[self.owner_x[p]] = True
            next_y[self.owner_y[p]] = True
            if self._completes(trial, next_x, next_y):
                chosen.append(p)
                allowed, covered_x, covered_y = trial, next_x, next_y
            elif self.exhausted:
                return None
        if not (covered_x.all() and covered_y.all()):  # pragma: no cover - the optimum is feasible
            return None
        return [(p // self.k, p % self.k) for p in chosen]


def exact_gh(
    x: FiniteMetricSpace, y: FiniteMetricSpace, budget: int = DEFAULT_BUDGET
) -> GhBounds:
    """
    GH distance of two small spaces by branch and bound.

    Every correspondence contains the union of the graphs of some f: X -> Y and
    g: Y -> X, and such a union is itself a correspondence, so the minimum over
    map pairs is the minimum over all correspondences. The search starts from
    the full product (distortion ``max(diam X, diam Y)``) and stops early when
    it meets the certified lower bound. Among optimal correspondences the
    witness is the one whose sorted pair list is lexicographically smallest,
    unless the pair table is too large or the budget runs out first, in which
    case it is the first optimum met by the search.

    Args:
        budget: Maximum number of search nodes. When exceeded the result keeps
            the best correspondence found and ``exhausted`` is set.

    Returns:
        GhBounds: ``lower == upper`` unless the budget ran out.
    """
    if x.size == 0 or y.size == 0:  # pragma: no cover - spaces are never empty
        raise DomainError("exact_gh needs nonempty spaces")
    terms = gh_lower_bound_terms(x, y)
    floor = 2 * terms.best
    search = _MapSearch(x, y, floor, budget)
    search.run()
    pairs = search.best_pairs
    if not search.exhausted and x.size * y.size <= _WITNESS_PAIR_LIMIT:
        smallest = _WitnessSearch(x, y, search.best, budget - search.nodes).run()
        if smallest is not None:
            pairs = smallest
    witness = Correspondence(x, y, tuple(pairs))
    upper = search.best / 2
    lower = terms.best if search.exhausted else upper
    logger.info(
        "exact_gh on %dx%d: upper=%.6g lower=%.6g nodes=%d%s",
        x.size,
        y.size,
        upper,
        lower,
        search.nodes,
        " (budget exhausted)" if search.exhausted else "",
    )
    return GhBounds(lower=min(lower, upper), upper=upper, witness=witness, exhausted=search.exhausted, nodes=search.nodes)


def brute_force_gh(x: FiniteMetricSpace, y: FiniteMetricSpace) -> GhBounds:
    """
    GH distance by enumerating every subset of X x Y.

    Raises:
        DomainError: If ``|X| * |Y|`` exceeds the enumeration limit.
    """
    pairs = [(a, b) for a in range(x.size) for b in range(y.size)]
    count = len(pairs)
    if count > MAX_BRUTE_FORCE_PAIRS:
        raise DomainError(
            f"brute_force_gh enumerates at most {MAX_BRUTE_FORCE_PAIRS} pairs, got {count}"
        )
    xs = np.array([a for a, _ in pairs])
    ys = np.array([b for _, b in pairs])
    gaps = np.abs(x.dist[np.ix_(xs, xs)] - y.dist[np.ix_(ys, ys)])

    masks = ((np.arange(1, 2**count)[:, None] >> np.arange(count)[None, :]) & 1).astype(bool)
    covers_x = np.stack([masks[:, xs == a].any(axis=1) for a in range(x.size)], axis=1).all(axis=1)
    covers_y = np.stack([masks[:, ys == b].any(axis=1) for b in range(y.size)], axis=1).all(axis=1)
    masks = masks[covers_x & covers_y]

    worst = np.zeros(masks.shape[0])
    for p in range(count):
        contribution = np.where(masks, gaps[p][None, :], 0.0).max(axis=1)
        worst = np.maximum(worst, np.where(masks[:, p], contribution, 0.0))
    best = int(np.argmin(worst))
    witness = Correspondence(x, y, tuple(pairs[p] for p in np.flatnonzero(masks[best])))
    value = float(worst[best]) / 2
    return GhBounds(lower=value, upper=value, witness=witness, nodes=int(masks.shape[0]))


def _bridge_metric(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    links: Sequence[tuple[int, int]],
    link_length: float,
) -> np.ndarray:
    starts = np.array([a for a, _ in links])
    ends = np.array([b for _, b in links])
    to_link = x.dist[:, starts]
    from_link = y.dist[ends, :]
    cross = np.empty((x.size, y.size))
    for lo in range(0, x.size, _GLUE_CHUNK):
        block = to_link[lo : lo + _GLUE_CHUNK]
        cross[lo : lo + _GLUE_CHUNK] = (block[:, :, None] + from_link[None, :, :]).min(axis=1)
    cross += link_length
    return np.block([[x.dist, cross], [cross.T, y.dist]])


def _assemble(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    links: Sequence[tuple[int, int]],
    link_length: float,
    bridge: Optional[Correspondence],
    slack: float,
) -> GluedSpace:
    matrix = _bridge_metric(x, y, links, link_length)
    labels = tuple(f"L:{label}" for label in x.labels) + tuple(f"R:{label}" for label in y.labels)
    metric = FiniteMetricSpace(labels, matrix)
    report = validate_metric(metric)
    if not report.ok:
        raise ConstructionError(f"Glued matrix is not a metric: {report.summary()}")
    return GluedSpace((x, y), tuple(links), link_length, metric, bridge, slack)


def glue(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    correspondence: Correspondence,
    eta: float = DEFAULT_SLACK,
) -> GluedSpace:
    """
    Realize a correspondence as a metric on the disjoint union of X and Y.

    Both parts keep their metrics exactly and are within ``dis(R) / 2 + eta``
    of each other in Hausdorff distance.

    Raises:
        DomainError: If ``eta`` is not positive or R relates other spaces.
        ConstructionError: If the result fails validation.
    """
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    if correspondence.left is not x or correspondence.right is not y:
        raise DomainError("The correspondence must relate the two glued spaces")
    radius = distortion(correspondence) / 2
    glued = _assemble(x, y, correspondence.pairs, radius + eta, correspondence, eta)
    logger.info("Glued %d + %d points with bridge %.6g", x.size, y.size, radius + eta)
    return glued


def hausdorff_conditions(glued: GluedSpace, radius: float) -> HausdorffConditions:
    left = glued.part_subset(0)
    right = glued.part_subset(1)
    return HausdorffConditions(
        left_to_right=directed_hausdorff(left, right),
        right_to_left=directed_hausdorff(right, left),
        radius=radius,
    )


def max_product(x: FiniteMetricSpace, z: FiniteMetricSpace) -> FiniteMetricSpace:
    """X x Z with ``max(d_X, d_Z)``; point ``(i, k)`` has index ``i * |Z| + k``."""
    dist = np.maximum(
        x.dist[:, None, :, None], z.dist[None, :, None, :]
    ).reshape(x.size * z.size, x.size * z.size)
    labels = tuple(f"({a},{b})" for a in x.labels for b in z.labels)
    return FiniteMetricSpace(labels, dist)


def lift_correspondence(correspondence: Correspondence, z: FiniteMetricSpace) -> Correspondence:
    """
    Extend R between X and Y to ``{((x, z), y) : (x, y) in R}`` on ``max_product(X, Z)``.

    Raises:
        PreconditionError: If ``diam(Z) > dis(R)``.
    """
    current = distortion(correspondence)
    if diameter(z) > current + TOLERANCE:
        raise PreconditionError(
            f"diam(Z) = {diameter(z):.6g} exceeds dis(R) = {current:.6g}"
        )
    product = max_product(correspondence.left, z)
    width = z.size
    pairs = tuple((x * width + k, y) for x, y in correspondence.pairs for k in range(width))
    return Correspondence(product, correspondence.right, pairs)


def quarter_arcs(n: int) -> list[list[int]]:
    """Closed quarter arcs of ``circle_space(n)``; adjacent arcs share endpoints."""
    quarter = n // 4
    return [[(i * quarter + j) % n for j in range(quarter + 1)] for i in range(4)]


def star4_embedding(n: int, eps: float = QUARTER / 4) -> GluedSpace:
    """
    The circle and the four-spoke star in one metric space.

    Each closed quarter arc of the circle is linked to one spoke tip at
    distance pi/4, so every circle point is within pi/4 of the star while the
    center stays pi/2 away from the circle.

    Raises:
        DomainError: If ``n`` is not a multiple of 4.
        ConstructionError: If the assembled matrix is not a metric.
    """
    if n < 4 or n % 4:
        raise DomainError(f"star4_embedding needs n divisible by 4, got {n}")
    circle = circle_space(n)
    star = sample_graph(build_star4(), eps)
    tips = [star.index_of(star.graph.vertex_point(v)) for v in range(1, 5)]
    links = [(z, tips[i]) for i, arc in enumerate(quarter_arcs(n)) for z in arc]
    glued = _assemble(circle, star.as_metric, links, QUARTER, None, 0.0)
    logger.info("Star embedding with %d circle and %d star points", n, star.as_metric.size)
    return glued

