"""
Explicit correspondences between the circle and trees.

The map Phi wraps the circle of length 2 pi around the tripod E: each of the
eight quarter arcs goes isometrically onto an edge of E, so Phi is
1-Lipschitz except for one jump of pi/2 at angle 0. The order in which the
edges are walked is found by :func:`find_phi_walk`, which searches all
eight-step walks and keeps the first one whose graph has distortion pi/2.
"""

import dataclasses
import functools
import logging
import math
from typing import Iterator

import numpy as np

from .errors import ConstructionError, DomainError
from .gh_solver import Correspondence, distortion
from .graph_spaces import (
    E_VERTICES,
    QUARTER,
    GeodesicTable,
    MetricGraph,
    PointOnGraph,
    build_E,
    build_E_prime,
    circle_space,
    graph_metric,
)
from .metric_core import TOLERANCE, FiniteMetricSpace, scaled_space

logger = logging.getLogger(__name__)

WALK_STEPS = 8
HALF_PI = math.pi / 2

# Circle samples used to certify a candidate walk (spacing pi/256).
_SEARCH_SAMPLES = 512


Step = tuple[int, int]


@dataclasses.dataclass(frozen=True, eq=False)
class EdgeWalk:
    """
    Eight edge traversals of a graph whose edges all have length pi/4.

    Step ``(edge, +1)`` runs from the edge's ``u`` to its ``v``; ``-1`` runs back.
    The walk is continuous, covers every edge, and ends at distance pi/2 from
    where it starts; the gap is the jump of Phi at angle ``jump``.
    """

    graph: MetricGraph
    steps: tuple[Step, ...]
    jump: float = 0.0

    def __post_init__(self) -> None:
        if len(self.steps) != WALK_STEPS:
            raise DomainError(f"A walk has {WALK_STEPS} steps, got {len(self.steps)}")
        for edge, orientation in self.steps:
            if not 0 <= edge < len(self.graph.edges) or orientation not in (-1, 1):
                raise DomainError(f"Invalid step {(edge, orientation)}")
        for (a, b), (c, _) in zip(self._ends(), self._ends()[1:]):
            if b != c:
                raise DomainError("Consecutive steps must share a vertex")
        if {edge for edge, _ in self.steps} != set(range(len(self.graph.edges))):
            raise DomainError("The walk must traverse every edge")
        gap = self.graph.vertex_distances[self.vertices[-1], self.vertices[0]]
        if abs(gap - HALF_PI) > TOLERANCE:
            raise DomainError(f"The walk must end pi/2 from its start, got {gap:.6g}")

    def _ends(self) -> list[tuple[int, int]]:
        return [_step_ends(self.graph, step) for step in self.steps]

    @property
    def vertices(self) -> tuple[int, ...]:
        """The nine vertices visited, start and end included."""
        ends = self._ends()
        return (ends[0][0],) + tuple(b for _, b in ends)

    @property
    def basepoint_image(self) -> PointOnGraph:
        return self.graph.vertex_point(self.vertices[0])

    @property
    def end_image(self) -> PointOnGraph:
        return self.graph.vertex_point(self.vertices[-1])

    def antipodal_gaps(self) -> list[float]:
        """Distances between vertices visited half a turn apart."""
        table = self.graph.vertex_distances
        v = self.vertices
        return [float(table[v[k], v[k + 4]]) for k in range(5)]

    def describe(self) -> str:
        names = self.graph.vertices
        return " -> ".join(names[v] for v in self.vertices)


def _step_ends(graph: MetricGraph, step: Step) -> tuple[int, int]:
    edge = graph.edges[step[0]]
    return (edge.u, edge.v) if step[1] == 1 else (edge.v, edge.u)


@dataclasses.dataclass(frozen=True, eq=False)
class PhiMap:
    """Arc-length evaluation of an :class:`EdgeWalk` on the circle ``[0, 2 pi)``."""

    walk: EdgeWalk

    @property
    def graph(self) -> MetricGraph:
        return self.walk.graph

    def _locate(self, k: int, along: float) -> PointOnGraph:
        edge, orientation = self.walk.steps[k]
        length = self.graph.edges[edge].length
        return self.graph.point(edge, along if orientation == 1 else length - along)

    def __call__(self, theta: float) -> PointOnGraph:
        theta = math.fmod(theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        k = min(int(theta // QUARTER), WALK_STEPS - 1)
        along = min(max(theta - k * QUARTER, 0.0), self.graph.edges[self.walk.steps[k][0]].length)
        return self._locate(k, along)

    def sample(self, j: int, n: int) -> PointOnGraph:
        """Image of the angle ``2 pi j / n``; equal images give equal points."""
        per_step = n // WALK_STEPS
        k, r = divmod(j % n, per_step)
        edge, orientation = self.walk.steps[k]
        length = self.graph.edges[edge].length
        q = r if orientation == 1 else per_step - r
        return self.graph.point(edge, length * q / per_step)

    def images(self, n: int) -> list[PointOnGraph]:
        _check_samples(n)
        return [self.sample(j, n) for j in range(n)]

    def antipodal_defect(self, n: int) -> float:
        """max over samples of |d(Phi(x), Phi(-x)) - pi/2|."""
        images = self.images(n)
        table = graph_metric(self.graph, list(dict.fromkeys(images)))
        index = [table.index_of(p) for p in images]
        half = n // 2
        gaps = [table.as_metric.dist[index[j], index[(j + half) % n]] for j in range(n)]
        return float(np.abs(np.asarray(gaps) - HALF_PI).max())


@dataclasses.dataclass(frozen=True, eq=False)
class PhiSampling:
    """Phi on ``n`` circle samples: the sample spaces and the graph relation."""

    n: int
    circle: FiniteMetricSpace
    images: GeodesicTable
    sample_images: tuple[int, ...]
    correspondence: Correspondence


def _check_samples(n: int) -> None:
    if n < WALK_STEPS or n % WALK_STEPS:
        raise DomainError(f"The number of circle samples must be a positive multiple of 8, got {n}")


def _sampling(phi: PhiMap, n: int) -> PhiSampling:
    _check_samples(n)
    graph = phi.graph
    images = phi.images(n)
    points = list(dict.fromkeys(images))
    hit = set(points)
    missing = [graph.vertex_point(v) for v in range(len(graph.vertices))]
    missing = [p for p in missing if p not in hit]
    table = graph_metric(graph, points + missing)
    sample_images = tuple(table.index_of(p) for p in images)
    pairs = list(enumerate(sample_images))
    for vertex in missing:
        nearest = min(range(n), key=lambda j: (graph.distance(vertex, images[j]), j))
        pairs.append((nearest, table.index_of(vertex)))
    correspondence = Correspondence(circle_space(n), table.as_metric, tuple(pairs))
    return PhiSampling(n, correspondence.left, table, sample_images, correspondence)


def _walks(graph: MetricGraph) -> Iterator[EdgeWalk]:
    """Candidate walks in lexicographic order of their steps."""
    table = graph.vertex_distances
    moves = sorted((edge, orientation) for edge in range(len(graph.edges)) for orientation in (-1, 1))

    def extend(steps: list[Step], visited: list[int]) -> Iterator[EdgeWalk]:
        if len(steps) == WALK_STEPS:
            used = {edge for edge, _ in steps}
            if len(used) == len(graph.edges) and abs(table[visited[-1], visited[0]] - HALF_PI) <= TOLERANCE:
                yield EdgeWalk(graph, tuple(steps))
            return
        for move in moves:
            start, end = _step_ends(graph, move)
            if steps and start != visited[-1]:
                continue
            position = len(visited) if steps else 1
            base = visited if steps else [start]
            # Vertices half a turn apart must stay at least pi/2 apart.
            if position >= 4 and table[end, base[position - 4]] < HALF_PI - TOLERANCE:
                continue
            yield from extend(steps + [move], base + [end])

    yield from extend([], [])


def search_phi_walk(graph: MetricGraph) -> EdgeWalk:
    """
    First walk on ``graph`` whose sampled graph has distortion at most pi/2.

    Raises:
        ConstructionError: If no walk qualifies.
    """
    tried = 0
    for walk in _walks(graph):
        tried += 1
        sampled = distortion(_sampling(PhiMap(walk), _SEARCH_SAMPLES).correspondence)
        logger.debug("Walk %s has sampled distortion %.6g", walk.describe(), sampled)
        if sampled <= HALF_PI + TOLERANCE:
            logger.info("Found walk %s after %d candidate(s)", walk.describe(), tried)
            return walk
    raise ConstructionError(f"No eight-step walk with distortion pi/2 among {tried} candidate(s)")


@functools.lru_cache(maxsize=1)
def find_phi_walk() -> EdgeWalk:
    """The canonical walk on the tripod E (computed once)."""
    return search_phi_walk(build_E())


def canonical_phi() -> PhiMap:
    return PhiMap(find_phi_walk())


def phi(theta: float) -> PointOnGraph:
    """Image of the angle ``theta`` (taken modulo 2 pi) on E."""
    return canonical_phi()(theta)


@functools.lru_cache(maxsize=8)
def phi_samples(n: int) -> PhiSampling:
    """
    Phi on ``n`` equally spaced angles.

    The right side holds the distinct images plus any vertex of E that no
    sample hits, each such vertex related to the sample with the nearest image.
    """
    sampling = _sampling(canonical_phi(), n)
    logger.info(
        "Sampled Phi at n=%d: %d image points, %d pairs",
        n,
        sampling.images.as_metric.size,
        len(sampling.correspondence),
    )
    return sampling


def phi_graph(n: int) -> Correspondence:
    return phi_samples(n).correspondence


def e_prime_correspondence(n: int) -> Correspondence:
    """
    Phi on E' together with the lengthened branch, all related to the angle pi.

    E' extends the branch of E by a second pi/4 edge; its points are sampled at
    the circle spacing and paired with the sample at pi, whose image is the
    branch tip of E.

    Raises:
        ConstructionError: If Phi(pi) is not the branch tip.
    """
    _check_samples(n)
    graph = build_E_prime()
    # E is E' minus its last edge, so points of E keep their coordinates.
    images = [graph.point(p.edge, p.offset) for p in canonical_phi().images(n)]
    tip = graph.vertex_point(E_VERTICES.index("x1"))
    half = n // 2
    if images[half] != tip:
        raise ConstructionError("Phi(pi) must be the branch tip")
    per_step = n // WALK_STEPS
    extension_edge = len(graph.edges) - 1
    length = graph.edges[extension_edge].length
    extension = [graph.point(extension_edge, length * q / per_step) for q in range(1, per_step + 1)]
    points = list(dict.fromkeys(images + extension))
    table = graph_metric(graph, points)
    pairs = [(j, table.index_of(p)) for j, p in enumerate(images)]
    pairs += [(half, table.index_of(p)) for p in extension]
    return Correspondence(circle_space(n), table.as_metric, tuple(pairs))


def half_circle_correspondence(n: int) -> Correspondence:
    """Identity from the circle to the circle with halved distances (distortion pi/2)."""
    circle = circle_space(n)
    return Correspondence.identity(circle, scaled_space(circle, 0.5))


def chordal_bound(d: float) -> float:
    """D + sqrt(2 - 2 sqrt(1 - D^2)) for D in [0, 1]."""
    if not 0 <= d <= 1:
        raise DomainError(f"chordal_bound is defined on [0, 1], got {d}")
    return d + math.sqrt(2 - 2 * math.sqrt(1 - d * d))


def chordal_bound_root(tol: float = 1e-12, lo: float = 0.0, hi: float = 1.0) -> float:
    """Root of ``chordal_bound(D) = 1`` on (0, 1) by bisection."""
    if not chordal_bound(lo) < 1 < chordal_bound(hi):
        raise DomainError(f"[{lo}, {hi}] does not bracket the root")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if chordal_bound(mid) < 1:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2

