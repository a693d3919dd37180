"""
Loops on metric graphs and their homotopy classes.

The fundamental group of a connected graph is free on the edges outside a
spanning tree. A loop is classified by the signed sequence of midpoints of
those edges that it crosses, reduced in the free group. :func:`transfer_loop`
moves a loop from one part of a glued space to the other while keeping every
point within twice the Hausdorff bound of its partner.
"""

import dataclasses
import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import AmbiguityError, ConstructionError, DomainError
from .gh_solver import GluedSpace
from .graph_spaces import GeodesicTable, MetricGraph, PointOnGraph, sample_graph
from .metric_core import TOLERANCE, hausdorff_distance
from .parallel import seeded_map

logger = logging.getLogger(__name__)

# Largest number of subdivision nodes tried when transferring a loop.
MAX_SUBDIVISION = 2**16

Letter = tuple[int, int]


@dataclasses.dataclass(frozen=True)
class FreeWord:
    """A reduced word of ``(generator, +1 | -1)`` letters."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def reduce(cls, letters: Iterable[Letter]) -> "FreeWord":
        stack: list[Letter] = []
        for generator, sign in letters:
            if stack and stack[-1] == (generator, -sign):
                stack.pop()
            else:
                stack.append((generator, sign))
        return cls(tuple(stack))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord.reduce(self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -s) for g, s in reversed(self.letters)))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"g{g}" if s == 1 else f"g{g}^-1" for g, s in self.letters)


@dataclasses.dataclass(frozen=True, eq=False)
class LoopPath:
    """
    A closed sequence of graph points joined by shortest paths.

    Raises:
        DomainError: If the loop is empty, not closed, or a gap exceeds
            ``step_bound``.
    """

    graph: MetricGraph
    samples: tuple[PointOnGraph, ...]
    step_bound: float

    def __post_init__(self) -> None:
        samples = tuple(self.graph.point(p.edge, p.offset) for p in self.samples)
        if not samples:
            raise DomainError("A loop needs at least one sample")
        if len(samples) > 1 and samples[0] != samples[-1]:
            raise DomainError("A loop must end at its first sample")
        worst = max(self.gaps(samples), default=0.0)
        if worst > self.step_bound + TOLERANCE:
            raise DomainError(f"Loop gap {worst:.6g} exceeds the step bound {self.step_bound:.6g}")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def closed(cls, graph: MetricGraph, points: Sequence[PointOnGraph], step_bound: Optional[float] = None) -> "LoopPath":
        """Close ``points`` by repeating the first one; infer the step bound when omitted."""
        points = list(points)
        if points and points[-1] != points[0]:
            points.append(points[0])
        if step_bound is None:
            step_bound = max(cls._gaps_of(graph, points), default=0.0)
        return cls(graph, tuple(points), step_bound)

    @staticmethod
    def _gaps_of(graph: MetricGraph, samples: Sequence[PointOnGraph]) -> list[float]:
        return [graph.distance(p, q) for p, q in zip(samples, samples[1:])]

    def gaps(self, samples: Optional[Sequence[PointOnGraph]] = None) -> list[float]:
        return self._gaps_of(self.graph, self.samples if samples is None else samples)

    @property
    def basepoint(self) -> PointOnGraph:
        return self.samples[0]

    def refined(self, factor: int) -> "LoopPath":
        """Insert ``factor - 1`` evenly spaced points on every gap."""
        points = [self.samples[0]]
        for p, q in zip(self.samples, self.samples[1:]):
            path = self.graph.geodesic(p, q)
            if not path.pieces:
                points.extend([q] * factor)
                continue
            for k in range(1, factor + 1):
                points.append(self.graph.point_along(path, path.length * k / factor))
        return LoopPath(self.graph, tuple(points), self.step_bound / factor)


@dataclasses.dataclass(frozen=True)
class TransferCertificate:
    alpha: LoopPath
    beta: LoopPath
    bound: float
    sup_gap: float
    subdivision: int
    delta: float

    @property
    def holds(self) -> bool:
        return self.sup_gap < 2 * self.bound


@dataclasses.dataclass(frozen=True)
class ContractibilityReport:
    trials: int
    accepted: int
    contractible: int
    girth: float

    @property
    def fraction(self) -> float:
        return self.contractible / self.accepted if self.accepted else 1.0


def loop_class(graph: MetricGraph, loop: LoopPath) -> FreeWord:
    """
    Homotopy class of a loop as a reduced word in the non-tree edges.

    Raises:
        DomainError: If the graph is disconnected.
        AmbiguityError: If a gap is at least half the shortest cycle.
    """
    graph.require_connected()
    if loop.graph is not graph:
        raise DomainError("The loop lives on another graph")
    girth = graph.girth
    generators = set(graph.generators)
    letters: list[Letter] = []
    for p, q in zip(loop.samples, loop.samples[1:]):
        path = graph.geodesic(p, q)
        if path.length >= girth / 2 - TOLERANCE:
            raise AmbiguityError(
                f"Gap {path.length:.6g} is too long for a graph with shortest cycle {girth:.6g}"
            )
        for piece in path.pieces:
            if piece.edge not in generators:
                continue
            middle = graph.edges[piece.edge].length / 2
            crossing = int(piece.end >= middle) - int(piece.start >= middle)
            if crossing:
                letters.append((piece.edge, crossing))
    return FreeWord.reduce(letters)


def winding_number(loop: LoopPath, graph: Optional[MetricGraph] = None) -> int:
    """
    Signed number of turns of a loop on a cycle graph, by angle unwrapping.

    Raises:
        DomainError: If the graph is not a single cycle.
    """
    graph = graph or loop.graph
    n = len(graph.vertices)
    if len(graph.edges) != n or any(e.u != k or e.v != (k + 1) % n for k, e in enumerate(graph.edges)):
        raise DomainError("winding_number needs a circle graph")
    starts = np.concatenate([[0.0], np.cumsum([e.length for e in graph.edges])])
    circumference = float(starts[-1])
    angles = np.array([starts[p.edge] + p.offset for p in loop.samples])
    steps = np.diff(angles)
    steps = (steps + circumference / 2) % circumference - circumference / 2
    return int(round(steps.sum() / circumference))


def _segment_nodes(size: int, parts: int) -> list[int]:
    return sorted({(k * size) // parts for k in range(parts + 1)})


def transfer_loop(
    glued: GluedSpace,
    source: GeodesicTable,
    target: GeodesicTable,
    alpha: LoopPath,
    bound: float,
    from_part: int = 0,
) -> TransferCertificate:
    """
    Build a loop in the target part that stays within ``2 * bound`` of ``alpha``.

    ``alpha`` must consist of samples of ``source`` (the part ``from_part`` of
    ``glued``); the result consists of samples of ``target``. Nodes of alpha
    are chosen until each segment has diameter below
    ``delta = (bound - hausdorff) / 2``, each node is sent to its nearest
    target point, and consecutive images are joined by shortest paths.

    Raises:
        DomainError: If the parts are ``bound`` or more apart, or the tables do
            not match the glued parts.
        ConstructionError: If a step of the construction fails its bound.
    """
    to_part = 1 - from_part
    if source.as_metric is not glued.parts[from_part] or target.as_metric is not glued.parts[to_part]:
        raise DomainError("The sample tables must be the parts of the glued space")
    if alpha.graph is not source.graph:
        raise DomainError("The loop must live on the source graph")
    spread = hausdorff_distance(glued.part_subset(0), glued.part_subset(1))
    if spread >= bound:
        raise DomainError(f"Hausdorff distance {spread:.6g} is not below {bound:.6g}")
    delta = (bound - spread) / 2

    dist = glued.as_metric.dist
    own = [glued.index(from_part, source.index_of(p)) for p in alpha.samples]
    size = len(own) - 1

    parts = 1
    while True:
        nodes = _segment_nodes(size, parts) if size else [0]
        widths = [
            dist[np.ix_(own[a : b + 1], own[a : b + 1])].max() for a, b in zip(nodes, nodes[1:])
        ]
        if max(widths, default=0.0) < delta:
            break
        if parts >= size or parts >= MAX_SUBDIVISION:
            raise ConstructionError(
                f"Loop samples are too coarse: a gap of {max(widths):.6g} is not below {delta:.6g}"
            )
        parts *= 2

    offset = glued.offset(to_part)
    width = target.as_metric.size
    images: list[int] = []
    for node in nodes:
        row = dist[own[node], offset : offset + width]
        nearest = int(np.argmin(row))
        if row[nearest] >= bound - delta:
            raise ConstructionError(f"No target point within {bound - delta:.6g} of node {node}")
        images.append(nearest)

    graph = target.graph
    beta = [images[0]]
    sup_gap = float(dist[own[0], offset + images[0]])
    for n, (a, b) in enumerate(zip(nodes, nodes[1:])):
        start, end = target.points[images[n]], target.points[images[n + 1]]
        path = graph.geodesic(start, end)
        if path.length >= 2 * bound:
            raise ConstructionError(f"Joining path of length {path.length:.6g} is not below {2 * bound:.6g}")
        along = target.samples_along(path, start)
        if along[-1] != images[n + 1]:
            raise ConstructionError("The joining path does not end at the next image")
        block = dist[np.ix_(own[a : b + 1], [offset + i for i in along])]
        sup_gap = max(sup_gap, float(block.max()))
        beta.extend(along[1:])

    if sup_gap >= 2 * bound:
        raise ConstructionError(f"Transfer gap {sup_gap:.6g} is not below {2 * bound:.6g}")
    points = [target.points[i] for i in beta]
    step = max(LoopPath._gaps_of(graph, points), default=0.0)
    result = TransferCertificate(
        alpha=alpha,
        beta=LoopPath.closed(graph, points, step),
        bound=bound,
        sup_gap=sup_gap,
        subdivision=len(nodes) - 1,
        delta=delta,
    )
    logger.info(
        "Transferred a %d-sample loop through %d segments, sup gap %.6g < %.6g",
        len(alpha.samples),
        result.subdivision,
        sup_gap,
        2 * bound,
    )
    return result


def net_spacing(table: GeodesicTable) -> float:
    """Largest gap between consecutive samples along any edge."""
    widest = 0.0
    for index, edge in enumerate(table.graph.edges):
        offsets = [0.0] + [offset for offset, _ in table.by_edge.get(index, [])] + [edge.length]
        widest = max(widest, float(np.diff(offsets).max()))
    return widest


class NetWalker:
    """Random walks on the neighbour graph of a sample table."""

    def __init__(self, table: GeodesicTable, reach: Optional[float] = None) -> None:
        self.table = table
        dist = table.as_metric.dist
        if reach is None:
            reach = net_spacing(table)
        self.reach = reach
        adjacency = (dist <= reach + TOLERANCE) & ~np.eye(len(dist), dtype=bool)
        self.neighbours = [np.flatnonzero(row) for row in adjacency]
        self._weights = csr_matrix(np.where(adjacency, dist, 0.0))

    def _close(self, start: int, end: int) -> list[int]:
        _, pred = dijkstra(self._weights, directed=False, indices=end, return_predecessors=True)
        path = [start]
        while path[-1] != end:
            path.append(int(pred[path[-1]]))
        return path

    def walk(
        self, rng: np.random.Generator, steps: int, start: Optional[int] = None, persistence: float = 0.9
    ) -> list[int]:
        """A persistent random walk of ``steps`` moves closed by a shortest path."""
        current = int(rng.integers(len(self.neighbours))) if start is None else start
        visited = [current]
        previous = -1
        for _ in range(steps):
            options = self.neighbours[current]
            forward = options[options != previous]
            pool = forward if len(forward) and rng.random() < persistence else options
            previous, current = current, int(rng.choice(pool))
            visited.append(current)
        back = self._close(current, visited[0])
        return visited + back[1:]

    def loop(self, rng: np.random.Generator, steps: int, start: Optional[int] = None) -> LoopPath:
        indices = self.walk(rng, steps, start)
        points = [self.table.points[i] for i in indices]
        return LoopPath(self.table.graph, tuple(points), self.reach)

    def diameter(self, loop: LoopPath) -> float:
        index = [self.table.index_of(p) for p in loop.samples]
        return float(self.table.as_metric.dist[np.ix_(index, index)].max())


def small_loops_contractible(
    graph: MetricGraph, bound: float, trials: int, seed: int = 0, resolution: Optional[float] = None
) -> ContractibilityReport:
    """
    Sample random loops of diameter below ``bound`` and count the contractible ones.

    Loops are persistent random walks on an epsilon-net of ``graph`` closed by a
    shortest path; walks whose sampled diameter reaches ``bound`` are discarded.
    Trials run on the worker pool with one seeded stream each.
    """
    graph.require_connected()
    if not bound > 0:
        raise DomainError(f"The diameter bound must be positive, got {bound}")
    girth = graph.girth
    scale = min(bound, girth) if math.isfinite(girth) else bound
    eps = resolution or scale / 512
    table = sample_graph(graph, eps)
    walker = NetWalker(table)
    longest = max(4, int(4 * bound / walker.reach))

    def trial(rng: np.random.Generator) -> Optional[bool]:
        loop = walker.loop(rng, int(rng.integers(1, longest + 1)))
        if walker.diameter(loop) >= bound:
            return None
        return loop_class(graph, loop).is_identity

    outcomes = [o for o in seeded_map(trial, trials, seed) if o is not None]
    report = ContractibilityReport(
        trials=trials, accepted=len(outcomes), contractible=sum(outcomes), girth=girth
    )
    logger.info(
        "Sampled %d loops below diameter %.6g: %d kept, %d contractible",
        trials,
        bound,
        report.accepted,
        report.contractible,
    )
    return report
