"""
Metric graphs with their intrinsic geodesic metric.

A :class:`MetricGraph` is a finite set of vertices joined by edges of positive
length. Points of the graph are ``(edge, offset)`` pairs; vertex points are
canonicalized to the lowest-index incident edge so that equal points compare
equal. Geodesic distances between arbitrary points are assembled from the
vertex-to-vertex table computed by Dijkstra.
"""

import dataclasses
import functools
import logging
import math
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError
from .metric_core import FiniteMetricSpace

logger = logging.getLogger(__name__)

QUARTER = math.pi / 4

# Offsets closer than this to an endpoint collapse to the vertex.
_SNAP = 1e-12

E_VERTICES = ("x_minus", "s_minus", "x0", "s_plus", "x_plus", "x1")
BRANCH_EDGE = 4


@dataclasses.dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float


@dataclasses.dataclass(frozen=True, order=True)
class PointOnGraph:
    """A point at distance ``offset`` from ``edges[edge].u`` along ``edge``.

    Build points through :meth:`MetricGraph.point` so vertex points are canonical.
    """

    edge: int
    offset: float


@dataclasses.dataclass(frozen=True)
class Piece:
    """Traversal of one edge from ``start`` to ``end`` (offsets along the edge)."""

    edge: int
    start: float
    end: float

    @property
    def length(self) -> float:
        return abs(self.end - self.start)


@dataclasses.dataclass(frozen=True)
class Geodesic:
    length: float
    pieces: tuple[Piece, ...]


@dataclasses.dataclass(frozen=True, eq=False)
class MetricGraph:
    """
    Vertices and weighted edges. Parallel edges are allowed, self-loops are not.

    Example:
        graph = MetricGraph.from_names(["a", "b"], [("a", "b", 1.0)])
        graph.total_length  # 1.0
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise DomainError("A metric graph needs at least one vertex")
        n = len(self.vertices)
        for index, edge in enumerate(self.edges):
            if not (0 <= edge.u < n and 0 <= edge.v < n):
                raise DomainError(f"Edge {index} references a missing vertex")
            if edge.u == edge.v:
                raise DomainError(f"Edge {index} is a self-loop at {self.vertices[edge.u]!r}")
            if not edge.length > 0:
                raise DomainError(f"Edge {index} has nonpositive length {edge.length}")

    @classmethod
    def from_names(
        cls, vertices: Sequence[str], edges: Iterable[tuple[str, str, float]]
    ) -> "MetricGraph":
        index = {name: i for i, name in enumerate(vertices)}
        if len(index) != len(vertices):
            raise DomainError("Vertex names must be unique")
        try:
            built = tuple(Edge(index[u], index[v], float(length)) for u, v, length in edges)
        except KeyError as e:
            raise DomainError(f"Unknown vertex {e.args[0]!r}") from None
        return cls(tuple(vertices), built)

    @property
    def total_length(self) -> float:
        return float(math.fsum(edge.length for edge in self.edges))

    @functools.cached_property
    def nx_graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(len(self.vertices)))
        for index, edge in enumerate(self.edges):
            graph.add_edge(edge.u, edge.v, key=index, length=edge.length, index=index)
        return graph

    @property
    def is_connected(self) -> bool:
        return nx.is_connected(self.nx_graph)

    def require_connected(self) -> None:
        if not self.is_connected:
            raise DomainError("The metric graph is disconnected")

    @property
    def cycle_rank(self) -> int:
        """Number of independent cycles (rank of the fundamental group)."""
        return len(self.edges) - len(self.vertices) + nx.number_connected_components(self.nx_graph)

    @property
    def is_tree(self) -> bool:
        return self.is_connected and len(self.edges) == len(self.vertices) - 1

    @functools.cached_property
    def spanning_tree_edges(self) -> frozenset[int]:
        """Kruskal tree preferring low edge indices; deterministic."""
        self.require_connected()
        chosen = nx.minimum_spanning_edges(
            self.nx_graph, algorithm="kruskal", weight="index", keys=True, data=False
        )
        return frozenset(key for _, _, key in chosen)

    @property
    def generators(self) -> tuple[int, ...]:
        """Edges outside the spanning tree, one free generator each."""
        return tuple(i for i in range(len(self.edges)) if i not in self.spanning_tree_edges)

    @functools.cached_property
    def girth(self) -> float:
        """Length of the shortest cycle, ``inf`` for forests."""
        best = math.inf
        graph = self.nx_graph
        for index, edge in enumerate(self.edges):
            graph.remove_edge(edge.u, edge.v, key=index)
            try:
                rest = nx.dijkstra_path_length(graph, edge.u, edge.v, weight="length")
                best = min(best, rest + edge.length)
            except nx.NetworkXNoPath:
                pass
            finally:
                graph.add_edge(edge.u, edge.v, key=index, length=edge.length, index=index)
        return best

    @functools.cached_property
    def _shortest(self) -> tuple[np.ndarray, np.ndarray, dict[tuple[int, int], int]]:
        best_edge: dict[tuple[int, int], int] = {}
        for index, edge in enumerate(self.edges):
            for key in ((edge.u, edge.v), (edge.v, edge.u)):
                current = best_edge.get(key)
                if current is None or edge.length < self.edges[current].length:
                    best_edge[key] = index
        n = len(self.vertices)
        rows = [u for u, _ in best_edge]
        cols = [v for _, v in best_edge]
        data = [self.edges[i].length for i in best_edge.values()]
        weights = csr_matrix((data, (rows, cols)), shape=(n, n))
        dist, pred = dijkstra(weights, directed=False, return_predecessors=True)
        dist.setflags(write=False)
        return dist, pred, best_edge

    @property
    def vertex_distances(self) -> np.ndarray:
        return self._shortest[0]

    def point(self, edge: int, offset: float) -> PointOnGraph:
        """Canonical point at ``offset`` along ``edge`` (clamped to the edge)."""
        if not 0 <= edge < len(self.edges):
            raise DomainError(f"No edge {edge}")
        length = self.edges[edge].length
        if offset < -_SNAP or offset > length + _SNAP:
            raise DomainError(f"Offset {offset} outside edge {edge} of length {length}")
        if offset <= _SNAP:
            return self.vertex_point(self.edges[edge].u)
        if offset >= length - _SNAP:
            return self.vertex_point(self.edges[edge].v)
        return PointOnGraph(edge, float(offset))

    def vertex_point(self, vertex: int) -> PointOnGraph:
        for index, edge in enumerate(self.edges):
            if edge.u == vertex:
                return PointOnGraph(index, 0.0)
            if edge.v == vertex:
                return PointOnGraph(index, edge.length)
        raise DomainError(f"Vertex {self.vertices[vertex]!r} has no incident edge")

    def vertex_of(self, point: PointOnGraph) -> Optional[int]:
        edge = self.edges[point.edge]
        if point.offset == 0.0:
            return edge.u
        if point.offset == edge.length:
            return edge.v
        return None

    def label(self, point: PointOnGraph) -> str:
        vertex = self.vertex_of(point)
        if vertex is not None:
            return self.vertices[vertex]
        return f"e{point.edge}@{point.offset:.9g}"

    def _anchors(self, point: PointOnGraph) -> tuple[tuple[int, float], tuple[int, float]]:
        vertex = self.vertex_of(point)
        if vertex is not None:
            return (vertex, 0.0), (vertex, 0.0)
        edge = self.edges[point.edge]
        return (edge.u, point.offset), (edge.v, edge.length - point.offset)

    def _vertex_path(self, source: int, target: int) -> list[Piece]:
        _, pred, best_edge = self._shortest
        walk = [target]
        while walk[-1] != source:
            walk.append(int(pred[source, walk[-1]]))
        walk.reverse()
        pieces = []
        for a, b in zip(walk, walk[1:]):
            index = best_edge[(a, b)]
            edge = self.edges[index]
            pieces.append(Piece(index, 0.0, edge.length) if edge.u == a else Piece(index, edge.length, 0.0))
        return pieces

    def geodesic(self, p: PointOnGraph, q: PointOnGraph) -> Geodesic:
        """Shortest path from ``p`` to ``q`` as a sequence of edge pieces."""
        if p == q:
            return Geodesic(0.0, ())
        self.require_connected()
        table = self.vertex_distances
        best: Optional[tuple[float, int, int]] = None
        if p.edge == q.edge:
            best = (abs(p.offset - q.offset), -1, -1)
        for i, (a, da) in enumerate(self._anchors(p)):
            for j, (b, db) in enumerate(self._anchors(q)):
                cost = da + table[a, b] + db
                if best is None or cost < best[0]:
                    best = (float(cost), i, j)
        assert best is not None
        length, i, j = best
        if i < 0:
            return Geodesic(length, (Piece(p.edge, p.offset, q.offset),))
        a = self._anchors(p)[i][0]
        b = self._anchors(q)[j][0]
        pieces: list[Piece] = []
        if self.vertex_of(p) is None:
            pieces.append(Piece(p.edge, p.offset, 0.0 if i == 0 else self.edges[p.edge].length))
        if a != b:
            pieces.extend(self._vertex_path(a, b))
        if self.vertex_of(q) is None:
            pieces.append(Piece(q.edge, 0.0 if j == 0 else self.edges[q.edge].length, q.offset))
        return Geodesic(length, tuple(pieces))

    def distance(self, p: PointOnGraph, q: PointOnGraph) -> float:
        return self.geodesic(p, q).length

    def point_along(self, geodesic: Geodesic, t: float) -> PointOnGraph:
        """
        Point at arc length ``t`` along a geodesic (clamped to its ends).

        Raises:
            DomainError: If the geodesic has no pieces.
        """
        if not geodesic.pieces:
            raise DomainError("point_along needs a geodesic with at least one piece")
        remaining = max(0.0, t)
        for piece in geodesic.pieces:
            if remaining <= piece.length:
                step = remaining if piece.end >= piece.start else -remaining
                return self.point(piece.edge, piece.start + step)
            remaining -= piece.length
        last = geodesic.pieces[-1]
        return self.point(last.edge, last.end)

    def random_point(self, rng: np.random.Generator) -> PointOnGraph:
        lengths = np.array([edge.length for edge in self.edges])
        edge = int(rng.choice(len(lengths), p=lengths / lengths.sum()))
        return self.point(edge, float(rng.random() * lengths[edge]))


@dataclasses.dataclass(frozen=True, eq=False)
class GeodesicTable:
    """Sample points of a graph together with their intrinsic distances."""

    graph: MetricGraph
    points: tuple[PointOnGraph, ...]
    as_metric: FiniteMetricSpace

    @functools.cached_property
    def _index(self) -> dict[PointOnGraph, int]:
        return {point: i for i, point in enumerate(self.points)}

    def index_of(self, point: PointOnGraph) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise DomainError(f"{point} is not a sample of this table") from None

    def __contains__(self, point: PointOnGraph) -> bool:
        return point in self._index

    @functools.cached_property
    def by_edge(self) -> dict[int, list[tuple[float, int]]]:
        """Interior samples of each edge as sorted ``(offset, index)`` lists."""
        grouped: dict[int, list[tuple[float, int]]] = {}
        for i, point in enumerate(self.points):
            if self.graph.vertex_of(point) is None:
                grouped.setdefault(point.edge, []).append((point.offset, i))
        for entries in grouped.values():
            entries.sort()
        return grouped

    def samples_along(self, geodesic: Geodesic, start: PointOnGraph) -> list[int]:
        """Indices of the samples met along ``geodesic`` from ``start``, in order."""
        visited = [self.index_of(start)]
        for piece in geodesic.pieces:
            entries = self.by_edge.get(piece.edge, [])
            low, high = sorted((piece.start, piece.end))
            inner = [i for offset, i in entries if low <= offset <= high]
            if piece.end < piece.start:
                inner.reverse()
            end = self.graph.point(piece.edge, piece.end)
            tail = [self.index_of(end)] if self.graph.vertex_of(end) is not None else []
            for i in inner + tail:
                if i != visited[-1]:
                    visited.append(i)
        return visited


def graph_metric(graph: MetricGraph, points: Sequence[PointOnGraph]) -> GeodesicTable:
    """
    Pairwise intrinsic distances between points of a graph.

    Each point splits its edge; distances are shortest paths through the
    graph, exact up to floating-point addition.

    Raises:
        DomainError: If the graph is disconnected or points repeat.
    """
    graph.require_connected()
    points = tuple(points)
    if not points:
        raise DomainError("graph_metric needs at least one point")
    if len(set(points)) != len(points):
        raise DomainError("Sample points must be distinct")
    table = graph.vertex_distances
    anchors = [graph._anchors(p) for p in points]
    verts = np.array([[a[0][0], a[1][0]] for a in anchors], dtype=int)
    offs = np.array([[a[0][1], a[1][1]] for a in anchors], dtype=float)

    dist = np.full((len(points), len(points)), np.inf)
    for a in range(2):
        for b in range(2):
            candidate = offs[:, a, None] + table[np.ix_(verts[:, a], verts[:, b])] + offs[None, :, b]
            np.minimum(dist, candidate, out=dist)

    edges = np.array([p.edge for p in points])
    offsets = np.array([p.offset for p in points])
    same_edge = edges[:, None] == edges[None, :]
    direct = np.abs(offsets[:, None] - offsets[None, :])
    dist = np.where(same_edge, np.minimum(dist, direct), dist)
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)

    labels = tuple(graph.label(p) for p in points)
    return GeodesicTable(graph, points, FiniteMetricSpace(labels, dist))


def epsilon_net(graph: MetricGraph, eps: float) -> list[PointOnGraph]:
    """
    Vertices first, then evenly spaced interior points on every edge.

    Each edge of length L is cut into ceil(L / eps) equal pieces, so the spacing
    along edges is at most ``eps`` and every point of the graph is within
    ``eps / 2`` of a sample.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    points = [graph.vertex_point(v) for v in range(len(graph.vertices))]
    for index, edge in enumerate(graph.edges):
        pieces = max(1, math.ceil(edge.length / eps - 1e-9))
        points.extend(graph.point(index, edge.length * k / pieces) for k in range(1, pieces))
    return points


def sample_graph(graph: MetricGraph, eps: float) -> GeodesicTable:
    """graph_metric over epsilon_net."""
    table = graph_metric(graph, epsilon_net(graph, eps))
    logger.info(
        "Sampled graph with %d vertices at eps=%.4g: %d points",
        len(graph.vertices),
        eps,
        len(table.points),
    )
    return table


def _angle_steps(n: int) -> np.ndarray:
    index = np.arange(n)
    steps = np.abs(index[:, None] - index[None, :])
    return np.minimum(steps, n - steps)


def circle_space(n: int) -> FiniteMetricSpace:
    """``n`` equally spaced points of the unit circle with the angle metric."""
    if n < 3:
        raise DomainError(f"circle_space needs n >= 3, got {n}")
    return FiniteMetricSpace(
        tuple(f"theta{k}" for k in range(n)), (2 * math.pi / n) * _angle_steps(n)
    )


def chordal_circle_space(n: int) -> FiniteMetricSpace:
    """The same samples with the Euclidean chord metric ``2 sin(angle / 2)``."""
    if n < 3:
        raise DomainError(f"chordal_circle_space needs n >= 3, got {n}")
    angles = (2 * math.pi / n) * _angle_steps(n)
    return FiniteMetricSpace(tuple(f"theta{k}" for k in range(n)), 2 * np.sin(angles / 2))


def circle_graph(n_edges: int = 8, edge_length: float = QUARTER) -> MetricGraph:
    """A cycle of ``n_edges`` equal edges; edge ``k`` joins ``c{k}`` to ``c{k+1}``."""
    if n_edges < 2:
        raise DomainError("A circle graph needs at least two edges")
    names = [f"c{k}" for k in range(n_edges)]
    return MetricGraph.from_names(
        names, [(names[k], names[(k + 1) % n_edges], edge_length) for k in range(n_edges)]
    )


def circle_table(n: int, scale: float = 1.0) -> GeodesicTable:
    """
    The vertices of ``circle_graph(n)`` with the analytic circle metric.

    ``scale`` multiplies the circumference (``scale * 2 pi``).
    """
    if n < 3:
        raise DomainError(f"circle_table needs n >= 3, got {n}")
    graph = circle_graph(n, scale * 2 * math.pi / n)
    space = circle_space(n)
    if scale != 1.0:
        space = FiniteMetricSpace(space.labels, space.dist * scale)
    points = tuple(graph.vertex_point(v) for v in range(n))
    return GeodesicTable(graph, points, space)


def _check_lengths(*lengths: float) -> None:
    for length in lengths:
        if not length > 0:
            raise DomainError(f"Lengths must be positive, got {length}")


def build_E() -> MetricGraph:
    """
    The tripod E: a spine [x_minus, x_plus] of length pi cut into four pi/4 edges,
    and a branch [x0, x1] of length pi/4 at the spine midpoint.

    Edges: 0 x_minus-s_minus, 1 s_minus-x0, 2 x0-s_plus, 3 s_plus-x_plus, 4 x0-x1.
    """
    v = E_VERTICES
    return MetricGraph.from_names(
        v,
        [
            (v[0], v[1], QUARTER),
            (v[1], v[2], QUARTER),
            (v[2], v[3], QUARTER),
            (v[3], v[4], QUARTER),
            (v[2], v[5], QUARTER),
        ],
    )


def build_E_prime() -> MetricGraph:
    """E with its branch lengthened to pi/2 by a new edge 5 from x1 to x1_ext."""
    base = build_E()
    vertices = base.vertices + ("x1_ext",)
    edges = base.edges + (Edge(E_VERTICES.index("x1"), len(base.vertices), QUARTER),)
    return MetricGraph(vertices, edges)


def build_star4() -> MetricGraph:
    """A center with four spokes of length pi/4 ending at p1..p4."""
    names = ["center", "p1", "p2", "p3", "p4"]
    return MetricGraph.from_names(names, [("center", tip, QUARTER) for tip in names[1:]])


def build_tripod(l1: float, l2: float, l3: float) -> MetricGraph:
    _check_lengths(l1, l2, l3)
    return MetricGraph.from_names(
        ["o", "y1", "y2", "y3"], [("o", "y1", l1), ("o", "y2", l2), ("o", "y3", l3)]
    )


def build_segment(length: float) -> MetricGraph:
    _check_lengths(length)
    return MetricGraph.from_names(["a", "b"], [("a", "b", length)])


def figure_eight(edge_length: float = QUARTER, edges_per_loop: int = 4) -> MetricGraph:
    """Two cycles sharing the vertex ``o``."""
    names = ["o"] + [f"a{k}" for k in range(1, edges_per_loop)] + [f"b{k}" for k in range(1, edges_per_loop)]
    edges = []
    for side in ("a", "b"):
        ring = ["o"] + [f"{side}{k}" for k in range(1, edges_per_loop)] + ["o"]
        edges.extend((x, y, edge_length) for x, y in zip(ring, ring[1:]))
    return MetricGraph.from_names(names, edges)


def random_tree(
    rng: np.random.Generator, n_vertices: int, min_length: float = 0.1, max_length: float = 1.0
) -> MetricGraph:
    """Random recursive tree: vertex k hangs from a uniformly chosen earlier vertex."""
    if n_vertices < 2:
        raise DomainError("A random tree needs at least two vertices")
    names = [f"t{k}" for k in range(n_vertices)]
    edges = [
        (names[int(rng.integers(k))], names[k], float(rng.uniform(min_length, max_length)))
        for k in range(1, n_vertices)
    ]
    return MetricGraph.from_names(names, edges)


def project_to_spine(
    graph: MetricGraph, point: PointOnGraph, spine: tuple[PointOnGraph, PointOnGraph]
) -> PointOnGraph:
    """
    Nearest point of the segment [a, b] of a tree.

    On a tree the projection sits at distance (d(a,x) + d(a,b) - d(b,x)) / 2
    from ``a`` along [a, b].

    Raises:
        DomainError: If the graph has a cycle or the spine is degenerate.
    """
    if not graph.is_tree:
        raise DomainError("project_to_spine needs a tree")
    a, b = spine
    if a == b:
        raise DomainError("Spine endpoints must be distinct")
    segment = graph.geodesic(a, b)
    t = (graph.distance(a, point) + segment.length - graph.distance(b, point)) / 2
    return graph.point_along(segment, min(max(t, 0.0), segment.length))
