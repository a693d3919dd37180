"""
JSON documents for spaces, graphs, correspondences, loops and glued pairs.

Reading a document validates it twice: pydantic checks the shape, then the
gh_forge constructors check the mathematics. Every ``load_*`` function has a
``safe_load_*`` twin returning ``Ok(value)`` or ``Err(message)``.
"""

import dataclasses
import logging
import math
from pathlib import Path
from typing import Callable, Optional, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from result import Err, Ok, Result

from .errors import DomainError, GhForgeError, StructuralError
from .gh_solver import Correspondence, GluedSpace, glue
from .graph_spaces import GeodesicTable, MetricGraph, graph_metric, sample_graph
from .metric_core import FiniteMetricSpace
from .topology import LoopPath

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Model = TypeVar("Model", bound=BaseModel)
T = TypeVar("T")


class MetricSpaceDocument(BaseModel):
    labels: Optional[list[str]] = Field(default=None, description="One label per point")
    dist: list[list[float]] = Field(description="Square distance matrix")

    def to_space(self, validate: bool = True) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_matrix(self.dist, self.labels, validate=validate)

    @classmethod
    def from_space(cls, space: FiniteMetricSpace) -> "MetricSpaceDocument":
        return cls(labels=list(space.labels), dist=space.dist.tolist())


class EdgeDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    u: str
    v: str
    length: float = Field(alias="len", gt=0)


class GraphDocument(BaseModel):
    vertices: list[str]
    edges: list[EdgeDocument]

    def to_graph(self) -> MetricGraph:
        return MetricGraph.from_names(self.vertices, [(e.u, e.v, e.length) for e in self.edges])

    @classmethod
    def from_graph(cls, graph: MetricGraph) -> "GraphDocument":
        names = graph.vertices
        return cls(
            vertices=list(names),
            edges=[EdgeDocument(u=names[e.u], v=names[e.v], length=e.length) for e in graph.edges],
        )


class PointDocument(BaseModel):
    edge: int = Field(ge=0)
    offset: float = Field(ge=0)


class CorrespondenceDocument(BaseModel):
    pairs: list[tuple[int, int]] = Field(min_length=1)

    def to_correspondence(self, left: FiniteMetricSpace, right: FiniteMetricSpace) -> Correspondence:
        return Correspondence(left, right, tuple(self.pairs))

    @classmethod
    def from_correspondence(cls, correspondence: Correspondence) -> "CorrespondenceDocument":
        return cls(pairs=list(correspondence.pairs))


class LoopDocument(BaseModel):
    points: list[PointDocument] = Field(min_length=1)
    step_bound: Optional[float] = Field(default=None, gt=0)

    def to_loop(self, graph: MetricGraph) -> LoopPath:
        points = [graph.point(p.edge, p.offset) for p in self.points]
        return LoopPath.closed(graph, points, self.step_bound)

    @classmethod
    def from_loop(cls, loop: LoopPath) -> "LoopDocument":
        return cls(
            points=[PointDocument(edge=p.edge, offset=p.offset) for p in loop.samples],
            step_bound=loop.step_bound or None,
        )


class SampledGraphDocument(BaseModel):
    """A graph with its samples: explicit points, an epsilon-net, or just the vertices."""

    graph: GraphDocument
    eps: Optional[float] = Field(default=None, gt=0)
    points: Optional[list[PointDocument]] = None

    def to_table(self) -> GeodesicTable:
        graph = self.graph.to_graph()
        if self.points is not None:
            return graph_metric(graph, [graph.point(p.edge, p.offset) for p in self.points])
        if self.eps is not None:
            return sample_graph(graph, self.eps)
        return graph_metric(graph, [graph.vertex_point(v) for v in range(len(graph.vertices))])


class GluedDocument(BaseModel):
    source: SampledGraphDocument
    target: SampledGraphDocument
    pairs: list[tuple[int, int]] = Field(min_length=1)
    eta: float = Field(default=1e-6, gt=0)


@dataclasses.dataclass(frozen=True)
class GluedPair:
    """A loaded :class:`GluedDocument`: the glued space and both sample tables."""

    glued: GluedSpace
    source: GeodesicTable
    target: GeodesicTable


def read_document(path: PathLike, model: type[Model]) -> Model:
    """
    Parse and validate a JSON document.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        StructuralError: If the JSON does not match ``model``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Document not found: {path}")
    try:
        document = model.model_validate_json(path.read_text())
    except ValidationError as e:
        raise StructuralError(f"Invalid {model.__name__} in {path}: {e}") from None
    logger.debug("Read %s from %s", model.__name__, path)
    return document


def write_document(document: BaseModel, path: PathLike) -> None:
    Path(path).write_text(document.model_dump_json(by_alias=True, indent=2))
    logger.debug("Wrote %s to %s", type(document).__name__, path)


def load_metric_space(path: PathLike, validate: bool = True) -> FiniteMetricSpace:
    return read_document(path, MetricSpaceDocument).to_space(validate)


def save_metric_space(space: FiniteMetricSpace, path: PathLike) -> None:
    if not all(math.isfinite(v) for v in space.dist.flat):
        raise DomainError("Only finite distance matrices can be written")
    write_document(MetricSpaceDocument.from_space(space), path)


def load_graph(path: PathLike) -> MetricGraph:
    return read_document(path, GraphDocument).to_graph()


def save_graph(graph: MetricGraph, path: PathLike) -> None:
    write_document(GraphDocument.from_graph(graph), path)


def load_correspondence(
    path: PathLike, left: FiniteMetricSpace, right: FiniteMetricSpace
) -> Correspondence:
    return read_document(path, CorrespondenceDocument).to_correspondence(left, right)


def save_correspondence(correspondence: Correspondence, path: PathLike) -> None:
    write_document(CorrespondenceDocument.from_correspondence(correspondence), path)


def load_loop(path: PathLike, graph: MetricGraph) -> LoopPath:
    return read_document(path, LoopDocument).to_loop(graph)


def save_loop(loop: LoopPath, path: PathLike) -> None:
    write_document(LoopDocument.from_loop(loop), path)


def load_glued(path: PathLike) -> GluedPair:
    """Build both sample tables and glue them along the listed pairs."""
    document = read_document(path, GluedDocument)
    source = document.source.to_table()
    target = document.target.to_table()
    bridge = Correspondence(source.as_metric, target.as_metric, tuple(document.pairs))
    glued = glue(source.as_metric, target.as_metric, bridge, document.eta)
    return GluedPair(glued=glued, source=source, target=target)


def _safely(loader: Callable[..., T], *args: object) -> Result[T, str]:
    try:
        return Ok(loader(*args))
    except (GhForgeError, OSError, ValueError) as e:
        return Err(str(e))


def safe_load_metric_space(path: PathLike, validate: bool = True) -> Result[FiniteMetricSpace, str]:
    return _safely(load_metric_space, path, validate)


def safe_load_graph(path: PathLike) -> Result[MetricGraph, str]:
    return _safely(load_graph, path)


def safe_load_correspondence(
    path: PathLike, left: FiniteMetricSpace, right: FiniteMetricSpace
) -> Result[Correspondence, str]:
    return _safely(load_correspondence, path, left, right)


def safe_load_loop(path: PathLike, graph: MetricGraph) -> Result[LoopPath, str]:
    return _safely(load_loop, path, graph)


def safe_load_glued(path: PathLike) -> Result[GluedPair, str]:
    return _safely(load_glued, path)
