"""The ``gh-forge`` command line."""

import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Literal, Optional

from ..constructions import (
    HALF_PI,
    chordal_bound,
    chordal_bound_root,
    find_phi_walk,
    phi_graph,
)
from ..documents import (
    MetricSpaceDocument,
    load_correspondence,
    load_glued,
    load_graph,
    load_loop,
    load_metric_space,
    save_graph,
    save_loop,
    save_metric_space,
)
from ..errors import GhForgeError
from ..gh_solver import DEFAULT_BUDGET, DEFAULT_SLACK, distortion, exact_gh, glue, gh_lower_bound_terms
from ..graph_spaces import (
    MetricGraph,
    build_E,
    build_E_prime,
    build_star4,
    circle_graph,
    figure_eight,
    graph_metric,
    sample_graph,
)
from ..metric_core import hausdorff_distance, validate_metric
from ..topology import loop_class, small_loops_contractible, transfer_loop
from .options import CommandLine
from .report import DEFAULT_EPS, DEFAULT_SAMPLES, Format, reproduce_report, write_records

logger = logging.getLogger(__name__)

GraphName = Literal["E", "E_prime", "star4", "circle", "figure_eight"]

GRAPHS = {
    "E": build_E,
    "E_prime": build_E_prime,
    "star4": build_star4,
    "circle": circle_graph,
    "figure_eight": figure_eight,
}

cli = CommandLine(
    "gh-forge",
    description="Gromov-Hausdorff distances between finite samples of the circle and metric trees",
)


def _emit(records: list[dict[str, Any]], fmt: Format, out: Optional[str] = None) -> None:
    text = write_records(records, fmt, out)
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


@dataclass
class BuildOptions:
    name: GraphName = field(metadata={"help": "Named graph to sample", "positional": True})
    eps: Optional[float] = field(
        default=None, metadata={"help": "Net resolution; only vertices when omitted"}
    )
    out: Optional[str] = field(default=None, metadata={"help": "Write the metric space JSON here"})
    graph_out: Optional[str] = field(default=None, metadata={"help": "Also write the graph JSON here"})


@cli.command("spaces", "build", options=BuildOptions, help="Sample a named graph into a metric space")
def spaces_build(options: BuildOptions) -> int:
    graph: MetricGraph = GRAPHS[options.name]()
    if options.eps is None:
        table = graph_metric(graph, [graph.vertex_point(v) for v in range(len(graph.vertices))])
    else:
        table = sample_graph(graph, options.eps)
    if options.graph_out:
        save_graph(graph, options.graph_out)
    if options.out:
        save_metric_space(table.as_metric, options.out)
    else:
        print(MetricSpaceDocument.from_space(table.as_metric).model_dump_json(indent=2))
    return 0


@dataclass
class ValidateOptions:
    space: str = field(metadata={"help": "Metric space JSON", "positional": True})
    tol: float = field(default=1e-9, metadata={"help": "Tolerance for every axiom"})


@cli.command("spaces", "validate", options=ValidateOptions, help="Check the metric axioms of a matrix")
def spaces_validate(options: ValidateOptions) -> int:
    report = validate_metric(load_metric_space(options.space, validate=False), options.tol)
    print(report.summary())
    return 0 if report.ok else 1


@dataclass
class ExactOptions:
    left: str = field(metadata={"help": "First metric space JSON", "positional": True})
    right: str = field(metadata={"help": "Second metric space JSON", "positional": True})
    budget: int = field(default=DEFAULT_BUDGET, metadata={"help": "Search node limit"})
    format: Format = field(default="csv", metadata={"help": "Output format"})
    out: Optional[str] = field(default=None, metadata={"help": "Output file (stdout when omitted)"})


@cli.command("gh", "exact", options=ExactOptions, help="Exact GH distance of two small spaces")
def gh_exact(options: ExactOptions) -> int:
    x = load_metric_space(options.left)
    y = load_metric_space(options.right)
    bounds = exact_gh(x, y, options.budget)
    record = {
        "name": f"{options.left} vs {options.right}",
        "lower": bounds.lower,
        "upper": bounds.upper,
        "witness_size": len(bounds.witness) if bounds.witness else 0,
        "exhausted": bounds.exhausted,
    }
    _emit([record], options.format, options.out)
    return 0


@dataclass
class LowerBoundOptions:
    left: str = field(metadata={"help": "First metric space JSON", "positional": True})
    right: str = field(metadata={"help": "Second metric space JSON", "positional": True})
    format: Format = field(default="csv", metadata={"help": "Output format"})


@cli.command("gh", "lower", options=LowerBoundOptions, help="Certified lower bounds for the GH distance")
def gh_lower(options: LowerBoundOptions) -> int:
    terms = gh_lower_bound_terms(load_metric_space(options.left), load_metric_space(options.right))
    record = {"diameter": terms.diameter, "distribution": terms.distribution, "lower": terms.best}
    _emit([record], options.format)
    return 0


@dataclass
class DistortionOptions:
    left: str = field(metadata={"help": "First metric space JSON", "positional": True})
    right: str = field(metadata={"help": "Second metric space JSON", "positional": True})
    relation: str = field(metadata={"help": "Correspondence JSON", "positional": True})


@cli.command("gh", "distortion", options=DistortionOptions, help="Distortion of a correspondence")
def gh_distortion(options: DistortionOptions) -> int:
    x = load_metric_space(options.left)
    y = load_metric_space(options.right)
    print(repr(distortion(load_correspondence(options.relation, x, y))))
    return 0


@dataclass
class GlueOptions:
    left: str = field(metadata={"help": "First metric space JSON", "positional": True})
    right: str = field(metadata={"help": "Second metric space JSON", "positional": True})
    relation: str = field(metadata={"help": "Correspondence JSON", "positional": True})
    eta: float = field(default=DEFAULT_SLACK, metadata={"help": "Extra bridge length (> 0)"})
    out: Optional[str] = field(default=None, metadata={"help": "Write the glued metric space JSON here"})


@cli.command("gh", "glue", options=GlueOptions, help="Realize a correspondence as one metric space")
def gh_glue(options: GlueOptions) -> int:
    x = load_metric_space(options.left)
    y = load_metric_space(options.right)
    glued = glue(x, y, load_correspondence(options.relation, x, y), options.eta)
    if options.out:
        save_metric_space(glued.as_metric, options.out)
    spread = hausdorff_distance(glued.part_subset(0), glued.part_subset(1))
    print(f"points={glued.as_metric.size} bridge={glued.link_length!r} hausdorff={spread!r}")
    return 0


@dataclass
class WalkOptions:
    pass


@cli.command("phi", "walk", options=WalkOptions, help="Print the eight-step walk defining Phi")
def phi_walk(options: WalkOptions) -> int:
    walk = find_phi_walk()
    print(walk.describe())
    for edge, orientation in walk.steps:
        edge_data = walk.graph.edges[edge]
        names = walk.graph.vertices
        start, end = (edge_data.u, edge_data.v) if orientation == 1 else (edge_data.v, edge_data.u)
        print(f"  edge {edge}: {names[start]} -> {names[end]}")
    return 0


@dataclass
class VerifyOptions:
    n: list[int] = field(default_factory=lambda: [DEFAULT_SAMPLES], metadata={"help": "Circle sample counts"})
    format: Format = field(default="csv", metadata={"help": "Output format"})
    out: Optional[str] = field(default=None, metadata={"help": "Output file (stdout when omitted)"})


@cli.command("phi", "verify", options=VerifyOptions, help="Distortion of the sampled graph of Phi")
def phi_verify(options: VerifyOptions) -> int:
    records = []
    for n in options.n:
        value = distortion(phi_graph(n))
        lower = max(0.0, HALF_PI - max(0.02, 4 * math.pi / n))
        upper = HALF_PI + 1e-9
        records.append({"n": n, "distortion": value, "lower": lower, "upper": upper, "passed": lower <= value <= upper})
    _emit(records, options.format, options.out)
    return 0 if all(r["passed"] for r in records) else 1


@dataclass
class TransferOptions:
    glued: str = field(metadata={"help": "Glued space JSON (two sampled graphs and a relation)"})
    loop: str = field(metadata={"help": "Loop JSON on the source graph"})
    bound: float = field(metadata={"help": "Bound D above the Hausdorff distance", "flag": "--D"})
    out: Optional[str] = field(default=None, metadata={"help": "Write the transferred loop JSON here"})


@cli.command("topo", "transfer", options=TransferOptions, help="Move a loop across a glued space")
def topo_transfer(options: TransferOptions) -> int:
    pair = load_glued(options.glued)
    alpha = load_loop(options.loop, pair.source.graph)
    certificate = transfer_loop(pair.glued, pair.source, pair.target, alpha, options.bound)
    if options.out:
        save_loop(certificate.beta, options.out)
    print(
        f"sup_gap={certificate.sup_gap!r} bound={2 * certificate.bound!r} "
        f"subdivision={certificate.subdivision} samples={len(certificate.beta.samples)}"
    )
    return 0 if certificate.holds else 1


@dataclass
class ClassOptions:
    graph: str = field(metadata={"help": "Graph JSON"})
    loop: str = field(metadata={"help": "Loop JSON"})


@cli.command("topo", "class", options=ClassOptions, help="Homotopy class of a loop as a free word")
def topo_class(options: ClassOptions) -> int:
    graph = load_graph(options.graph)
    print(loop_class(graph, load_loop(options.loop, graph)))
    return 0


@dataclass
class ContractOptions:
    graph: str = field(metadata={"help": "Graph JSON"})
    bound: float = field(metadata={"help": "Loop diameter bound C", "flag": "--C"})
    trials: int = field(default=200, metadata={"help": "Random loops to sample"})
    seed: int = field(default=0, metadata={"help": "Random seed"})


@cli.command("topo", "contract", options=ContractOptions, help="Check that small random loops contract")
def topo_contract(options: ContractOptions) -> int:
    report = small_loops_contractible(load_graph(options.graph), options.bound, options.trials, options.seed)
    print(
        f"trials={report.trials} kept={report.accepted} contractible={report.contractible} "
        f"fraction={report.fraction!r} girth={report.girth!r}"
    )
    return 0


@dataclass
class ChordalOptions:
    tol: float = field(default=1e-12, metadata={"help": "Bisection tolerance"})


@cli.command("bounds", "chordal-root", options=ChordalOptions, help="Root of D + sqrt(2 - 2 sqrt(1 - D^2)) = 1")
def bounds_chordal_root(options: ChordalOptions) -> int:
    root = chordal_bound_root(options.tol)
    print(f"root={root!r} residual={abs(chordal_bound(root) - 1)!r}")
    return 0


@dataclass
class ReproduceOptions:
    eps: float = field(default=DEFAULT_EPS, metadata={"help": "Net resolution"})
    n: int = field(default=DEFAULT_SAMPLES, metadata={"help": "Circle samples (multiple of 8)"})
    seed: int = field(default=0, metadata={"help": "Seed of the random batteries"})
    budget: int = field(default=DEFAULT_BUDGET, metadata={"help": "Node budget of each exact search"})
    format: Format = field(default="csv", metadata={"help": "Output format"})
    out: Optional[str] = field(default=None, metadata={"help": "Output file (stdout when omitted)"})


@cli.command("reproduce", options=ReproduceOptions, help="Recompute every numeric claim and check its interval")
def reproduce(options: ReproduceOptions) -> int:
    rows = reproduce_report(options.eps, options.n, options.seed, options.budget)
    _emit([row.as_record() for row in rows], options.format, options.out)
    failed = [row.claim for row in rows if not row.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main(args: Optional[list[str]] = None) -> int:
    try:
        invocation = cli.parse(args)
        logging.basicConfig(
            level=logging.DEBUG if invocation.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return invocation.run()
    except (GhForgeError, OSError, ValueError) as e:
        print(f"gh-forge: error: {e}", file=sys.stderr)
        return 1
