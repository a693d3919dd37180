"""
gh-forge - Gromov-Hausdorff distances between finite samples of metric graphs.

Finite metric spaces, metric graphs with their geodesic metric, exact and
bounded GH computations, the explicit correspondence between the circle and
the tripod E, and loop transfer across glued spaces.
"""

from .constructions import (
    EdgeWalk,
    PhiMap,
    chordal_bound,
    chordal_bound_root,
    e_prime_correspondence,
    find_phi_walk,
    half_circle_correspondence,
    phi,
    phi_graph,
    phi_samples,
)
from .errors import (
    AmbiguityError,
    ConstructionError,
    DomainError,
    GhForgeError,
    PreconditionError,
    StructuralError,
)
from .gh_solver import (
    Correspondence,
    GhBounds,
    GluedSpace,
    brute_force_gh,
    distortion,
    exact_gh,
    gh_lower_bounds,
    glue,
    hausdorff_conditions,
    lift_correspondence,
    max_product,
    star4_embedding,
)
from .graph_spaces import (
    GeodesicTable,
    MetricGraph,
    PointOnGraph,
    build_E,
    build_E_prime,
    build_segment,
    build_star4,
    build_tripod,
    circle_graph,
    circle_space,
    epsilon_net,
    graph_metric,
    project_to_spine,
    sample_graph,
)
from .metric_core import (
    FiniteMetricSpace,
    SubsetRef,
    ValidationReport,
    diameter,
    hausdorff_distance,
    validate_metric,
)
from .topology import FreeWord, LoopPath, TransferCertificate, loop_class, small_loops_contractible, transfer_loop

__version__ = "2026.10.18.0"
__all__ = [
    "AmbiguityError",
    "ConstructionError",
    "Correspondence",
    "DomainError",
    "EdgeWalk",
    "FiniteMetricSpace",
    "FreeWord",
    "GeodesicTable",
    "GhBounds",
    "GhForgeError",
    "GluedSpace",
    "LoopPath",
    "MetricGraph",
    "PhiMap",
    "PointOnGraph",
    "PreconditionError",
    "StructuralError",
    "SubsetRef",
    "TransferCertificate",
    "ValidationReport",
    "brute_force_gh",
    "build_E",
    "build_E_prime",
    "build_segment",
    "build_star4",
    "build_tripod",
    "chordal_bound",
    "chordal_bound_root",
    "circle_graph",
    "circle_space",
    "diameter",
    "distortion",
    "e_prime_correspondence",
    "epsilon_net",
    "exact_gh",
    "find_phi_walk",
    "gh_lower_bounds",
    "glue",
    "graph_metric",
    "half_circle_correspondence",
    "hausdorff_conditions",
    "hausdorff_distance",
    "lift_correspondence",
    "loop_class",
    "max_product",
    "phi",
    "phi_graph",
    "phi_samples",
    "project_to_spine",
    "sample_graph",
    "small_loops_contractible",
    "star4_embedding",
    "transfer_loop",
    "validate_metric",
]
