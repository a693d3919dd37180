"""
The reproduction report: one row per numeric claim, each with the interval it
must fall in.

Rows render as JSON or CSV; both use ``repr`` for floats so the two formats
carry bit-identical values.
"""

import csv
import dataclasses
import io
import itertools
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np

from ..constructions import (
    HALF_PI,
    canonical_phi,
    chordal_bound,
    chordal_bound_root,
    e_prime_correspondence,
    half_circle_correspondence,
    phi_graph,
)
from ..gh_solver import (
    DEFAULT_BUDGET,
    Correspondence,
    brute_force_gh,
    distortion,
    exact_gh,
    gh_lower_bounds,
    hausdorff_conditions,
    lift_correspondence,
    star4_embedding,
)
from ..graph_spaces import QUARTER, build_E, build_segment, circle_graph, sample_graph
from ..metric_core import (
    TOLERANCE,
    FiniteMetricSpace,
    diameter,
    random_metric_space,
    scaled_space,
)
from ..parallel import parallel_map, seeded_map, spawn_generators

logger = logging.getLogger(__name__)

Format = Literal["json", "csv"]

DEFAULT_EPS = math.pi / 64
DEFAULT_SAMPLES = 2048
LIFT_INSTANCES = 200
ORACLE_SPACES = 30

# Circle samples for the star embedding and the product lift.
_STAR_SAMPLES = 256
_LIFT_SAMPLES = 64

FIELDS = ("claim", "subject", "value", "lower", "upper", "passed")


@dataclasses.dataclass(frozen=True)
class ReportRow:
    """A computed value and the closed interval it has to lie in."""

    claim: str
    subject: str
    value: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.value <= self.upper

    def as_record(self) -> dict[str, Any]:
        return {
            "claim": self.claim,
            "subject": self.subject,
            "value": float(self.value),
            "lower": float(self.lower),
            "upper": float(self.upper),
            "passed": self.passed,
        }


def _lift_violates(rng: np.random.Generator) -> bool:
    """One random product instance; True when the lift increases distortion."""
    x = random_metric_space(rng, int(rng.integers(2, 6)))
    y = random_metric_space(rng, int(rng.integers(2, 6)))
    pairs = {(i, int(rng.integers(y.size))) for i in range(x.size)}
    pairs |= {(int(rng.integers(x.size)), j) for j in range(y.size)}
    relation = Correspondence(x, y, tuple(pairs))
    bound = distortion(relation)
    z = random_metric_space(rng, int(rng.integers(1, 5)))
    span = diameter(z)
    if span > 0 and bound > 0:
        z = scaled_space(z, bound * rng.uniform(0.1, 1.0) / span)
    elif span > 0:
        z = FiniteMetricSpace.single_point()
    return distortion(lift_correspondence(relation, z)) > bound + TOLERANCE


def lift_violations(instances: int = LIFT_INSTANCES, seed: int = 0) -> int:
    return sum(seeded_map(_lift_violates, instances, seed))


def oracle_family(count: int = ORACLE_SPACES, seed: int = 0) -> list[FiniteMetricSpace]:
    """Seeded random spaces of one to four points."""
    return [random_metric_space(rng, int(rng.integers(1, 5))) for rng in spawn_generators(seed, count)]


def oracle_agreements(
    spaces: list[FiniteMetricSpace], budget: int = DEFAULT_BUDGET
) -> tuple[int, int]:
    """(agreements, total) of exact_gh against exhaustive enumeration on all pairs."""
    pairs = list(itertools.combinations_with_replacement(range(len(spaces)), 2))

    def agrees(pair: tuple[int, int]) -> bool:
        x, y = spaces[pair[0]], spaces[pair[1]]
        return exact_gh(x, y, budget).upper == brute_force_gh(x, y).upper

    outcomes = parallel_map(agrees, pairs)
    return sum(outcomes), len(outcomes)


def _identity_agreements(spaces: list[FiniteMetricSpace], budget: int) -> int:
    point = FiniteMetricSpace.single_point()
    return sum(
        exact_gh(x, point, budget).upper == diameter(x) / 2 and exact_gh(x, x, budget).upper == 0.0
        for x in spaces
    )


def _star_samples(n: int) -> int:
    return max(4, (min(n, _STAR_SAMPLES) // 4) * 4)


def reproduce_report(
    eps: float = DEFAULT_EPS,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> list[ReportRow]:
    """
    Recompute every numeric claim about the circle, the tripod E and its variants.

    Args:
        eps: Net resolution for sampled graphs.
        n: Circle samples for Phi; a positive multiple of 8.
        seed: Seed of the randomized batteries.
        budget: Node budget of each exact GH search.
    """
    rows: list[ReportRow] = []
    slack = max(0.02, 4 * math.pi / n)

    phi_distortion = distortion(phi_graph(n))
    rows.append(
        ReportRow("phi-distortion", f"phi_graph(n={n})", phi_distortion, max(0.0, HALF_PI - slack), HALF_PI + 1e-9)
    )
    rows.append(ReportRow("gh-upper-bound", f"phi_graph(n={n}) / 2", phi_distortion / 2, 0.0, QUARTER + 1e-9))
    rows.append(
        ReportRow(
            "phi-antipodal",
            f"d(Phi(x), Phi(-x)) - pi/2, n={n}",
            canonical_phi().antipodal_defect(n),
            0.0,
            1e-9,
        )
    )

    tripod = build_E()
    rows.append(ReportRow("E-length", "build_E()", tripod.total_length, 5 * QUARTER - 1e-12, 5 * QUARTER + 1e-12))
    e_net = sample_graph(tripod, eps)
    rows.append(
        ReportRow("E-diameter", f"E net, eps={eps:.6g}", diameter(e_net.as_metric), math.pi - 1e-9, math.pi + 1e-9)
    )
    rows.append(
        ReportRow(
            "E-prime-distortion",
            f"e_prime_correspondence(n={n})",
            distortion(e_prime_correspondence(n)),
            max(0.0, HALF_PI - slack),
            HALF_PI + 1e-9,
        )
    )
    rows.append(
        ReportRow(
            "half-circle-distortion",
            f"(S1, d/2), n={n}",
            distortion(half_circle_correspondence(n)),
            HALF_PI - 1e-9,
            HALF_PI + 1e-9,
        )
    )

    violations = lift_violations(LIFT_INSTANCES, seed)
    rows.append(ReportRow("lift-violations", f"{LIFT_INSTANCES} random products, seed={seed}", violations, 0, 0))
    segment = sample_graph(build_segment(HALF_PI), math.pi / 8).as_metric
    lifted = lift_correspondence(phi_graph(_LIFT_SAMPLES).transpose(), segment)
    rows.append(
        ReportRow("product-lift", f"E x segment(pi/2) vs phi_graph(n={_LIFT_SAMPLES})", distortion(lifted), 0.0, HALF_PI + 1e-9)
    )

    n_star = _star_samples(n)
    conditions = hausdorff_conditions(star4_embedding(n_star, eps), QUARTER)
    rows.append(
        ReportRow(
            "star4-circle-to-star",
            f"star4_embedding(n={n_star})",
            conditions.left_to_right,
            QUARTER - 1e-9,
            QUARTER + 1e-9,
        )
    )
    rows.append(
        ReportRow(
            "star4-star-to-circle",
            f"star4_embedding(n={n_star})",
            conditions.right_to_left,
            HALF_PI - 1e-9,
            math.pi,
        )
    )

    root = chordal_bound_root()
    rows.append(ReportRow("chordal-root", "D + sqrt(2 - 2 sqrt(1 - D^2)) = 1", root, 0.4916, 0.4917))
    rows.append(ReportRow("chordal-residual", "chordal_bound(root) - 1", abs(chordal_bound(root) - 1), 0.0, 1e-9))

    spaces = oracle_family(ORACLE_SPACES, seed)
    agreements, total = oracle_agreements(spaces, budget)
    rows.append(ReportRow("exact-gh-oracle", f"{total} pairs of {ORACLE_SPACES} spaces, seed={seed}", agreements, total, total))
    rows.append(
        ReportRow(
            "exact-gh-identities",
            f"{ORACLE_SPACES} spaces vs a point and themselves",
            _identity_agreements(spaces, budget),
            len(spaces),
            len(spaces),
        )
    )

    circle_net = sample_graph(circle_graph(), eps).as_metric
    lower = gh_lower_bounds(circle_net, e_net.as_metric)
    rows.append(
        ReportRow("gh-lower-bound", f"circle net vs E net, eps={eps:.6g}", lower, 1e-12, QUARTER + 2 * eps)
    )

    failed = [row.claim for row in rows if not row.passed]
    logger.info("Report: %d rows, %d failed%s", len(rows), len(failed), f" ({', '.join(failed)})" if failed else "")
    return rows


def render(records: list[dict[str, Any]], fmt: Format) -> str:
    """JSON array or CSV with a header; floats always written with ``repr``."""
    if fmt == "json":
        return json.dumps(records, indent=2)
    buffer = io.StringIO()
    if records:
        writer = csv.DictWriter(buffer, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({key: _cell(value) for key, value in record.items()})
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(
    records: list[dict[str, Any]], fmt: Format, out: Optional[Union[str, Path]] = None
) -> str:
    """Render records and write them to ``out`` when given; returns the text."""
    text = render(records, fmt)
    if out is not None:
        Path(out).write_text(text)
        logger.debug("Wrote %d rows to %s", len(records), out)
    return text


def write_rows(rows: list[ReportRow], fmt: Format, out: Optional[Union[str, Path]] = None) -> str:
    return write_records([row.as_record() for row in rows], fmt, out)
