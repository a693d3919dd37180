"""
Tests for loop classes on metric graphs, loop transfer across glued spaces
and the small-loop sampler.
"""

import math
import time

import pytest

from gh_forge.constructions import phi_graph, phi_samples
from gh_forge.errors import AmbiguityError, DomainError
from gh_forge.gh_solver import Correspondence, glue
from gh_forge.graph_spaces import MetricGraph, circle_graph, circle_table, figure_eight
from gh_forge.parallel import spawn_generators
from gh_forge.topology import (
    FreeWord,
    LoopPath,
    NetWalker,
    loop_class,
    net_spacing,
    small_loops_contractible,
    transfer_loop,
    winding_number,
)


def vertex(graph, name):
    return graph.vertex_point(graph.vertices.index(name))


def ring(graph, names):
    return LoopPath.closed(graph, [vertex(graph, name) for name in names])


@pytest.fixture
def circle():
    return circle_graph()


@pytest.fixture
def once_around(circle):
    return ring(circle, [f"c{k}" for k in range(8)])


@pytest.fixture
def stretched():
    """Two circle tables 2% apart in scale, glued along the identity."""
    source = circle_table(256)
    target = circle_table(256, 1.02)
    relation = Correspondence.identity(source.as_metric, target.as_metric)
    return glue(source.as_metric, target.as_metric, relation, 1e-6), source, target


class TestFreeWord:
    """Reduced words in the free group."""

    def test_reduce_cancels(self):
        """Adjacent inverse letters cancel, repeatedly."""
        word = FreeWord.reduce([(0, 1), (1, 1), (1, -1), (0, -1), (2, 1)])
        assert word.letters == ((2, 1),)

    def test_inverse(self):
        """A word times its inverse is the identity."""
        word = FreeWord(((0, 1), (3, -1)))
        assert (word * word.inverse()).is_identity
        assert word.inverse().letters == ((3, 1), (0, -1))

    def test_str(self):
        assert str(FreeWord()) == "1"
        assert str(FreeWord(((0, 1), (2, -1)))) == "g0 g2^-1"


class TestLoopPath:
    """Construction and refinement of loops."""

    def test_empty(self, circle):
        with pytest.raises(DomainError, match="at least one"):
            LoopPath(circle, (), 1.0)

    def test_not_closed(self, circle):
        with pytest.raises(DomainError, match="first sample"):
            LoopPath(circle, (vertex(circle, "c0"), vertex(circle, "c1")), 1.0)

    def test_gap_bound(self, circle):
        """Gaps above the step bound are rejected."""
        points = tuple(vertex(circle, name) for name in ("c0", "c2", "c0"))
        with pytest.raises(DomainError, match="step bound"):
            LoopPath(circle, points, math.pi / 4)

    def test_closed_infers_bound(self, once_around):
        assert once_around.step_bound == pytest.approx(math.pi / 4)
        assert once_around.samples[0] == once_around.samples[-1]
        assert len(once_around.samples) == 9

    def test_refined(self, circle, once_around):
        """Refinement keeps the class and the winding number."""
        finer = once_around.refined(4)
        assert len(finer.samples) == 33
        assert finer.step_bound == pytest.approx(math.pi / 16)
        assert loop_class(circle, finer) == loop_class(circle, once_around)
        assert winding_number(finer) == 1

    def test_refined_repeated_sample(self, circle):
        """A loop that pauses on a sample refines without moving."""
        paused = ring(circle, ["c0", "c0"] + [f"c{k}" for k in range(1, 8)])
        finer = paused.refined(2)
        assert len(finer.samples) == 19
        assert finer.samples[:3] == (vertex(circle, "c0"),) * 3
        assert winding_number(finer) == 1


class TestLoopClass:
    """Homotopy classes read off generator crossings."""

    def test_tree_loops_are_trivial(self, tripod):
        """Every loop on a tree is contractible."""
        loop = ring(tripod, ["s_minus", "x_minus", "s_minus", "x0", "x1", "x0", "s_plus", "x0"])
        assert loop_class(tripod, loop).is_identity

    def test_once_around(self, circle, once_around):
        """One turn is one generator; the reverse turn is its inverse."""
        forward = loop_class(circle, once_around)
        assert len(forward) == 1
        backward = ring(circle, [f"c{k}" for k in (0, 7, 6, 5, 4, 3, 2, 1)])
        assert loop_class(circle, backward) == forward.inverse()

    def test_backtracking(self, circle):
        """Going halfway and back is trivial."""
        loop = ring(circle, ["c0", "c1", "c2", "c3", "c2", "c1"])
        assert loop_class(circle, loop).is_identity

    def test_figure_eight_commutator(self):
        """a b a^-1 b^-1 does not reduce."""
        graph = figure_eight()
        names = ["o", "a1", "a2", "a3", "o", "b1", "b2", "b3", "o", "a3", "a2", "a1", "o", "b3", "b2", "b1"]
        word = loop_class(graph, ring(graph, names))
        assert len(word) == 4
        assert str(word) == "g3 g7 g3^-1 g7^-1"

    def test_long_gap_is_ambiguous(self, circle):
        """A gap of half the circle could go either way."""
        loop = ring(circle, ["c0", "c4"])
        with pytest.raises(AmbiguityError):
            loop_class(circle, loop)

    def test_other_graph(self, circle, once_around):
        with pytest.raises(DomainError):
            loop_class(circle_graph(), once_around)


class TestWindingNumber:
    def test_turns(self, circle, once_around):
        assert winding_number(once_around) == 1
        twice = ring(circle, [f"c{k % 8}" for k in range(16)])
        assert winding_number(twice) == 2
        assert winding_number(ring(circle, ["c0", "c7", "c6", "c5", "c4", "c3", "c2", "c1"])) == -1

    def test_needs_circle(self, tripod):
        with pytest.raises(DomainError, match="circle graph"):
            winding_number(ring(tripod, ["s_minus", "x0"]))


class TestTransferLoop:
    """Moving loops between the parts of a glued space."""

    def test_constant_loop(self, stretched):
        glued, source, target = stretched
        alpha = LoopPath(source.graph, (source.points[5],), 0.0)
        certificate = transfer_loop(glued, source, target, alpha, 0.1)
        assert certificate.holds
        assert len(certificate.beta.samples) == 1

    def test_full_turn_keeps_winding(self, stretched):
        """A loop around the circle lands on a loop around the stretched circle."""
        glued, source, target = stretched
        alpha = LoopPath.closed(source.graph, source.points)
        certificate = transfer_loop(glued, source, target, alpha, 0.1)
        assert certificate.holds
        assert certificate.sup_gap < 0.2
        assert certificate.delta == pytest.approx((0.1 - 0.01 * math.pi - 1e-6) / 2)
        assert winding_number(certificate.beta) == 1

    def test_random_loops(self, stretched):
        """Seeded random walks keep their winding number and the 2D gap."""
        glued, source, target = stretched
        walker = NetWalker(source)
        start = time.perf_counter()
        for rng in spawn_generators(7, 50):
            alpha = walker.loop(rng, int(rng.integers(5, 400)))
            certificate = transfer_loop(glued, source, target, alpha, 0.1)
            assert certificate.sup_gap < 0.2
            assert winding_number(certificate.beta) == winding_number(alpha)
            assert certificate.beta.graph is target.graph
        assert time.perf_counter() - start < 30

    def test_into_a_tree(self):
        """Transferred onto E, even the full turn becomes contractible."""
        source = circle_table(256)
        target = phi_samples(256).images
        relation = phi_graph(256).rebind(source.as_metric, target.as_metric)
        glued = glue(source.as_metric, target.as_metric, relation, 1e-6)
        bound = math.pi / 4 + 0.1
        alpha = LoopPath.closed(source.graph, source.points)
        certificate = transfer_loop(glued, source, target, alpha, bound)
        assert certificate.holds
        assert loop_class(target.graph, certificate.beta).is_identity
        assert len(loop_class(source.graph, alpha)) == 1
        walker = NetWalker(source)
        start = time.perf_counter()
        for rng in spawn_generators(11, 50):
            alpha = walker.loop(rng, int(rng.integers(5, 400)))
            certificate = transfer_loop(glued, source, target, alpha, bound)
            assert loop_class(target.graph, certificate.beta).is_identity
        assert time.perf_counter() - start < 30

    def test_out_of_a_tree(self):
        """Loops on E land within twice the bound on the circle."""
        circle = circle_table(256)
        tree = phi_samples(256).images
        relation = phi_graph(256).rebind(circle.as_metric, tree.as_metric).transpose()
        glued = glue(tree.as_metric, circle.as_metric, relation, 1e-6)
        bound = math.pi / 4 + 0.1
        walker = NetWalker(tree)
        for rng in spawn_generators(17, 20):
            alpha = walker.loop(rng, int(rng.integers(5, 400)))
            certificate = transfer_loop(glued, tree, circle, alpha, bound)
            assert certificate.sup_gap < 2 * bound
            assert certificate.beta.graph is circle.graph

    def test_there_and_back(self, stretched):
        """Sending a loop to the stretched circle and back keeps its class."""
        glued, source, target = stretched
        walker = NetWalker(source)
        for rng in spawn_generators(13, 30):
            alpha = walker.loop(rng, int(rng.integers(5, 400)))
            there = transfer_loop(glued, source, target, alpha, 0.1)
            back = transfer_loop(glued, target, source, there.beta, 0.1, from_part=1)
            assert back.beta.graph is source.graph
            assert loop_class(source.graph, back.beta) == loop_class(source.graph, alpha)

    def test_bound_below_hausdorff(self, stretched):
        glued, source, target = stretched
        alpha = LoopPath.closed(source.graph, source.points)
        with pytest.raises(DomainError, match="Hausdorff"):
            transfer_loop(glued, source, target, alpha, 0.01)

    def test_tables_must_match(self, stretched):
        glued, source, target = stretched
        alpha = LoopPath.closed(source.graph, source.points)
        with pytest.raises(DomainError, match="parts of the glued space"):
            transfer_loop(glued, target, source, alpha, 0.1)

    def test_reverse_direction(self, stretched):
        """Loops can also move from the second part to the first."""
        glued, source, target = stretched
        alpha = LoopPath.closed(target.graph, target.points)
        certificate = transfer_loop(glued, target, source, alpha, 0.1, from_part=1)
        assert winding_number(certificate.beta) == 1


class TestNetWalker:
    def test_spacing(self):
        assert net_spacing(circle_table(256)) == pytest.approx(2 * math.pi / 256)

    def test_walks_are_closed(self, e_net):
        walker = NetWalker(e_net)
        for rng in spawn_generators(3, 10):
            loop = walker.loop(rng, 30)
            assert loop.samples[0] == loop.samples[-1]
            assert max(loop.gaps()) <= walker.reach + 1e-9
            assert walker.diameter(loop) <= math.pi + 1e-9


class TestSmallLoopsContractible:
    """Random loops of small diameter."""

    def test_tree(self, tripod):
        report = small_loops_contractible(tripod, 1.0, 40, seed=1, resolution=math.pi / 64)
        assert report.accepted > 0
        assert report.fraction == 1.0
        assert math.isinf(report.girth)

    def test_circle_below_half_girth(self, circle):
        """Loops of diameter below pi cannot wrap the circle."""
        report = small_loops_contractible(circle, math.pi - 0.01, 60, seed=2, resolution=math.pi / 128)
        assert report.accepted > 0
        assert report.contractible == report.accepted
        assert report.girth == pytest.approx(2 * math.pi)

    def test_reproducible(self, circle):
        first = small_loops_contractible(circle, 1.0, 20, seed=5, resolution=math.pi / 64)
        second = small_loops_contractible(circle, 1.0, 20, seed=5, resolution=math.pi / 64)
        assert first == second

    def test_bound_must_be_positive(self, circle):
        with pytest.raises(DomainError):
            small_loops_contractible(circle, 0.0, 10)

    def test_disconnected(self):
        graph = MetricGraph.from_names(["a", "b", "c", "d"], [("a", "b", 1.0), ("c", "d", 1.0)])
        with pytest.raises(DomainError, match="disconnected"):
            small_loops_contractible(graph, 1.0, 10)
