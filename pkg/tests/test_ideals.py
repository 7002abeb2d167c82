"""Tests for ideal oracles, ideality checks and amalgam searches."""

from fractions import Fraction

import pytest

from finite_ages.backend.fraisse import grow, verify_realization
from finite_ages.backend.ideals import (
    AmalgamInstance,
    IdealOracle,
    all_loops_point,
    amalgamate,
    check_amalgamation,
    check_member_invariance,
    claim2_family,
    hat_closure_member,
    is_extendable,
    is_initial_segment,
    is_up_directed,
    joint_extension,
    minimal_amalgams,
    no_loops_point,
    satisfies_minimality,
    transfer_signature,
)
from finite_ages.backend.oracles import (
    GRAPH_SIGNATURE,
    chain,
    full_oracle,
    get_oracle,
    is_graph,
    iter_graphs,
    linear_orders_oracle,
    triangle_free_oracle,
)
from finite_ages.backend.metric import ThresholdEncoding, decode_rel, encode_rel
from finite_ages.backend.structures import canonical_form, disjoint_union, enumerate_structures, is_embedding
from finite_ages.data.types import ElementMap, MetricSpace, Signature, Structure, binary_signature
from finite_ages.errors import InputError, ResourceLimitError


def edge() -> Structure:
    return Structure.build(GRAPH_SIGNATURE, 2, {"E": [(0, 1), (1, 0)]})


def triangle() -> Structure:
    pairs = [(x, y) for x in range(3) for y in range(3) if x != y]
    return Structure.build(GRAPH_SIGNATURE, 3, {"E": pairs})


LINE_THRESHOLDS = [Fraction(r) for r in range(1, 13)]


def line_points(*points: int) -> Structure:
    return encode_rel(MetricSpace.from_points(list(points), "rational"), LINE_THRESHOLDS).structure


def complete_or_empty_oracle() -> IdealOracle:
    """Hereditary but not up-directed: an edge and a non-edge never meet."""

    def member(s: Structure) -> bool:
        if not is_graph(s):
            return False
        edges = len(s.tables[0])
        return edges == 0 or edges == s.size * (s.size - 1)

    return IdealOracle("complete-or-empty", GRAPH_SIGNATURE, member=member, generator=iter_graphs)


class TestOracles:
    """Test built-in oracles."""

    def test_full_oracle_counts(self):
        """The full oracle lists every isomorphism type."""
        o = full_oracle(1)
        assert len(o.members(2)) == 10
        assert len(o.members_up_to(2)) == 1 + 2 + 10

    def test_triangle_free_counts(self):
        """Triangle-free graphs on 3 points: empty, one edge, path."""
        assert len(triangle_free_oracle().members(3)) == 3

    def test_linear_orders(self):
        """One linear order per size."""
        o = linear_orders_oracle()
        assert [len(o.members(n)) for n in range(4)] == [1, 1, 1, 1]

    def test_get_oracle_tokens(self):
        """Tokens resolve to oracles."""
        assert get_oracle("all:2").signature == binary_signature(2)
        assert get_oracle("triangle-free").name == "triangle-free"
        assert get_oracle("metric-line-t:2@6").name == "metric-line-t:2@6"

    def test_unknown_token(self):
        """Unknown tokens raise InputError."""
        with pytest.raises(InputError):
            get_oracle("nonsense")

    def test_completeness_limit(self):
        """Oracles refuse sizes beyond their completeness bound."""
        o = IdealOracle("small", GRAPH_SIGNATURE, member=is_graph, generator=iter_graphs, complete_up_to=2)
        with pytest.raises(ResourceLimitError):
            o.members(3)

    def test_member_invariance(self):
        """The full oracle is invariant under relabeling."""
        assert check_member_invariance(full_oracle(1), 2) is None

    def test_metric_line_oracle(self):
        """Integer line subsets with all distances >= 2."""
        o = get_oracle("metric-line-t:2@4")
        # {0}, {0,2}, {0,3}, {0,4}, {0,2,4}
        assert [len(o.members(n)) for n in range(4)] == [1, 1, 3, 1]

    def test_metric_omit_oracle(self):
        """Integer line subsets avoiding distance 1."""
        o = get_oracle("metric-omit:1@3")
        assert len(o.members(2)) == 2
        assert len(o.members(3)) == 0


class TestInitialSegment:
    """Test hereditary checks."""

    def test_triangle_free(self):
        """Triangle-free graphs are hereditary."""
        report = is_initial_segment(triangle_free_oracle(), 3)
        assert report.holds
        assert report.checked > 0

    def test_counterexample(self):
        """An oracle missing size 1 fails with a witness subset."""
        sig = binary_signature(1)
        o = IdealOracle("no-points", sig, member=lambda s: s.size != 1, generator=lambda n: enumerate_structures(sig, n))
        report = is_initial_segment(o, 2)
        assert not report.holds
        assert report.member.size == 2
        assert len(report.subset) == 1


class TestUpDirected:
    """Test up-directedness searches."""

    def test_linear_orders(self):
        """Chains are up-directed."""
        report = is_up_directed(linear_orders_oracle(), 3, 6)
        assert report.holds
        assert len(report.witnesses) == 10

    def test_bound_too_small(self):
        """The search bound must allow disjoint unions."""
        with pytest.raises(InputError):
            is_up_directed(linear_orders_oracle(), 3, 5)

    def test_not_directed(self):
        """An edge and a non-edge have no common extension."""
        report = is_up_directed(complete_or_empty_oracle(), 2, 4)
        assert not report.holds
        assert report.failure is not None

    def test_parallel_matches_serial(self):
        """jobs does not change the verdict or witnesses."""
        o = triangle_free_oracle()
        serial = is_up_directed(o, 2, 4)
        parallel = is_up_directed(o, 2, 4, jobs=3)
        assert serial.holds and parallel.holds
        assert serial.witnesses == parallel.witnesses


class TestJointExtension:
    """Test joint extensions and extendability."""

    def test_prefers_existing(self):
        """When a embeds in b, b itself is returned."""
        ext = joint_extension(chain(2), chain(3), linear_orders_oracle(), 6)
        assert ext.structure.size == 3
        assert ext.left == ElementMap.identity(2)

    def test_maps_are_embeddings(self):
        """Both maps embed into the result."""
        a = Structure.empty(GRAPH_SIGNATURE, 2)
        b = edge()
        ext = joint_extension(a, b, triangle_free_oracle(), 4)
        assert ext.structure.size == 3
        assert is_embedding(ext.left, a, ext.structure)
        assert is_embedding(ext.right, b, ext.structure)

    def test_signature_mismatch(self):
        """Structures must share the oracle signature."""
        with pytest.raises(InputError):
            joint_extension(chain(2), edge(), triangle_free_oracle(), 4)

    def test_is_extendable(self):
        """Member inputs get a common extension."""
        result = is_extendable(edge(), Structure.empty(GRAPH_SIGNATURE, 2), triangle_free_oracle(), 4)
        assert result is not None
        assert triangle_free_oracle().member(result)

    def test_is_extendable_rejects_non_member(self):
        """A non-member restriction is an input error."""
        with pytest.raises(InputError) as info:
            is_extendable(triangle(), edge(), triangle_free_oracle(), 6)
        assert "rel E" in str(info.value)


class TestMetricOracleExtensions:
    """Test joint extensions in threshold-encoded line oracles."""

    def test_far_apart_pairs_concatenate(self):
        """Distances 4 and 5 with gaps >= 2 meet in the segments 0-4-9."""
        o = get_oracle("metric-line-t:2")
        result = is_extendable(line_points(0, 4), line_points(0, 5), o, 4)
        assert result is not None
        assert result.size == 3
        assert o.member(result)
        m = decode_rel(ThresholdEncoding(tuple(LINE_THRESHOLDS), result))
        assert sorted(m.d(x, y) for x, y in m.pairs()) == [4, 5, 9]

    def test_extension_holds_both(self):
        """Both pairs embed into the found host."""
        a, b = line_points(0, 4), line_points(0, 5)
        ext = joint_extension(a, b, get_oracle("metric-line-t:1"), 4)
        assert ext is not None
        assert is_embedding(ext.left, a, ext.structure)
        assert is_embedding(ext.right, b, ext.structure)

    def test_omit_oracle_up_directed(self):
        """Lines avoiding distance 2 inside [0, 4] are up-directed on pairs."""
        assert is_up_directed(get_oracle("metric-omit:2@4"), 2, 4).holds

    def test_truncated_oracle_not_directed(self):
        """Distances 5 and 6 need a gap of 1 inside [0, 6]."""
        report = is_up_directed(get_oracle("metric-line-t:2@6"), 2, 4)
        assert not report.holds
        assert report.failure is not None

    def test_grow_line_oracle(self):
        """Growth realizes every pair distance of [0, 4]."""
        o = get_oracle("metric-line-t:1@4")
        g, growth = grow(o, 5, 2)
        assert growth.complete
        assert verify_realization(g, o, 2).equal


class TestAmalgamation:
    """Test amalgamation over a common substructure."""

    def test_amalgamate_commutes(self):
        """g1 after f1 equals g2 after f2."""
        point = Structure.empty(GRAPH_SIGNATURE, 1)
        f = ElementMap((0,))
        inst = AmalgamInstance(point, edge(), edge(), f, f)
        result = amalgamate(inst, triangle_free_oracle(), 3)
        assert result is not None
        b, g1, g2 = result
        assert f.then(g1) == f.then(g2)
        assert is_embedding(g1, edge(), b)
        assert is_embedding(g2, edge(), b)

    def test_amalgamate_rejects_bad_map(self):
        """Maps that are not embeddings are input errors."""
        inst = AmalgamInstance(edge(), Structure.empty(GRAPH_SIGNATURE, 2), edge(), ElementMap((0, 1)), ElementMap((0, 1)))
        with pytest.raises(InputError):
            amalgamate(inst, triangle_free_oracle(), 4)

    def test_linear_orders_amalgamate(self):
        """Linear orders have one-point amalgamation."""
        report = check_amalgamation(linear_orders_oracle(), 2, 4)
        assert report.holds
        assert report.checked > 0

    def test_edgeless_graphs_search(self):
        """Graphs without edges cannot amalgamate two edges."""
        point = Structure.empty(GRAPH_SIGNATURE, 1)
        o = IdealOracle(
            "edgeless",
            GRAPH_SIGNATURE,
            member=lambda s: is_graph(s) and not s.tables[0],
            generator=lambda n: [Structure.empty(GRAPH_SIGNATURE, n)],
        )
        inst = AmalgamInstance(point, edge(), edge(), ElementMap((0,)), ElementMap((1,)))
        assert amalgamate(inst, o, 3) is None


class TestMinimalAmalgams:
    """Test minimal joint extensions."""

    @pytest.mark.parametrize("k", [1, 2])
    def test_loop_points_count(self, k):
        """A looped and an unlooped point have 4^k minimal amalgams."""
        sig = binary_signature(k)
        found = minimal_amalgams(all_loops_point(sig), no_loops_point(sig), full_oracle(k))
        assert len(found) == 4**k
        assert all(code.size == 2 for code in found)

    def test_equal_points(self):
        """Two copies of one point amalgamate into that point."""
        sig = binary_signature(1)
        found = minimal_amalgams(no_loops_point(sig), no_loops_point(sig), full_oracle(1))
        assert found == {canonical_form(no_loops_point(sig))}

    def test_claim2_family(self):
        """The family has k pairwise distinct two-point members."""
        family = claim2_family(3)
        assert len(family) == 3
        assert all(c.size == 2 for c in family)
        assert len({canonical_form(c) for c in family}) == 3
        loops = all_loops_point(binary_signature(3))
        for c in family:
            assert satisfies_minimality(c, loops, no_loops_point(binary_signature(3)))

    def test_claim2_family_bad_k(self):
        """k must be positive."""
        with pytest.raises(InputError):
            claim2_family(0)

    def test_satisfies_minimality(self):
        """Extra points break minimality."""
        a, b = chain(1), chain(1)
        assert satisfies_minimality(chain(1), a, b)
        assert not satisfies_minimality(chain(2), a, b)

    def test_disjoint_union_is_minimal(self):
        """A disjoint union needs all its points."""
        a = all_loops_point(binary_signature(1))
        b = no_loops_point(binary_signature(1))
        assert satisfies_minimality(disjoint_union(a, b), a, b)

    def test_free_tuple_limit(self):
        """Too many free tuples raise ResourceLimitError."""
        sig = binary_signature(1)
        with pytest.raises(ResourceLimitError):
            list(minimal_amalgams(all_loops_point(sig), no_loops_point(sig), full_oracle(1), max_free_tuples=1))


class TestHatClosure:
    """Test reduct-based closure membership."""

    def test_reducts(self):
        """Only the R1 reduct matches members with empty R0."""
        sig = binary_signature(2)
        o = IdealOracle(
            "r0-empty",
            sig,
            member=lambda s: not s.tables[0],
            generator=lambda n: enumerate_structures(sig, n),
        )
        s = Structure.build(sig, 2, {"R0": [(0, 1)], "R1": [(1, 0)]})
        assert hat_closure_member(s, o, [["R1"]])
        assert not hat_closure_member(s, o, [["R0"]])


class TestTransferSignature:
    """Test moving relations into a wider signature."""

    def test_padding(self):
        """A binary relation becomes a ternary one padded by every element."""
        s = Structure.build(binary_signature(1), 2, {"R0": [(0, 1)]})
        target = Signature.of(("A", 3), ("B", 2))
        moved = transfer_signature(s, target, {"R0": "A"})
        assert moved.table("A") == frozenset({(0, 1, 0), (0, 1, 1)})
        assert moved.table("B") == frozenset()

    def test_unary_target(self):
        """Targets of arity one are rejected."""
        s = Structure.build(binary_signature(1), 2, {"R0": [(0, 1)]})
        with pytest.raises(InputError):
            transfer_signature(s, Signature.of(("A", 1)), {"R0": "A"})
