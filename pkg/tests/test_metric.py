"""Tests for metric encodings, embeddings and growth on the line."""

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finite_ages.backend.metric import (
    ThresholdEncoding,
    age_minus_A_member,
    age_t_member,
    check_n_plus_3,
    concatenate_line,
    coset_line,
    decode_rel,
    embed_euclid,
    embed_line,
    encode_rel,
    gram_report,
    group_homogeneity_extend,
    group_step,
    is_isometry,
    omega_t,
    omit_distance_grow,
    packing_bound,
    rectangle_space,
    spectrum,
    spectrum_closure_violations,
    threshold_signature,
    thresholds_from_signature,
)
from finite_ages.backend.structures import is_embedding
from finite_ages.data.types import ElementMap, MetricSpace, Structure
from finite_ages.errors import DecodeError, InputError

F = Fraction


def equilateral(n: int = 3) -> MetricSpace:
    return MetricSpace.from_matrix([[0 if x == y else 1 for y in range(n)] for x in range(n)])


ALPHABET = (F(2), F(3), F(4))


def alphabet_spaces(n: int):
    """Every space on n points with distances from ALPHABET."""
    pairs = list(itertools.combinations(range(n), 2))
    for values in itertools.product(ALPHABET, repeat=len(pairs)):
        yield MetricSpace.from_pairs(n, dict(zip(pairs, values)), "rational")


def isometry_matches_encoding(m: MetricSpace, m2: MetricSpace) -> bool:
    e, e2 = encode_rel(m, ALPHABET).structure, encode_rel(m2, ALPHABET).structure
    for p in itertools.permutations(range(m2.size), m.size):
        f = ElementMap(p)
        if is_isometry(f, m, m2) != is_embedding(f, e, e2):
            return False
    return True


@st.composite
def rational_spaces(draw):
    """Spaces with distances in [1, 2], so the triangle inequality always holds."""
    n = draw(st.integers(min_value=1, max_value=6))
    pairs = list(itertools.combinations(range(n), 2))
    values = draw(st.lists(st.fractions(min_value=1, max_value=2, max_denominator=6), min_size=len(pairs), max_size=len(pairs)))
    return MetricSpace.from_pairs(n, dict(zip(pairs, values)), "rational")


@st.composite
def triangles(draw):
    """Three distances a, b, c with a flag telling whether one is the sum of the others."""
    a = draw(st.fractions(min_value=1, max_value=10, max_denominator=4))
    b = draw(st.fractions(min_value=1, max_value=10, max_denominator=4))
    if draw(st.booleans()):
        c = a + b
    else:
        u = draw(st.fractions(min_value=0, max_value=1, max_denominator=9).filter(lambda v: 0 < v < 1))
        c = abs(a - b) + (a + b - abs(a - b)) * u
    values = draw(st.permutations([a, b, c]))
    return values, max(values) * 2 == sum(values)


def random_space(rng: random.Random, dim: int, genuine: bool) -> MetricSpace:
    n = rng.randint(2, dim + 5)
    if genuine:
        points = rng.sample(list(itertools.product(range(10), repeat=dim)), n)
        return MetricSpace.from_points(points, "float")
    pairs = list(itertools.combinations(range(n), 2))
    return MetricSpace.from_pairs(n, {pair: rng.uniform(1.0, 2.0) for pair in pairs}, "float")


class TestThresholdEncoding:
    """Test rel(M) encoding and decoding."""

    def test_auto_thresholds(self):
        """The positive spectrum is used by default."""
        m = MetricSpace.from_points([0, 1, 3], "rational")
        e = encode_rel(m)
        assert e.thresholds == (F(1), F(2), F(3))
        assert e.structure.signature.names == ("d1", "d2", "d3")

    def test_diagonal_included(self):
        """Every point is within every threshold of itself."""
        e = encode_rel(MetricSpace.from_points([0, 2], "rational"), [F(1)])
        assert (0, 0) in e.structure.tables[0]
        assert (0, 1) not in e.structure.tables[0]

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(min_value=-20, max_value=20), min_size=1, max_size=5, unique=True))
    def test_decode_inverts_encode(self, points):
        """Decoding the spectrum encoding gives the space back."""
        m = MetricSpace.from_points(points, "rational")
        assert decode_rel(encode_rel(m)) == m

    def test_asymmetric_relation(self):
        """An asymmetric threshold relation cannot be decoded."""
        sig = threshold_signature([F(1)])
        s = Structure(sig, 2, (frozenset({(0, 0), (1, 1), (0, 1)}),))
        with pytest.raises(DecodeError):
            decode_rel(ThresholdEncoding((F(1),), s))

    def test_no_threshold(self):
        """Pairs outside every threshold cannot be decoded."""
        sig = threshold_signature([F(1)])
        s = Structure(sig, 2, (frozenset({(0, 0), (1, 1)}),))
        with pytest.raises(DecodeError):
            decode_rel(ThresholdEncoding((F(1),), s))

    def test_thresholds_from_signature(self):
        """Relation names carry their thresholds."""
        sig = threshold_signature([F(1), F(3, 2)])
        assert sig.names == ("d1", "d3_2")
        assert thresholds_from_signature(sig) == (F(1), F(3, 2))
        assert thresholds_from_signature(sig, "float") == (1.0, 1.5)

    def test_bad_thresholds(self):
        """Thresholds must be positive and increasing."""
        m = MetricSpace.from_points([0, 1], "rational")
        with pytest.raises(InputError):
            encode_rel(m, [F(2), F(1)])
        with pytest.raises(InputError):
            encode_rel(m, [F(0)])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.fractions(min_value=-10, max_value=10, max_denominator=7), min_size=1, max_size=6, unique=True))
    def test_decode_inverts_encode_fractions(self, points):
        """Round trip with fractional line points."""
        m = MetricSpace.from_points(points, "rational")
        assert decode_rel(encode_rel(m)) == m

    @settings(max_examples=100, deadline=None)
    @given(rational_spaces())
    def test_decode_inverts_encode_matrix(self, m):
        """Round trip with spaces off the line."""
        assert decode_rel(encode_rel(m)) == m

    def test_isometries_are_encoding_embeddings(self):
        """Maps between small spaces are isometries iff they embed the encodings."""
        small = [m for n in range(1, 4) for m in alphabet_spaces(n)]
        for m in small:
            for m2 in small:
                if m.size <= m2.size:
                    assert isometry_matches_encoding(m, m2)
        for m in alphabet_spaces(2):
            for m2 in alphabet_spaces(4):
                assert isometry_matches_encoding(m, m2)

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(list(alphabet_spaces(3))), st.sampled_from(list(alphabet_spaces(4))))
    def test_isometries_into_four_points(self, m, m2):
        """Three points into four, same equivalence."""
        assert isometry_matches_encoding(m, m2)


class TestSpectrumAndOmega:
    """Test spectra and separated subsets."""

    def test_spectrum(self):
        """Spectrum lists realized distances with 0."""
        m = MetricSpace.from_points([0, 1, 3], "rational")
        assert spectrum(m) == [0, 1, 2, 3]
        assert spectrum(m, base=2) == [0, 2, 3]

    def test_spectrum_float_merges(self):
        """Nearly equal floats merge."""
        m = MetricSpace.from_points([0.0, 1.0, 2.0000000000001], "float")
        assert len(spectrum(m)) == 3

    def test_omega(self):
        """Largest 2-separated subset of 0..4."""
        m = MetricSpace.from_points([0, 1, 2, 3, 4], "rational")
        result = omega_t(m, 2)
        assert result.value == 3
        assert result.witness == (0, 2, 4)
        assert result.exact

    def test_omega_bounds(self):
        """Above the exact limit the result carries bounds."""
        m = MetricSpace.from_points(list(range(8)), "rational")
        result = omega_t(m, 2, exact_limit=4)
        assert result.value <= result.upper
        assert result.value >= 3

    def test_omega_needs_positive_t(self):
        """t must be positive."""
        with pytest.raises(InputError):
            omega_t(equilateral(), 0)

    def test_packing_bound(self):
        """The packing bound dominates omega on the line."""
        m = MetricSpace.from_points(list(range(10)), "rational")
        assert omega_t(m, 3).value <= packing_bound(m.diameter(), 3, 1)

    def test_packing_bound_plane(self):
        """Omega never exceeds the packing bound for points in a 7 by 7 square."""
        rng = random.Random(5)
        for _ in range(200):
            points = [(rng.uniform(0, 7), rng.uniform(0, 7)) for _ in range(rng.randint(1, 12))]
            m = MetricSpace.from_points(points, "float")
            assert m.diameter() <= 10
            result = omega_t(m, 1)
            assert result.exact
            assert result.value <= packing_bound(m.diameter(), 1, 2)

    def test_age_members(self):
        """Separated and distance-avoiding spaces."""
        m = MetricSpace.from_points([0, 2, 5], "rational")
        assert age_t_member(m, 2)
        assert not age_t_member(m, 3)
        assert age_minus_A_member(m, [1, 4])
        assert not age_minus_A_member(m, [3])

    def test_closure_violations(self):
        """Missing differences and sums are reported."""
        assert spectrum_closure_violations([F(0), F(1), F(2)], 2) == []
        violations = spectrum_closure_violations([F(0), F(2), F(3)], 10)
        assert (F(2), F(3), "difference") in violations

    def test_ball_and_sphere(self):
        """Balls hold points within r, spheres those at exactly r."""
        m = MetricSpace.from_points([0, 1, 3, 4], "rational")
        assert m.ball(1, F(2)) == [0, 1, 2]
        assert m.sphere(1, F(2)) == [2]
        assert m.sphere(0, F(5)) == []
        assert m.min_distance() == 1
        assert m.diameter() == 4


class TestLineEmbedding:
    """Test embeddings into the line."""

    def test_points(self):
        """Coordinates start at 0 and d(0, 1)."""
        m = MetricSpace.from_points([0, 2, -1], "rational")
        assert embed_line(m) == [0, 2, -1]

    def test_not_embeddable(self):
        """The equilateral triangle is not a line subset."""
        assert embed_line(equilateral()) is None

    def test_rectangle(self):
        """The rectangle space is not a line subset."""
        assert embed_line(rectangle_space(F(1), F(2))) is None

    @settings(max_examples=150, deadline=None)
    @given(triangles())
    def test_three_point_criterion(self, case):
        """Three points lie on a line iff the largest distance is the sum of the others."""
        (a, b, c), degenerate = case
        m = MetricSpace.from_pairs(3, {(0, 1): a, (0, 2): b, (1, 2): c}, "rational")
        assert (embed_line(m) is not None) == degenerate

    def test_rectangle_subsets(self):
        """Each 3-point subset of the rectangle lies on a line."""
        m = rectangle_space(F(1), F(2))
        for subset in itertools.combinations(range(4), 3):
            assert embed_line(m.restrict(subset)) is not None
        assert embed_line(m) is None

    def test_coset_line(self):
        """Coset points are k·a and b + k·a."""
        m = coset_line(F(4), F(1), 2)
        assert embed_line(m) == [0, 1, 4, 5]

    def test_coset_line_range(self):
        """b must lie strictly between 0 and a/2."""
        with pytest.raises(InputError):
            coset_line(F(4), F(3), 2)

    def test_concatenate(self):
        """Concatenation places the second space after a gap."""
        m1 = MetricSpace.from_points([0, 1], "rational")
        m2 = MetricSpace.from_points([0, 2], "rational")
        joined = concatenate_line(m1, m2, F(3))
        assert embed_line(joined) == [0, 1, 4, 6]

    def test_isometry(self):
        """Reflection of a line subset is an isometry."""
        m = MetricSpace.from_points([0, 1, 3], "rational")
        m2 = MetricSpace.from_points([3, 2, 0], "rational")
        assert is_isometry(ElementMap((0, 1, 2)), m, m2)
        assert not is_isometry(ElementMap((1, 0, 2)), m, m2)


class TestEuclidean:
    """Test Euclidean embeddings."""

    def test_triangle_in_plane(self):
        """An equilateral triangle embeds in the plane."""
        coords = embed_euclid(equilateral(), 2)
        assert coords is not None
        assert coords[0] == (0.0, 0.0)
        assert math.isclose(math.dist(coords[1], coords[2]), 1.0, rel_tol=1e-6)

    def test_triangle_not_on_line(self):
        """An equilateral triangle needs two dimensions."""
        assert embed_euclid(equilateral(), 1) is None

    def test_simplex(self):
        """Four equidistant points need three dimensions."""
        assert embed_euclid(equilateral(4), 2) is None
        assert embed_euclid(equilateral(4), 3) is not None

    def test_gram_rank(self):
        """The Gram matrix of a square has rank 2."""
        m = MetricSpace.from_points([(0, 0), (1, 0), (1, 1), (0, 1)], "float")
        report = gram_report(m)
        assert report.psd
        assert report.rank == 2

    def test_non_euclidean(self):
        """The rectangle space has a negative Gram eigenvalue."""
        m = rectangle_space(1.0, 2.0, "float")
        assert not gram_report(m).psd
        assert embed_euclid(m, 3) is None

    def test_bad_dim(self):
        """dim must be positive."""
        with pytest.raises(InputError):
            embed_euclid(equilateral(), 0)

    def test_n_plus_3(self):
        """Both sides of the n+3 criterion agree."""
        report = check_n_plus_3(equilateral(4), 2)
        assert report.consistent
        assert not report.subsets_embed
        assert not report.whole_embeds
        line = MetricSpace.from_points([0.0, 1.0, 3.0, 7.0, 8.0], "float")
        report = check_n_plus_3(line, 1)
        assert report.consistent
        assert report.whole_embeds

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_n_plus_3_random(self, dim):
        """Subset and whole verdicts agree on grid point sets and on random metrics."""
        rng = random.Random(dim)
        for index in range(60):
            report = check_n_plus_3(random_space(rng, dim, genuine=index % 2 == 0), dim)
            assert report.consistent
            if index % 2 == 0:
                assert report.whole_embeds


class TestOmitDistanceGrow:
    """Test growth of line sets avoiding distances."""

    def test_two_copies(self):
        """Two copies of a 2-point set avoid distance 1."""
        target = MetricSpace.from_points([0, 2], "rational")
        growth = omit_distance_grow([F(1)], [target, target], F(64))
        assert growth.complete
        assert len(growth.points) == 4
        assert age_minus_A_member(MetricSpace.from_points(growth.points, "rational"), [F(1)])

    def test_forbid_one_and_two(self):
        """Five 2-point copies avoid the distances 1 and 2 in every pair."""
        targets = [MetricSpace.from_points([0, d], "rational") for d in (F(3), F(4), F(5), F(7, 2), F(6))]
        growth = omit_distance_grow([F(1), F(2)], targets, F(64))
        assert growth.complete
        assert len(growth.points) == 10
        differences = {abs(p - q) for p, q in itertools.combinations(growth.points, 2)}
        assert 0 not in differences
        assert not differences & {F(1), F(2)}

    def test_target_with_forbidden_distance(self):
        """Targets must themselves avoid the forbidden distances."""
        target = MetricSpace.from_points([0, 1], "rational")
        with pytest.raises(InputError):
            omit_distance_grow([F(1)], [target], F(64))

    def test_window_too_small(self):
        """A target wider than the window is skipped."""
        target = MetricSpace.from_points([0, 10], "rational")
        growth = omit_distance_grow([F(1)], [target], F(5))
        assert not growth.complete
        assert growth.stages[0].translation is None

    def test_float_mode(self):
        """Float mode places copies too."""
        target = MetricSpace.from_points([0.0, 2.0], "float")
        growth = omit_distance_grow([1.0], [target, target], 64.0, scalar_mode="float")
        assert growth.complete

    def test_line_only(self):
        """Only dimension 1 is supported."""
        with pytest.raises(InputError):
            omit_distance_grow([F(1)], [], F(4), dim=2)


class TestGroupIsometries:
    """Test isometry extension on additive groups."""

    def test_group_step(self):
        """The step is the positive generator."""
        assert group_step([F(1, 2), F(1, 3)]) == F(1, 6)
        assert group_step([4, 6]) == 2

    def test_translation(self):
        """Same-direction pairs extend to a translation."""
        g = group_homogeneity_extend([1], 10, [(1, 3), (2, 4)])
        assert g.kind == "translation"
        assert g(F(5)) == 7

    def test_reflection(self):
        """Reversed pairs extend to a reflection."""
        g = group_homogeneity_extend([1], 10, [(1, 3), (2, 2)])
        assert g.kind == "reflection"
        assert g(F(0)) == 4

    def test_empty_partial(self):
        """The empty map extends to the identity."""
        g = group_homogeneity_extend([1], 10, [])
        assert g(F(3)) == 3

    def test_not_isometry(self):
        """Partial maps must preserve distances."""
        with pytest.raises(InputError):
            group_homogeneity_extend([1], 10, [(1, 3), (2, 5)])

    def test_outside_group(self):
        """Points must lie in the group."""
        with pytest.raises(InputError):
            group_homogeneity_extend([2], 10, [(1, 1)])

    def test_outside_window(self):
        """Points must lie inside the window."""
        with pytest.raises(InputError):
            group_homogeneity_extend([1], 3, [(5, 5)])
