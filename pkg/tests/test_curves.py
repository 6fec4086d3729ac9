import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thurston_lab.curves import (
    INFINITY,
    ZERO,
    EnumerationControl,
    MappingClass,
    S04,
    S11,
    Slope,
    SurfaceKind,
    curve_word,
    cyclic_reduce,
    dehn_twist,
    enumerate_slopes,
    farey_graph,
    free_reduce,
    intersection_number,
    iter_tree,
    mapping_class_apply,
    normalize,
    slope_level,
    stern_brocot_path,
)
from thurston_lab.errors import ZeroSlopeInput

nonzero = st.integers(-50, 50).filter(lambda k: k != 0)
pairs = st.tuples(st.integers(-200, 200), st.integers(-200, 200)).filter(lambda t: t != (0, 0))
slopes = pairs.map(lambda t: normalize(*t))
kinds = st.sampled_from([S11, S04])


def random_class(rng):
    g = MappingClass.identity()
    for _ in range(rng.randint(0, 8)):
        g = g @ rng.choice([MappingClass(1, 1, 0, 1), MappingClass(1, 0, 1, 1), MappingClass(0, -1, 1, 0),
                            MappingClass(0, 1, 1, 0), MappingClass(1, -1, 0, 1)])
    return g


classes = st.integers(0, 10**6).map(lambda s: random_class(random.Random(s)))


class TestNormalize:
    def test_gcd_reduction(self):
        assert normalize(2, 4) == Slope(1, 2)

    def test_sign_canonicalization(self):
        assert normalize(-1, -1) == Slope(1, 1)

    def test_infinity(self):
        assert normalize(3, 0) == Slope(1, 0)
        assert normalize(-3, 0) == INFINITY

    def test_zero_rejected(self):
        with pytest.raises(ZeroSlopeInput):
            normalize(0, 0)

    def test_noncanonical_constructor_rejected(self):
        with pytest.raises(ValueError):
            Slope(2, 4)

    @given(pairs, nonzero)
    def test_scale_invariant_and_idempotent(self, pq, k):
        s = normalize(*pq)
        assert normalize(k * pq[0], k * pq[1]) == s
        assert normalize(s.p, s.q) == s
        assert math.gcd(s.p, s.q) == 1

    def test_parse_round_trip(self):
        for s in enumerate_slopes(4):
            assert Slope.parse(str(s)) == s
        assert Slope.parse("inf") == INFINITY
        assert Slope.parse("-3") == Slope(-3, 1)


class TestEnumeration:
    def test_depth_zero(self):
        assert set(enumerate_slopes(0)) == {ZERO, INFINITY}

    def test_depth_one(self):
        assert set(enumerate_slopes(1)) == {ZERO, INFINITY, Slope(1, 1), Slope(-1, 1)}

    def test_counts_grow_strictly(self):
        counts = [len(enumerate_slopes(d)) for d in range(0, 10)]
        assert all(a < b for a, b in zip(counts, counts[1:]))

    def test_count_formula(self):
        # two roots plus 2^d - 1 mediants on each half line
        for d in range(8):
            assert len(enumerate_slopes(d)) == 2 + 2 * (2 ** d - 1)

    def test_circular_order(self):
        ss = enumerate_slopes(6)
        assert ss[0] == INFINITY
        vals = [Fraction(s.p, s.q) for s in ss[1:]]
        assert vals == sorted(vals)

    def test_deterministic(self):
        assert enumerate_slopes(7) == enumerate_slopes(EnumerationControl(depth=7))

    def test_max_denominator_mode(self):
        ss = enumerate_slopes(EnumerationControl(max_denominator=3))
        assert Slope(2, 3) in ss and Slope(-3, 2) in ss
        assert all(s.q <= 3 for s in ss)

    def test_level_and_path(self):
        assert slope_level(Slope(1, 1)) == 1
        assert slope_level(Slope(2, 1)) == 2
        assert slope_level(INFINITY) == 0
        for node in iter_tree(6):
            assert slope_level(node.slope) == node.level
            half, path = stern_brocot_path(node.slope)
            assert len(path) == node.level - 1


class TestIntersection:
    def test_paper_values(self):
        assert intersection_number(S11, ZERO, INFINITY) == 1
        assert intersection_number(S04, ZERO, INFINITY) == 2

    @given(kinds, slopes)
    def test_self_zero(self, kind, s):
        assert intersection_number(kind, s, s) == 0

    @given(kinds, slopes, slopes)
    def test_symmetric_and_zero_iff_equal(self, kind, a, b):
        i = intersection_number(kind, a, b)
        assert i == intersection_number(kind, b, a)
        assert (i == 0) == (a == b)
        assert i == kind.intersection_scale * abs(a.p * b.q - a.q * b.p)


class TestDehnTwist:
    def test_axis_fixed(self):
        assert dehn_twist(ZERO, 5, ZERO) == ZERO

    def test_single_twist(self):
        assert dehn_twist(ZERO, 1, INFINITY) == normalize(1, -1)

    @given(kinds, slopes, slopes, st.integers(-20, 20), st.integers(-20, 20))
    def test_group_law(self, kind, a, b, n, m):
        assert dehn_twist(a, n, dehn_twist(a, m, b, kind), kind) == dehn_twist(a, n + m, b, kind)
        assert dehn_twist(a, 0, b, kind) == b

    @settings(max_examples=100)
    @given(kinds, slopes, slopes, st.integers(-30, 30))
    def test_preserves_intersection_with_axis(self, kind, a, b, n):
        assert intersection_number(kind, a, dehn_twist(a, n, b, kind)) == intersection_number(kind, a, b)

    def test_large_iterates_stay_exact(self):
        s = dehn_twist(Slope(3, 7), 10**6, Slope(2, 5))
        assert math.gcd(s.p, s.q) == 1
        assert intersection_number(S11, Slope(3, 7), s) == 1

    def test_sphere_twist_is_double(self):
        assert dehn_twist(ZERO, 1, INFINITY, S04) == dehn_twist(ZERO, 2, INFINITY, S11)


class TestMappingClass:
    def test_identity(self):
        assert mapping_class_apply(MappingClass.identity(), Slope(3, 7)) == Slope(3, 7)

    def test_rotation(self):
        assert mapping_class_apply(MappingClass(0, 1, -1, 0), INFINITY) == ZERO

    def test_determinant_checked(self):
        with pytest.raises(ValueError):
            MappingClass(2, 0, 0, 1)

    @given(classes, classes, slopes)
    def test_composition(self, g, h, s):
        assert mapping_class_apply(g @ h, s) == mapping_class_apply(g, mapping_class_apply(h, s))
        assert mapping_class_apply(g.inverse(), mapping_class_apply(g, s)) == s

    @given(kinds, classes, slopes, slopes, st.integers(-15, 15))
    def test_conjugation_compatibility(self, kind, g, a, b, n):
        lhs = mapping_class_apply(g, dehn_twist(a, n, b, kind))
        # orientation-reversing classes invert the twist direction
        rhs = dehn_twist(mapping_class_apply(g, a), g.det * n, mapping_class_apply(g, b), kind)
        assert lhs == rhs

    def test_same_class_up_to_sign(self):
        assert MappingClass(1, 1, 0, 1).same_class(MappingClass(-1, -1, 0, -1))


class TestWords:
    def test_torus_generators(self):
        assert str(curve_word(S11, INFINITY)) == "A"
        assert str(curve_word(S11, ZERO)) == "B"
        assert str(curve_word(S11, Slope(1, 1))) == "AB"

    def test_mediant_concatenation(self):
        # 2/1 is the mediant of 1/0 and 1/1
        assert str(curve_word(S11, Slope(2, 1))) == "A" + "AB"
        assert str(curve_word(S11, Slope(1, 2))) == "AB" + "B"

    def test_word_lengths_match_slope(self):
        for s in enumerate_slopes(6):
            w = curve_word(S11, s)
            assert len(w.letters) == abs(s.p) + abs(s.q)

    def test_cyclically_reduced(self):
        for kind in (S11, S04):
            for s in enumerate_slopes(5):
                letters = curve_word(kind, s).letters
                assert cyclic_reduce(letters) == tuple(letters)
                assert free_reduce(letters) == tuple(letters)

    def test_deterministic(self):
        assert curve_word(S04, Slope(5, 3)) == curve_word(S04, Slope(5, 3))

    def test_sphere_symbols(self):
        assert set(str(curve_word(S04, Slope(3, 2)))) <= set("PQRpqr")


class TestFarey:
    def test_base_edge(self):
        g = farey_graph(S11, 1)
        assert (INFINITY, ZERO) in g.edges or (ZERO, INFINITY) in g.edges

    def test_determinant_edge(self):
        g = farey_graph(S11, 2)
        edges = {frozenset(e) for e in g.edges}
        assert frozenset((ZERO, Slope(1, 2))) in edges

    @pytest.mark.parametrize("depth", range(1, 11))
    def test_connected(self, depth):
        assert farey_graph(S11, depth).is_connected()
        assert farey_graph(S04, depth).is_connected()

    @pytest.mark.parametrize("kind", [S11, S04])
    def test_edges_are_exactly_the_neighbour_pairs(self, kind):
        g = farey_graph(kind, 6)
        vs = g.vertices
        brute = {frozenset((vs[i], vs[j])) for i in range(len(vs)) for j in range(i + 1, len(vs))
                 if intersection_number(kind, vs[i], vs[j]) == kind.intersection_scale}
        assert brute == {frozenset(e) for e in g.edges}

    def test_tree_parents_are_neighbours(self):
        for node in iter_tree(10):
            for parent in (node.upper, node.lower):
                assert abs(node.slope.p * parent.q - node.slope.q * parent.p) == 1

    def test_json_schema(self):
        d = json.loads(farey_graph(S11, 2).to_json())
        assert set(d) == {"vertices", "edges"}
        assert "1/0" in d["vertices"]
        assert all(len(e) == 2 for e in d["edges"])


def test_surface_kind_parse():
    assert SurfaceKind.parse("s11") is S11
    assert SurfaceKind.parse("FourPuncturedSphere") is S04
    with pytest.raises(ValueError):
        SurfaceKind.parse("s22")
