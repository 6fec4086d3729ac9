import json
import random

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from thurston_lab.curves import INFINITY, ZERO, EnumerationControl, S04, S11, Slope, dehn_twist, enumerate_slopes
from thurston_lab.errors import ConvexityViolation, SurfaceMismatch, ZeroVector
from thurston_lab.geometry import (
    DualSphere,
    delta_twist,
    dual_sphere,
    facet,
    facets_csv,
    facets_in_arc,
    integrate_stretch,
    longest_facet,
    norm_value,
    slopes_between,
    stretch_vector,
    thurston_distance,
    thurston_norm,
)
from thurston_lab.holonomy import build_point, curve_length, log_length_gradient, modular_torus, symmetric_sphere
from thurston_lab.precision import Vec2, vec

mpmath.mp.dps = 60


def mp(x):
    return mpmath.mpf(str(x))


@pytest.fixture(scope="module")
def torus():
    return modular_torus()


@pytest.fixture(scope="module")
def sphere():
    return symmetric_sphere()


class TestNorm:
    def test_homogeneous(self, torus):
        v = vec("0.3", "-1.1")
        with torus.precision():
            assert norm_value(torus, v * 2, 10) == 2 * norm_value(torus, v, 10)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    def test_subadditive(self, a, b, c, d):
        X = modular_torus()
        u, v = vec(repr(a), repr(b)), vec(repr(c), repr(d))
        if u.is_zero() or v.is_zero() or (u + v).is_zero():
            return
        with X.precision():
            assert norm_value(X, u + v, 8) <= norm_value(X, u, 8) + norm_value(X, v, 8) + X.tol

    def test_positive_on_circle(self, sphere):
        for k in range(24):
            th = 2 * mpmath.pi * k / 24
            assert norm_value(sphere, (mpmath.nstr(mpmath.cos(th), 30), mpmath.nstr(mpmath.sin(th), 30)), 8) > 0

    def test_zero_vector(self, torus):
        with pytest.raises(ZeroVector):
            thurston_norm(torus, (0, 0))

    def test_matches_oracle_covectors(self, torus):
        cov = oracles.log_covectors("s11", mp(torus.fn_length), mp(torus.fn_twist), 8)
        for v in [("1", "0"), ("0.2", "1"), ("-1", "0.7")]:
            expected = oracles.norm(cov, [mpmath.mpf(x) for x in v])
            got = thurston_norm(torus, v, EnumerationControl(depth=8)).value
            assert abs(mp(got) - expected) < mpmath.mpf("1e-18")

    def test_metric_consistency_small_t(self, torus):
        # d(X, X + t v) / t tends to the norm of v
        t = gmpy2.mpfr("1e-6")
        rng = random.Random(5)
        for _ in range(4):
            v = vec(repr(rng.uniform(-1, 1)), repr(rng.uniform(-1, 1)))
            with torus.precision():
                Y = torus.shifted(v.x * t, v.y * t)
                d = thurston_distance(torus, Y, 10).value / t
                assert abs(d - norm_value(torus, v, 10)) <= 1e-5 * abs(d)


class TestDistance:
    def test_zero_on_diagonal(self, torus):
        assert thurston_distance(torus, torus).value == 0

    def test_asymmetric(self, torus):
        Y = torus.shifted(0, "0.5")
        a = thurston_distance(torus, Y).value
        b = thurston_distance(Y, torus).value
        assert a > 0 and b > 0
        assert abs(a - b) > 1e-3

    def test_triangle_inequality(self):
        rng = random.Random(11)
        pts = [build_point(S04, repr(rng.uniform(1, 4)), repr(rng.uniform(-1, 1))) for _ in range(5)]
        ctrl = EnumerationControl(depth=10)
        for X in pts:
            for Y in pts:
                for Z in pts:
                    with X.precision():
                        lhs = thurston_distance(X, Z, ctrl).value
                        rhs = thurston_distance(X, Y, ctrl).value + thurston_distance(Y, Z, ctrl).value
                        assert lhs <= rhs + X.tol

    def test_monotone_in_depth(self):
        X, Y = build_point(S11, "2", "0.1"), build_point(S11, "2.3", "-0.4")
        vals = [thurston_distance(X, Y, EnumerationControl(depth=d)).value for d in range(1, 10)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_surface_mismatch(self, torus, sphere):
        with pytest.raises(SurfaceMismatch):
            thurston_distance(torus, sphere)

    def test_result_serializes(self, torus):
        d = thurston_distance(torus, torus.shifted("0.1", 0)).to_dict()
        assert set(d) == {"value", "witness", "converged", "depth", "bits"}


class TestDualSphere:
    @pytest.mark.parametrize("which", ["torus", "sphere"])
    def test_convex_at_depth_12(self, which, request):
        X = request.getfixturevalue(which)
        S = dual_sphere(X, EnumerationControl(depth=12))
        assert len(S) == 2 + 2 * (2 ** 12 - 1)
        S.check_convex()

    def test_convexity_violation_detected(self, torus):
        S = dual_sphere(torus, EnumerationControl(depth=3))
        cov = list(S.covectors)
        cov[2], cov[3] = cov[3], cov[2]
        with pytest.raises(ConvexityViolation):
            DualSphere(torus, 3, list(S.slopes), cov).check_convex()

    def test_vertices_are_unit_covectors(self, torus):
        # each dual vertex has dual norm one: its largest pairing with the unit ball is 1
        S = dual_sphere(torus, EnumerationControl(depth=6))
        prim = S.primal_vertices()
        with torus.precision():
            for c in S.covectors:
                assert abs(max(c.dot(p) for p in prim) - 1) <= torus.tol * 100

    def test_twisted_slopes_have_distinct_vertices(self, torus):
        S = dual_sphere(torus, EnumerationControl(depth=8))
        for n in range(1, 5):
            s = dehn_twist(INFINITY, n, ZERO)
            assert S.covectors[S.index(s)] != S.covectors[S.index(ZERO)]

    def test_json_schema(self, sphere):
        d = json.loads(dual_sphere(sphere, EnumerationControl(depth=2)).to_json())
        assert set(d) == {"depth", "vertices"}
        assert set(d["vertices"][0]) == {"slope", "cov"}
        assert len(d["vertices"]) == 8

    def test_svg(self, torus):
        S = dual_sphere(torus, EnumerationControl(depth=4))
        for svg in (S.to_svg(), S.to_svg(primal=True, highlight=[INFINITY])):
            assert svg.startswith("<svg") and "<polygon" in svg
            assert ">1/0<" in svg and ">0/1<" in svg


class TestFacet:
    def test_against_bisection_oracle_torus(self, torus):
        cov = oracles.log_covectors("s11", mp(torus.fn_length), mp(torus.fn_twist), 6, span=45)
        vm, vp, length = oracles.facet(cov, INFINITY)
        f = facet(torus, INFINITY)
        assert f.converged and f.length > 0
        assert abs(mp(f.length) - length) < mpmath.mpf("1e-30")
        for got, want in ((f.v_minus, vm), (f.v_plus, vp)):
            assert abs(mp(got.x) - want[0]) < mpmath.mpf("1e-30")
            assert abs(mp(got.y) - want[1]) < mpmath.mpf("1e-30")

    def test_against_bisection_oracle_sphere(self):
        X = build_point(S04, "3.3", "0.4")
        cov = oracles.log_covectors("s04", "3.3", "0.4", 6, span=70)
        _, _, length = oracles.facet(cov, INFINITY)
        assert abs(mp(facet(X, INFINITY).length) - length) < mpmath.mpf("1e-30")

    @pytest.mark.parametrize("s", [INFINITY, ZERO, Slope(2, 1), Slope(-3, 5)])
    def test_endpoints_on_the_unit_sphere(self, sphere, s):
        f = facet(sphere, s)
        with sphere.precision():
            for v in (f.v_minus, f.v_plus):
                assert abs(f.covector.dot(v) - 1) <= sphere.tol
            mids = [f.v_minus + (f.v_plus - f.v_minus) * gmpy2.mpfr(k) / 8 for k in range(9)]
            for t in enumerate_slopes(6):
                c = log_length_gradient(sphere, t)
                assert all(c.dot(v) <= 1 + sphere.tol for v in mids)

    def test_shrinks_along_twist_family(self, torus):
        lengths = [facet(torus, dehn_twist(INFINITY, n, ZERO)).length for n in range(0, 6)]
        assert all(a > b for a, b in zip(lengths, lengths[1:]))

    def test_nested_as_depth_grows(self):
        X = build_point(S11, "2.2", "0.3")
        prev = None
        for d in range(0, 9):
            f = facet(X, Slope(1, 2), global_depth=d)
            with X.precision():
                d_ = f.covector.perp()
                span = (f.v_minus.dot(d_), f.v_plus.dot(d_))
                if prev is not None:
                    assert span[0] >= prev[0] - X.tol and span[1] <= prev[1] + X.tol
            prev = span

    def test_forward_and_reverse_length_agree_when_symmetric(self, torus):
        f = facet(torus, INFINITY)
        assert f.reverse_length > 0

    def test_csv(self, torus):
        text = facets_csv([facet(torus, s) for s in (INFINITY, ZERO)])
        lines = text.strip().splitlines()
        assert lines[0] == "slope,l_alpha,facet_length,converged"
        assert lines[1].startswith("1/0,") and lines[1].endswith(",true")


class TestStretch:
    def test_stretch_vector_is_maximal_for_alpha_only(self, torus):
        for sign in (1, -1):
            v = stretch_vector(torus, INFINITY, sign)
            with torus.precision():
                assert abs(log_length_gradient(torus, INFINITY).dot(v) - 1) <= torus.tol
                for s in enumerate_slopes(7)[:200]:
                    if s != INFINITY:
                        assert log_length_gradient(torus, s).dot(v) < 1

    def test_endpoints_differ(self, torus):
        assert stretch_vector(torus, INFINITY, "+") != stretch_vector(torus, INFINITY, "-")

    def test_bad_sign(self, torus):
        with pytest.raises(ValueError):
            stretch_vector(torus, INFINITY, 0)

    def test_zero_time(self, torus):
        assert integrate_stretch(torus, INFINITY, "+", 0) is torus

    def test_negative_time(self, torus):
        with pytest.raises(ValueError):
            integrate_stretch(torus, INFINITY, "+", "-0.1")

    def test_alpha_stretches_exponentially(self):
        X = build_point(S11, "2.5", "0.2")
        t = gmpy2.mpfr("0.2")
        Y = integrate_stretch(X, INFINITY, "+", t)
        with X.precision():
            for s in (ZERO, Slope(1, 1), Slope(-1, 2)):
                assert curve_length(Y, s) / curve_length(X, s) < gmpy2.exp(t)
            # alpha is the base curve, so its length is the first chart coordinate
            assert abs(Y.fn_length / X.fn_length - gmpy2.exp(t)) < 1e-10


class TestDeltaTwist:
    def test_zero_at_t0(self):
        assert abs(delta_twist(3, 0)) < 1e-35

    def test_frozen_value(self):
        # mpmath at 60 digits
        assert abs(mp(delta_twist(3, "0.2")) - mpmath.mpf("0.671926069017901834028751813004735601318")) < 1e-35

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.2, 8), st.floats(0, 2))
    def test_matches_oracle(self, l, t):
        got = mp(delta_twist(repr(l), repr(t)))
        want = oracles.delta(repr(l), repr(t))
        assert abs(got - want) <= mpmath.mpf("1e-30") * max(1, abs(want))

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            delta_twist(0, 1)

    def test_predicts_sphere_twist_gap_sign(self):
        # along the stretch line of the base curve the twist coordinate drifts by a
        # positive amount whenever delta_twist is positive
        X = build_point(S04, "3", "0")
        t = gmpy2.mpfr("0.05")
        up = integrate_stretch(X, INFINITY, "+", t)
        down = integrate_stretch(X, INFINITY, "-", t)
        assert delta_twist(3, t) > 0
        assert up.fn_twist - down.fn_twist > 0


class TestArcs:
    def test_slopes_between(self):
        inner = slopes_between(ZERO, INFINITY, 2)
        assert set(inner) == {Slope(1, 1), Slope(2, 1), Slope(1, 2)}
        other = slopes_between(ZERO, INFINITY, 1, containing=Slope(-3, 1))
        assert other == [Slope(-1, 1)]
        with pytest.raises(ValueError):
            slopes_between(ZERO, Slope(2, 1), 1)

    def test_complement_of_a_facet(self, torus):
        f = facet(torus, INFINITY)
        found = facets_in_arc(torus, f.v_plus, f.v_minus, EnumerationControl(depth=10), arc_levels=3)
        assert {g.slope for g in found} == set(enumerate_slopes(3)) - {INFINITY}
        with torus.precision():
            for a, b in zip(found, found[1:]):
                # consecutive facets meet at most at an endpoint
                assert a.v_plus.cross(b.v_minus) >= -torus.tol

    def test_zero_endpoint(self, torus):
        with pytest.raises(ZeroVector):
            facets_in_arc(torus, Vec2(0, 0), vec(1, 0))

    def test_longest_is_order_independent(self, torus):
        fs = [facet(torus, s) for s in enumerate_slopes(2)]
        assert longest_facet(fs) == longest_facet(list(reversed(fs)))
        assert longest_facet([]) is None
