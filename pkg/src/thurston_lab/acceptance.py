"""The eleven acceptance checks, runnable from tests and from ``selftest``.

Every check returns a :class:`CriterionResult`.  Tolerances are the stated
ones; a check that cannot reach them reports FAIL with its numbers.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from . import precision as P
from .curves import (
    INFINITY,
    ZERO,
    EnumerationControl,
    MappingClass,
    S04,
    S11,
    Slope,
    dehn_twist,
    enumerate_slopes,
    farey_graph,
    intersection_number,
    iter_tree,
    mapping_class_apply,
    normalize,
)
from .geometry import (
    _strictly_between,
    dual_sphere,
    facet,
    integrate_stretch,
    thurston_distance,
    thurston_norm,
)
from .holonomy import build_point, curve_length, modular_torus, remark, symmetric_sphere
from .lab import (
    LinearMap2,
    facet_asymptotics,
    facet_bounds,
    gamma_linearity_defect,
    isometry_check,
    longest_facet_correspondence,
    mapping_class_differential,
    surface_discriminator,
    twist_length_ratio,
)
from .precision import Vec2


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        summary = ", ".join(f"{k}={_short(v)}" for k, v in self.detail.items() if not isinstance(v, (list, dict)))
        return f"criterion {self.number:2d} [{mark}] {self.title}: {summary}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "result": "PASS" if self.passed else "FAIL",
                "detail": {k: _plain(v) for k, v in self.detail.items()}}


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, type(mpfr(0))):
        return f"{float(v):.4g}"
    return str(v)


def _plain(v):
    if isinstance(v, (bool, int, str, float)) or v is None:
        return v
    if isinstance(v, Slope):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return P.to_decimal_string(v)


MAPPING_CLASSES = [
    MappingClass(1, 1, 0, 1),
    MappingClass(1, 0, 1, 1),
    MappingClass(0, -1, 1, 0),
    MappingClass(2, 1, 1, 1),
    MappingClass(1, -2, 0, 1),
    MappingClass(0, 1, 1, 0),
]


def metric_norm_consistency(bits=128, depth=14, seed=7, samples=20) -> CriterionResult:
    X = modular_torus(bits)
    ctrl = EnumerationControl(depth=depth)
    rng = random.Random(seed)
    worst = mpfr(0)
    converged = True
    with X.precision():
        t = mpfr("1e-6")
        for _ in range(samples):
            ang = mpfr(rng.uniform(0, 2 * math.pi))
            v = Vec2(gmpy2.cos(ang), gmpy2.sin(ang))
            n = thurston_norm(X, v, ctrl)
            d = thurston_distance(X, X.shifted(v.x * t, v.y * t), ctrl)
            worst = max(worst, abs(n.value - d.value / t) / n.value)
            converged = converged and n.converged and d.converged
    return CriterionResult(1, "metric/norm consistency", bool(worst <= mpfr("1e-4")) and converged,
                           {"worst_relative_gap": worst, "converged": converged, "samples": samples})


def _facets_disjoint(facets) -> bool:
    """Angularly sorted facets must not overlap: each ends before the next begins."""
    ordered = sorted(facets, key=lambda f: P.angle_key(f.midpoint))
    n = len(ordered)
    for i, f in enumerate(ordered):
        g = ordered[(i + 1) % n]
        if not f.v_minus.cross(f.v_plus) > 0:
            return False
        # the gap from the end of f to the start of g is a positive turn inside the arc
        if not _strictly_between(f.v_minus, g.v_minus, f.v_plus):
            return False
        if not _strictly_between(f.v_plus, g.v_plus, g.v_minus):
            return False
    return True


def dual_convexity(bits=128, depth=12, facet_levels=3) -> CriterionResult:
    detail = {}
    ok = True
    for name, X in (("s11", modular_torus(bits)), ("s04", symmetric_sphere(bits))):
        sphere = dual_sphere(X, EnumerationControl(depth=depth), check=False)
        try:
            sphere.check_convex()
            convex = True
        except Exception:
            convex = False
        fs = [facet(X, s, EnumerationControl(depth=10)) for s in enumerate_slopes(facet_levels)]
        disjoint = _facets_disjoint(fs)
        detail[f"{name}_convex"] = convex
        detail[f"{name}_vertices"] = len(sphere)
        detail[f"{name}_facets_disjoint"] = disjoint
        ok = ok and convex and disjoint
    return CriterionResult(2, "dual convexity", ok, detail)


def facet_limit(bits=256, n_range=range(6, 13)) -> CriterionResult:
    X = modular_torus(max(bits, 256))
    report = facet_asymptotics(X, ZERO, INFINITY, n_range, fit_from=min(n_range))
    f = report.fitted
    return CriterionResult(3, "facet limit", report.passed, {
        "l_alpha": f["l_alpha"],
        "limit_at_n12": f["limit_at_last_n"],
        "limit_rel_err": abs(f["limit_at_last_n"] - f["l_alpha"]) / f["l_alpha"],
        "fit_slope": f["fit_slope"],
        "fit_rel_err": abs(f["fit_slope"] - float(f["l_alpha"])) / float(f["l_alpha"]),
        "all_converged": report.all_converged,
    })


def facet_bounds_check(bits=128, depth=10) -> CriterionResult:
    detail = {}
    ok = True
    for name, X in (("s11", modular_torus(bits)), ("s04", symmetric_sphere(bits))):
        r = facet_bounds(X, ctrl=EnumerationControl(depth=depth))
        detail[f"{name}_count"] = r.fitted["count"]
        detail[f"{name}_spread"] = r.fitted["spread"]
        ok = ok and r.passed
    return CriterionResult(4, "two-sided facet bounds", ok, detail)


def exponent_discriminator(bits=128, depth=10) -> CriterionResult:
    r = surface_discriminator(modular_torus(bits), symmetric_sphere(bits), EnumerationControl(depth=depth))
    return CriterionResult(5, "exponent discriminator", r.passed, dict(r.fitted))


def stretch_law(bits=128, times=("0.1", "0.3", "0.5"), others=20) -> CriterionResult:
    X = modular_torus(bits)
    alpha = INFINITY
    rest = [s for s in enumerate_slopes(5) if s != alpha][:others]
    worst = mpfr(0)
    min_margin = None
    current, elapsed = X, mpfr(0)
    with X.precision():
        base = {s: curve_length(X, s) for s in rest + [alpha]}
        for t in times:
            t = mpfr(t)
            # the stretch flow is a semigroup, so continue from the previous time
            current = integrate_stretch(current, alpha, "+", t - elapsed)
            elapsed = t
            et = gmpy2.exp(t)
            worst = max(worst, abs(curve_length(current, alpha) / base[alpha] / et - 1))
            for s in rest:
                margin = et - curve_length(current, s) / base[s]
                min_margin = margin if min_margin is None else min(min_margin, margin)
    ok = bool(worst <= mpfr("1e-6")) and min_margin is not None and min_margin > 0
    return CriterionResult(6, "stretch law", ok, {"worst_relative_error": worst, "min_margin_other_slopes": min_margin,
                                                   "other_slopes": len(rest)})


def _distinct_pairs(rng: random.Random, count: int):
    pairs = []
    for k in range(count):
        kind = S11 if k % 2 == 0 else S04
        a = (rng.uniform(1.0, 4.0), rng.uniform(-2.0, 2.0))
        b = (rng.uniform(1.0, 4.0), rng.uniform(-2.0, 2.0))
        pairs.append((kind, a, b))
    return pairs


def gamma_rigidity(bits=128, depth=12, seed=7, samples=20) -> CriterionResult:
    ctrl = EnumerationControl(depth=depth)
    rng = random.Random(seed)
    coincident = [modular_torus(bits), symmetric_sphere(bits), build_point(S11, "2.5", "0.3", bits),
                  build_point(S04, "3", "0.4", bits), build_point(S11, "1.2", "-0.7", bits)]
    same_worst = mpfr(0)
    pres_worst = mpfr(0)
    for X in coincident:
        d, r = gamma_linearity_defect(X, X, samples, ctrl, seed=seed)
        same_worst = max(same_worst, d)
        pres_worst = max(pres_worst, r.fitted["norm_preservation"])
    distinct_min = None
    for kind, a, b in _distinct_pairs(rng, 15):
        X = build_point(kind, repr(a[0]), repr(a[1]), bits)
        Y = build_point(kind, repr(b[0]), repr(b[1]), bits)
        d, r = gamma_linearity_defect(X, Y, samples, ctrl, seed=seed)
        distinct_min = d if distinct_min is None else min(distinct_min, d)
        pres_worst = max(pres_worst, r.fitted["norm_preservation"])
    ok = bool(same_worst <= mpfr("1e-10") and distinct_min > mpfr("1e-3") and pres_worst <= mpfr("1e-8"))
    return CriterionResult(7, "comparison-map rigidity probe", ok, {
        "coincident_max_defect": same_worst, "distinct_min_defect": distinct_min,
        "norm_preservation_worst": pres_worst})


def twist_asymptotics(bits=128, n=100) -> CriterionResult:
    detail = {}
    ok = True
    for name, X in (("s11", modular_torus(bits)), ("s04", symmetric_sphere(bits))):
        r = twist_length_ratio(X, ZERO, INFINITY, n)
        detail[f"{name}_ratio"] = r
        ok = ok and bool(abs(r - 1) <= mpfr("0.05"))
    return CriterionResult(8, "twist-length asymptotics", ok, detail)


def longest_facet(bits=128, depth=10, n_range=range(3, 9)) -> CriterionResult:
    detail = {}
    ok = True
    for kind in (S11, S04):
        X = build_point(kind, "8", "0.3", bits)
        r = longest_facet_correspondence(X, INFINITY, ZERO, n_range, EnumerationControl(depth=depth))
        margins = [row["margin"] for row in r.rows]
        detail[f"{kind.value}_min_margin"] = min(margins, key=lambda m: m if m is not None else -mpfr("inf"))
        detail[f"{kind.value}_failing_n"] = [row["n"] for row in r.rows if not row["longest"]]
        detail[f"{kind.value}_runner_up"] = [str(row["runner_up"]) for row in r.rows]
        ok = ok and r.passed
    return CriterionResult(9, "longest-facet correspondence", ok, detail)


def isometry_detection(bits=128, depth=10, seed=7, samples=16) -> CriterionResult:
    ctrl = EnumerationControl(depth=depth)
    worst = mpfr(0)
    matched = True
    for kind in (S11, S04):
        X = build_point(kind, "2.3", "0.45", bits)
        for g in MAPPING_CLASSES:
            Y = remark(X, g)
            res = isometry_check(mapping_class_differential(X, g), X, Y, samples, ctrl, seed=seed)
            worst = max(worst, res.max_defect)
            matched = matched and res.matching is not None and all(
                b == mapping_class_apply(g, a) for a, b in res.matching)
    X = build_point(S11, "2.3", "0.45", bits)
    bad = isometry_check(LinearMap2.diag("1.1", 1), X, X, samples, ctrl, seed=seed)
    ok = bool(worst <= mpfr("1e-6")) and matched and bool(bad.max_defect > mpfr("1e-2"))
    return CriterionResult(10, "isometry detection", ok, {
        "mapping_class_max_defect": worst, "matching_equals_action": matched,
        "non_isometry_defect": bad.max_defect})


def _random_class(rng: random.Random) -> MappingClass:
    g = MappingClass(1, 0, 0, 1)
    for _ in range(rng.randint(1, 6)):
        g = g @ rng.choice([MappingClass(1, 1, 0, 1), MappingClass(1, 0, 1, 1), MappingClass(0, -1, 1, 0),
                            MappingClass(0, 1, 1, 0)])
    return g


def _edges_by_brute_force(kind, depth) -> bool:
    graph = farey_graph(kind, depth)
    scale = kind.intersection_scale
    vs = graph.vertices
    expected = {
        (vs[i], vs[j])
        for i in range(len(vs))
        for j in range(i + 1, len(vs))
        if intersection_number(kind, vs[i], vs[j]) == scale
    }
    return expected == set(graph.edges)


def combinatorial_exactness(depth=10, seed=7, samples=300) -> CriterionResult:
    rng = random.Random(seed)
    slopes = enumerate_slopes(depth)
    group_law = conjugation = preserved = normal = True
    for kind in (S11, S04):
        for _ in range(samples):
            a, b = rng.choice(slopes), rng.choice(slopes)
            n, m = rng.randint(-20, 20), rng.randint(-20, 20)
            if dehn_twist(a, n, dehn_twist(a, m, b, kind), kind) != dehn_twist(a, n + m, b, kind):
                group_law = False
            if dehn_twist(a, 0, b, kind) != b:
                group_law = False
            if intersection_number(kind, a, dehn_twist(a, n, b, kind)) != intersection_number(kind, a, b):
                preserved = False
            g = _random_class(rng)
            lhs = mapping_class_apply(g, dehn_twist(a, n, b, kind))
            # an orientation-reversing g turns a left twist into a right one
            rhs = dehn_twist(mapping_class_apply(g, a), g.det * n, mapping_class_apply(g, b), kind)
            if lhs != rhs:
                conjugation = False
            k = rng.choice([-3, -2, 2, 5])
            s = normalize(k * b.p, k * b.q)
            if s != b or normalize(s.p, s.q) != s:
                normal = False
    connected = all(farey_graph(kind, d).is_connected() for kind in (S11, S04) for d in range(1, depth + 1))
    # mediant-adjacent slopes in the tree have determinant +-1
    adjacency = all(
        abs(node.slope.p * parent.q - node.slope.q * parent.p) == 1
        for node in iter_tree(depth)
        for parent in (node.upper, node.lower)
    )
    edges_match = all(_edges_by_brute_force(kind, depth) for kind in (S11, S04))
    ok = group_law and conjugation and preserved and normal and connected and adjacency and edges_match
    return CriterionResult(11, "combinatorial exactness", ok, {
        "twist_group_law": group_law, "conjugation": conjugation, "intersection_preserved": preserved,
        "normalize": normal, "farey_connected_1_to_depth": connected, "tree_adjacency": adjacency,
        "edges_equal_intersection_criterion": edges_match})


CRITERIA = {
    1: metric_norm_consistency,
    2: dual_convexity,
    3: facet_limit,
    4: facet_bounds_check,
    5: exponent_discriminator,
    6: stretch_law,
    7: gamma_rigidity,
    8: twist_asymptotics,
    9: longest_facet,
    10: isometry_detection,
    11: combinatorial_exactness,
}


def run_criterion(number: int, bits: int = 128, depth: int = 14, seed: int = 7) -> CriterionResult:
    """Run one criterion; ``bits`` raises the working precision, ``depth`` sets criterion 1's depth."""
    fn = CRITERIA[number]
    kw = {}
    code = fn.__code__.co_varnames[: fn.__code__.co_argcount]
    if "bits" in code:
        kw["bits"] = max(bits, 256) if number == 3 else bits
    if "seed" in code:
        kw["seed"] = seed
    if number == 1:
        kw["depth"] = depth
    start = time.perf_counter()
    try:
        res = fn(**kw)
    except Exception as exc:  # an exception is a FAIL with its reason recorded
        res = CriterionResult(number, fn.__name__.replace("_", " "), False,
                              {"error": type(exc).__name__, "message": str(exc)})
    res.seconds = time.perf_counter() - start
    return res


def run_all(bits: int = 128, depth: int = 14, seed: int = 7, only=None, echo=None) -> list[CriterionResult]:
    out = []
    for number in sorted(only or CRITERIA):
        res = run_criterion(number, bits, depth, seed)
        if echo:
            echo(res.line())
        out.append(res)
    return out
