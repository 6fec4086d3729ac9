"""Experiment drivers: comparison map, facet asymptotics, isometry detection.

Each driver returns an :class:`ExperimentReport` holding its parameters,
per-sample rows, fitted constants and a verdict per declared check.  All
sampling goes through ``random.Random(seed)`` so reports are reproducible.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import random
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import precision as P
from .curves import (
    EnumerationControl,
    INFINITY,
    MappingClass,
    S04,
    S11,
    Slope,
    SurfaceKind,
    dehn_twist,
    det,
    enumerate_slopes,
    intersection_number,
    mapping_class_apply,
    normalize,
)
from .errors import (
    DepthInsufficient,
    EmptyFacet,
    PrecisionUnderflow,
    SingularMap,
    SurfaceMismatch,
    Unresolved,
    ZeroCovector,
)
from .geometry import (
    DualSphere,
    Facet,
    _control,
    _strictly_between,
    dual_sphere,
    facet,
    facets_in_arc,
    longest_facet,
    slopes_between,
    thurston_norm,
)
from .holonomy import (
    EDGE_CONSTANT,
    TeichPoint,
    _length_from_trace,
    build_point,
    curve_length,
    curve_trace,
    family_member,
    family_traces,
    remark,
)
from .precision import Vec2, working_precision


def _fmt(x, bits=None):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Slope):
        return str(x)
    if isinstance(x, Vec2):
        return [_fmt(x.x, bits), _fmt(x.y, bits)]
    if isinstance(x, TeichPoint):
        return x.to_dict()
    if isinstance(x, (list, tuple)):
        return [_fmt(v, bits) for v in x]
    if isinstance(x, dict):
        return {str(k): _fmt(v, bits) for k, v in x.items()}
    if isinstance(x, np.floating):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return P.to_decimal_string(x, bits)


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    fitted: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    seed: int | None = None
    bits: int = P.DEFAULT_BITS
    depth: int | None = None

    @property
    def all_converged(self) -> bool:
        return all(r.get("converged", True) for r in self.rows)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and self.all_converged and all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "header": {
                "experiment": self.experiment,
                "seed": self.seed,
                "bits": self.bits,
                "depth": self.depth,
                "parameters": _fmt(self.parameters, self.bits),
            },
            "rows": [_fmt(r, self.bits) for r in self.rows],
            "fitted": _fmt(self.fitted, self.bits),
            "verdict": {
                "checks": {k: ("PASS" if v else "FAIL") for k, v in self.verdicts.items()},
                "all_converged": self.all_converged,
                "result": "PASS" if self.passed else "FAIL",
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        d = self.to_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for k, v in d["header"].items():
            w.writerow(["#", k, json.dumps(v)])
        if d["rows"]:
            keys = list(d["rows"][0].keys())
            w.writerow(keys)
            for r in d["rows"]:
                w.writerow([json.dumps(r.get(k)) if isinstance(r.get(k), (list, dict)) else r.get(k) for k in keys])
        for k, v in d["fitted"].items():
            w.writerow(["#fitted", k, json.dumps(v)])
        for k, v in d["verdict"]["checks"].items():
            w.writerow(["#verdict", k, v])
        w.writerow(["#verdict", "result", d["verdict"]["result"]])
        return buf.getvalue()


# --- linear maps ------------------------------------------------------------------


@dataclass(frozen=True)
class LinearMap2:
    """2x2 real matrix ((a, b), (c, d)) acting on tangent vectors."""

    a: object
    b: object
    c: object
    d: object

    @classmethod
    def identity(cls) -> "LinearMap2":
        return cls(mpfr(1), mpfr(0), mpfr(0), mpfr(1))

    @classmethod
    def diag(cls, x, y) -> "LinearMap2":
        return cls(P.to_mpfr(x), mpfr(0), mpfr(0), P.to_mpfr(y))

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, v: Vec2) -> Vec2:
        return Vec2(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def dual(self, w: Vec2) -> Vec2:
        """Pull-back of a covector: w o Phi."""
        return Vec2(self.a * w.x + self.c * w.y, self.b * w.x + self.d * w.y)

    def inverse(self) -> "LinearMap2":
        k = self.det
        return LinearMap2(self.d / k, -self.b / k, -self.c / k, self.a / k)


# --- Gamma map ----------------------------------------------------------------------


@dataclass
class _SpherePair:
    x: DualSphere
    y: DualSphere
    angles: np.ndarray


def _sphere_cache(X: TeichPoint, depth: int) -> DualSphere:
    key = ("sphere", depth)
    if key not in X._cache:
        X._cache[key] = dual_sphere(X, EnumerationControl(depth=depth))
    return X._cache[key]


def _angles(sphere: DualSphere) -> np.ndarray:
    key = ("sphere_angles", sphere.depth)
    cache = sphere.point._cache
    if key not in cache:
        ang = np.array([math.atan2(float(c.y), float(c.x)) for c in sphere.covectors])
        cache[key] = np.unwrap(ang)
    return cache[key]


def locate_edge(sphere: DualSphere, w: Vec2) -> tuple[int, object, object]:
    """Index i and weights (a, b) with w = a*c_i + b*c_{i+1}, a, b >= 0."""
    c = sphere.covectors
    n = len(c)
    ang = _angles(sphere)
    target = math.atan2(float(w.y), float(w.x))
    base = ang[0]
    t = base + ((target - base) % (2 * math.pi))
    i0 = bisect.bisect_right(ang.tolist(), t) - 1
    for k in [0, -1, 1, -2, 2, -3, 3] + list(range(4, n)):
        i = (i0 + k) % n
        a, b = c[i], c[(i + 1) % n]
        if a.cross(w) >= 0 and w.cross(b) > 0:
            dd = a.cross(b)
            return i, w.cross(b) / dd, a.cross(w) / dd
    raise DepthInsufficient("ray does not meet the dual polygon")


def dual_norm(sphere: DualSphere, w: Vec2):
    """Gauge of w with respect to the dual polygon (norm of a covector)."""
    _, a, b = locate_edge(sphere, w)
    return a + b


def dual_norm_primal(sphere: DualSphere, w: Vec2):
    """Same norm evaluated as max of w over the primal unit-ball vertices."""
    key = ("primal", sphere.depth)
    cache = sphere.point._cache
    if key not in cache:
        verts = sphere.primal_vertices()
        cache[key] = (verts, np.array([v.as_floats() for v in verts]))
    verts, fl = cache[key]
    scores = fl @ np.array([float(w.x), float(w.y)])
    top = scores.max()
    idx = np.nonzero(scores >= top - 1e-9 * abs(top) - 1e-12)[0]
    return max(verts[int(i)].dot(w) for i in idx)


def gamma_map(X: TeichPoint, Y: TeichPoint, w: Vec2, ctrl=None) -> Vec2:
    """Image of the covector w under the norm-preserving comparison map X -> Y.

    On the ray through a slope vertex it sends d log l_s at X to d log l_s at
    Y; between adjacent vertices it interpolates along the polygon edge.
    """
    if X.kind is not Y.kind:
        raise SurfaceMismatch("comparison map needs two points on one surface")
    ctrl = _control(ctrl)
    with working_precision(max(X.bits, Y.bits)):
        w = Vec2(P.to_mpfr(w[0]), P.to_mpfr(w[1]))
        if w.is_zero():
            raise ZeroCovector("comparison map is undefined at 0")
        sx = _sphere_cache(X, ctrl.depth)
        sy = _sphere_cache(Y, ctrl.depth)
        if sx.slopes != sy.slopes:
            raise DepthInsufficient("dual polygons at X and Y are not combinatorially matched")
        i, a, b = locate_edge(sx, w)
        n = len(sy.covectors)
        return sy.covectors[i] * a + sy.covectors[(i + 1) % n] * b


def _random_covector(rng: random.Random):
    ang = rng.uniform(0, 2 * math.pi)
    r = rng.uniform(0.5, 2.0)
    return Vec2(mpfr(r) * gmpy2.cos(mpfr(ang)), mpfr(r) * gmpy2.sin(mpfr(ang)))


def gamma_linearity_defect(X: TeichPoint, Y: TeichPoint, sample_count: int = 20, ctrl=None,
                           seed: int = 7, scale=1) -> tuple[object, ExperimentReport]:
    """max ||G(w1+w2) - G(w1) - G(w2)||*_Y / (||w1||*_X + ||w2||*_X) over seeded pairs."""
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    ctrl = _control(ctrl)
    rng = random.Random(seed)
    bits = max(X.bits, Y.bits)
    report = ExperimentReport("gamma-linearity", {"X": X, "Y": Y, "samples": sample_count}, seed=seed,
                              bits=bits, depth=ctrl.depth)
    with working_precision(bits):
        sx = _sphere_cache(X, ctrl.depth)
        sy = _sphere_cache(Y, ctrl.depth)
        scale = P.to_mpfr(scale)
        worst = mpfr(0)
        worst_norm = mpfr(0)
        for k in range(sample_count):
            w1 = _random_covector(rng) * scale
            w2 = _random_covector(rng) * scale
            g1 = gamma_map(X, Y, w1, ctrl)
            g2 = gamma_map(X, Y, w2, ctrl)
            g12 = gamma_map(X, Y, w1 + w2, ctrl)
            diff = g12 - g1 - g2
            n1, n2 = dual_norm(sx, w1), dual_norm(sx, w2)
            dn = mpfr(0) if diff.is_zero() else dual_norm(sy, diff)
            defect = dn / (n1 + n2)
            # norm preservation, checked against the primal-vertex evaluation
            pres = max(
                abs(dual_norm_primal(sy, g) - dual_norm_primal(sx, w)) / dual_norm_primal(sx, w)
                for g, w in ((g1, w1), (g2, w2), (g12, w1 + w2))
            )
            worst = max(worst, defect)
            worst_norm = max(worst_norm, pres)
            report.rows.append({"sample": k, "defect": defect, "norm_preservation": pres, "converged": True})
        report.fitted = {"defect": worst, "norm_preservation": worst_norm}
    return worst, report


# --- facet asymptotics -------------------------------------------------------------------


def decay_rate(kind: SurfaceKind) -> float:
    return 1.0 if kind is S11 else 0.5


def facet_asymptotics(X: TeichPoint, alpha: Slope, beta: Slope, n_range, ctrl=None,
                      limit_tol: float = 0.10, slope_tol: float = 0.05, fit_from: int | None = None,
                      **facet_kw) -> ExperimentReport:
    """Facet lengths along the twist family beta_n = D^n_alpha beta."""
    ctrl = _control(ctrl)
    need = X.kind.intersection_scale
    if intersection_number(X.kind, alpha, beta) != need:
        raise ValueError(f"need i(alpha, beta) = {need} on {X.kind.value}")
    ns = list(n_range)
    rate = decay_rate(X.kind)
    report = ExperimentReport("facet-asymptotics", {"X": X, "alpha": alpha, "beta": beta, "n": ns},
                              bits=X.bits, depth=ctrl.depth)
    with X.precision():
        la = curve_length(X, alpha)
        for n in ns:
            bn = dehn_twist(alpha, n, beta, X.kind)
            try:
                f = facet(X, bn, ctrl, **facet_kw)
            except EmptyFacet as exc:
                raise PrecisionUnderflow(f"facet of beta_{n} lost at {X.bits} bits: {exc}", n=n) from exc
            if not f.length > 0:
                raise PrecisionUnderflow(f"facet of beta_{n} has no resolvable length", n=n)
            L = f.l_alpha
            logF = abs(gmpy2.log(f.length))
            report.rows.append({
                "n": n,
                "beta_n": bn,
                "l_beta_n": L,
                "facet_length": f.length,
                "limit": logF / abs(n) if n else None,
                "ratio": f.length / (L * L * gmpy2.exp(-rate * L)),
                "converged": f.converged,
            })
        ratios = [r["ratio"] for r in report.rows]
        fit_rows = [r for r in report.rows if r["n"] and (fit_from is None or abs(r["n"]) >= fit_from)]
        xs = np.array([abs(r["n"]) for r in fit_rows], dtype=float)
        ys = np.array([float(abs(gmpy2.log(r["facet_length"]))) for r in fit_rows])
        fit_slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else float("nan")
        limits = [r["limit"] for r in report.rows if r["limit"] is not None]
        n0 = None
        for k in range(len(limits)):
            tail = limits[k:]
            if all(tail[j] < tail[j + 1] for j in range(len(tail) - 1)) or all(
                tail[j] > tail[j + 1] for j in range(len(tail) - 1)
            ):
                n0 = report.rows[k]["n"]
                break
        last = report.rows[-1]
        report.fitted = {
            "l_alpha": la,
            "ratio_min": min(ratios),
            "ratio_max": max(ratios),
            "ratio_spread": max(ratios) / min(ratios),
            "C_empirical": gmpy2.sqrt(max(ratios) / min(ratios)),
            "limit_at_last_n": last["limit"],
            "fit_slope": fit_slope,
            "monotone_from_n": n0,
        }
        report.verdicts = {
            "limit_within_tol": bool(last["limit"] is not None and abs(last["limit"] - la) <= limit_tol * la),
            "fit_slope_within_tol": bool(abs(fit_slope - float(la)) <= slope_tol * float(la)),
        }
    return report


def facet_bounds(X: TeichPoint, slopes=None, length_range=(3, 20), min_count: int = 30,
                 max_spread: float = 10.0, ctrl=None, **facet_kw) -> ExperimentReport:
    """Spread of |F| / (l^2 e^(-rate*l)) over slopes with l in ``length_range``."""
    ctrl = _control(ctrl)
    rate = decay_rate(X.kind)
    lo, hi = length_range
    report = ExperimentReport("facet-bounds", {"X": X, "length_range": list(length_range)},
                              bits=X.bits, depth=ctrl.depth)
    with X.precision():
        if slopes is None:
            slopes = []
            d = 4
            while len(slopes) < min_count and d <= 12:
                slopes = [s for s in enumerate_slopes(d) if lo <= curve_length(X, s) <= hi]
                d += 1
        for s in slopes:
            f = facet(X, s, ctrl, **facet_kw)
            L = f.l_alpha
            report.rows.append({
                "slope": s,
                "l_alpha": L,
                "facet_length": f.length,
                "ratio": f.length / (L * L * gmpy2.exp(-rate * L)),
                "converged": f.converged,
            })
        ratios = [r["ratio"] for r in report.rows]
        spread = max(ratios) / min(ratios) if ratios else mpfr("inf")
        report.fitted = {"ratio_min": min(ratios), "ratio_max": max(ratios), "spread": spread,
                         "C_empirical": gmpy2.sqrt(spread), "count": len(ratios)}
        report.verdicts = {"count": len(ratios) >= min_count, "spread": bool(spread <= max_spread)}
    return report


# --- longest facet ------------------------------------------------------------------------


def longest_facet_correspondence(X: TeichPoint, alpha: Slope, beta: Slope, n_window, ctrl=None,
                                 arc_levels: int = 5, **facet_kw) -> ExperimentReport:
    """Is F(beta_n) the longest facet in the gap between F(beta_{n-1}) and F(alpha)?

    For n > 0 the gap has endpoints v(beta_{n-1}^-) and v(alpha^+); for
    n < 0 it has endpoints v(beta_{n+1}^+) and v(alpha^-).  Candidates are
    all slopes in the Farey interval between the two bounding slopes.
    """
    ctrl = _control(ctrl)
    ns = list(n_window)
    report = ExperimentReport("longest-facet", {"X": X, "alpha": alpha, "beta": beta, "n": ns,
                                                "arc_levels": arc_levels}, bits=X.bits, depth=ctrl.depth)
    with X.precision():
        fa = facet(X, alpha, ctrl, **facet_kw)
        tol = X.tol
        for n in ns:
            step = 1 if n > 0 else -1
            prev = dehn_twist(alpha, n - step, beta, X.kind)
            bn = dehn_twist(alpha, n, beta, X.kind)
            fp = facet(X, prev, ctrl, **facet_kw)
            if n > 0:
                start, end = fa.v_plus, fp.v_minus
            else:
                start, end = fp.v_plus, fa.v_minus
            cands = slopes_between(prev, alpha, arc_levels, containing=bn)
            found = facets_in_arc(X, start, end, ctrl, candidates=cands, **facet_kw)
            target = next((f for f in found if f.slope == bn), None)
            others = [f for f in found if f.slope != bn]
            best_other = longest_facet(others)
            if target is None:
                margin = None
                ok = False
            else:
                margin = (target.length - best_other.length) / target.length if best_other else mpfr(1)
                if best_other is not None and abs(target.length - best_other.length) <= tol * target.length:
                    raise Unresolved(f"facets of {bn} and {best_other.slope} tie within tolerance")
                ok = margin > 0
            report.rows.append({
                "n": n,
                "beta_n": bn,
                "arc": [str(prev), str(alpha)],
                "arc_endpoints": [start, end],
                "in_arc": target is not None,
                "facet_length": target.length if target else None,
                "runner_up": best_other.slope if best_other else None,
                "runner_up_length": best_other.length if best_other else None,
                "margin": margin,
                "facets_in_arc": len(found),
                "longest": ok,
                "converged": all(f.converged for f in found) and fp.converged and fa.converged,
            })
        margins = [r["margin"] for r in report.rows if r["margin"] is not None]
        report.fitted = {"l_alpha": fa.l_alpha, "min_margin": min(margins) if margins else None}
        report.verdicts = {"longest_for_every_n": all(r["longest"] for r in report.rows)}
    return report


# --- twist length ratio --------------------------------------------------------------------


def family_trace(X: TeichPoint, alpha: Slope, beta: Slope, k: int):
    """|tr| of beta + k*alpha, by the Farey recursion along the twist family when det = +-1."""
    if abs(det(alpha, beta)) != 1:
        return curve_trace(X, family_member(alpha, beta, k))
    return family_traces(X, alpha, beta, min(k, 0), max(k, 0))[k]


def twist_length_ratio(X: TeichPoint, alpha: Slope, beta: Slope, n: int):
    """l(D^n_alpha beta) / (|n| l_alpha i(alpha, beta))."""
    if alpha == beta:
        raise ValueError("alpha and beta must differ")
    if n == 0:
        raise ValueError("n must be nonzero")
    with X.precision():
        # D^n beta = beta + n*m*det(alpha, beta)*alpha
        k = n * X.kind.twist_multiplier * det(alpha, beta)
        t = family_trace(X, alpha, beta, k)
        L = _length_from_trace(t)
        return L / (abs(n) * curve_length(X, alpha) * intersection_number(X.kind, alpha, beta))


# --- surface discriminator ------------------------------------------------------------------


def fitted_exponent(report: ExperimentReport) -> tuple[float, float]:
    """Slopes of log(|F|/l^2) and of raw log|F| against l over the report rows."""
    ls = np.array([float(r["l_alpha"]) for r in report.rows])
    fs = np.array([float(gmpy2.log(r["facet_length"])) for r in report.rows])
    exp = float(np.polyfit(ls, fs - 2 * np.log(ls), 1)[0])
    raw = float(np.polyfit(ls, fs, 1)[0])
    return exp, raw


def surface_discriminator(X11: TeichPoint, X04: TeichPoint, ctrl=None, length_range=(3, 20),
                          tol: float = 0.10, min_gap: float = 0.3, **facet_kw) -> ExperimentReport:
    """Decay exponents of facet length against curve length on each surface."""
    if X11.kind is not S11 or X04.kind is not S04:
        raise SurfaceMismatch("discriminator expects a torus point and a sphere point")
    ctrl = _control(ctrl)
    r11 = facet_bounds(X11, length_range=length_range, ctrl=ctrl, **facet_kw)
    r04 = facet_bounds(X04, length_range=length_range, ctrl=ctrl, **facet_kw)
    e11, raw11 = fitted_exponent(r11)
    e04, raw04 = fitted_exponent(r04)
    report = ExperimentReport("discriminator", {"X11": X11, "X04": X04, "length_range": list(length_range)},
                              bits=max(X11.bits, X04.bits), depth=ctrl.depth)
    for surf, r in (("s11", r11), ("s04", r04)):
        for row in r.rows:
            report.rows.append({"surface": surf, **row})
    gap = abs(e11 - e04)
    report.fitted = {"exponent_s11": e11, "exponent_s04": e04, "gap": gap,
                     "raw_log_slope_s11": raw11, "raw_log_slope_s04": raw04}
    report.verdicts = {
        "s11_exponent": abs(e11 + 1.0) <= tol * 1.0,
        "s04_exponent": abs(e04 + 0.5) <= tol * 0.5,
        "gap": gap > min_gap,
    }
    return report


# --- isometry check ---------------------------------------------------------------------------


def mapping_class_differential(X: TeichPoint, g: MappingClass, h=None) -> LinearMap2:
    """Central-difference Jacobian of the chart map X' -> g.X' at X."""
    with X.precision():
        h = P.to_mpfr(h) if h is not None else gmpy2.exp2(-(X.bits // 4))
        cols = []
        for dl, dt in ((h, 0), (0, h)):
            yp = remark(X.shifted(dl, dt), g)
            ym = remark(X.shifted(-dl if dl else 0, -dt if dt else 0), g)
            cols.append(((yp.fn_length - ym.fn_length) / (2 * h), (yp.fn_twist - ym.fn_twist) / (2 * h)))
        return LinearMap2(cols[0][0], cols[1][0], cols[0][1], cols[1][1])


@dataclass
class IsometryResult:
    max_defect: object
    matching: list | None
    report: ExperimentReport

    def __iter__(self):
        yield self.max_defect
        yield self.matching


def isometry_check(phi: LinearMap2, X: TeichPoint, Y: TeichPoint, sample_count: int = 32, ctrl=None,
                   seed: int = 7, match_depth: int = 3, defect_tol: float = 1e-6, **facet_kw) -> IsometryResult:
    """Does phi carry the unit sphere at X onto the unit sphere at Y?

    When the sampled defect is within ``defect_tol`` the facets of X at
    ``match_depth`` are pushed forward and matched to facets of Y.
    """
    if X.kind is not Y.kind:
        raise SurfaceMismatch("isometry candidates compare points on one surface")
    ctrl = _control(ctrl)
    bits = max(X.bits, Y.bits)
    rng = random.Random(seed)
    report = ExperimentReport("isometry-check", {"X": X, "Y": Y, "phi": [phi.a, phi.b, phi.c, phi.d],
                                                 "samples": sample_count}, seed=seed, bits=bits, depth=ctrl.depth)
    with working_precision(bits):
        if abs(phi.det) <= X.tol:
            raise SingularMap("candidate map is not invertible")
        worst = mpfr(0)
        for k in range(sample_count):
            ang = mpfr(2 * math.pi * (k + rng.random()) / sample_count)
            v = Vec2(gmpy2.cos(ang), gmpy2.sin(ang))
            nv = thurston_norm(X, v, ctrl)
            u = v / nv.value
            nu = thurston_norm(Y, phi(u), ctrl)
            d = abs(nu.value - 1)
            worst = max(worst, d)
            report.rows.append({"sample": k, "defect": d, "converged": nv.converged and nu.converged})
        matching = None
        if worst <= defect_tol:
            matching = []
            shallow = EnumerationControl(depth=max(ctrl.depth, 1), stall_levels=ctrl.stall_levels, rel_tol=ctrl.rel_tol)
            for s in enumerate_slopes(match_depth):
                f = facet(X, s, shallow, **facet_kw)
                mid = phi(f.midpoint)
                w = thurston_norm(Y, mid, ctrl).witness
                fy = facet(Y, w, shallow, **facet_kw)
                ends_ok = all(
                    abs(fy.covector.dot(phi(v)) - 1) <= mpfr(defect_tol) for v in (f.v_minus, f.v_plus)
                )
                matching.append((s, w if ends_ok else "Unmatched"))
        report.fitted = {"max_defect": worst}
        if matching is not None:
            report.fitted["matching"] = [[str(a), str(b)] for a, b in matching]
    return IsometryResult(worst, matching, report)


def matching_preserves_adjacency(kind, matching) -> bool:
    pairs = {a: b for a, b in matching if isinstance(b, Slope)}
    scale = SurfaceKind.parse(kind).intersection_scale
    keys = list(pairs)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            adj = intersection_number(kind, a, b) == scale
            if adj != (intersection_number(kind, pairs[a], pairs[b]) == scale):
                return False
    return True
