"""Thurston metric and norm, the dual sphere, facets and stretch lines.

Sups over measured laminations are maxima over enumerated slopes.  Candidate
maximisers are located with a float64 pass and then re-evaluated exactly at
the point's precision, so reported values are exact maxima over the finite
slope set.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import precision as P
from .curves import (
    EnumerationControl,
    S04,
    S11,
    Slope,
    SurfaceKind,
    det,
    enumerate_slopes,
    normalize,
    sort_circular,
)
from .errors import (
    ConvexityViolation,
    DepthInsufficient,
    EmptyFacet,
    IntegrationStall,
    SurfaceMismatch,
    ZeroVector,
)
from .holonomy import (
    EDGE_CONSTANT,
    TeichPoint,
    _dual_generators,
    _length_from_trace,
    build_point,
    curve_length,
    curve_word,
    evaluate_word,
    family_member,
    family_minimum,
    family_traces,
    log_length_gradient,
    slope_table,
)
from .precision import Vec2, working_precision

PARALLEL_ANGLE = 2.0 ** -40
MAX_BITS = 4096


def _control(ctrl) -> EnumerationControl:
    if ctrl is None:
        return EnumerationControl()
    if isinstance(ctrl, int):
        return EnumerationControl(depth=ctrl)
    return ctrl


# --- cached per-point data -------------------------------------------------------


@dataclass
class CovectorData:
    slopes: list
    levels: np.ndarray
    cov: list  # exact Vec2 of d log l
    fx: np.ndarray
    fy: np.ndarray


def covector_data(X: TeichPoint, depth: int) -> CovectorData:
    key = ("covectors", depth)
    if key in X._cache:
        return X._cache[key]
    table = slope_table(X, depth, with_gradient=True)
    cov = table.log_gradients()
    data = CovectorData(
        table.slopes,
        np.array(table.levels),
        cov,
        np.array([float(c.x) for c in cov]),
        np.array([float(c.y) for c in cov]),
    )
    X._cache[key] = data
    return data


def _length_data(X: TeichPoint, depth: int):
    key = ("lengths", depth)
    if key not in X._cache:
        table = slope_table(X, depth)
        exact = table.length_values()
        X._cache[key] = (table.slopes, np.array(table.levels), exact, np.array([float(v) for v in exact]))
    return X._cache[key]


def _stalled_max(scores: np.ndarray, levels: np.ndarray, exact, ctrl: EnumerationControl):
    """Exact maximum over each depth d in the stall window, from float scores.

    Returns (value, index, converged) at the full depth.  ``exact(i)``
    re-evaluates entry i at working precision.
    """
    depth = ctrl.depth
    values = []
    best_idx = None
    first = max(0, depth - ctrl.stall_levels)
    for d in range(first, depth + 1):
        mask = levels <= d
        sub = np.where(mask, scores, -np.inf)
        fmax = sub.max()
        margin = 1e-9 * abs(fmax) + 1e-12
        cand = np.nonzero(sub >= fmax - margin)[0]
        best = None
        for i in cand:
            val = exact(int(i))
            if best is None or val > best[0]:
                best = (val, int(i))
        values.append(best[0])
        best_idx = best[1]
    final = values[-1]
    converged = depth >= ctrl.stall_levels and all(
        abs(final - v) <= ctrl.rel_tol * max(abs(final), mpfr("1e-300")) for v in values
    )
    if final == 0 and all(v == 0 for v in values):
        converged = depth >= ctrl.stall_levels
    return final, best_idx, converged


@dataclass(frozen=True)
class SupResult:
    value: mpfr
    witness: Slope
    converged: bool
    depth: int
    bits: int

    def __iter__(self):
        yield self.value
        yield self.witness
        yield self.converged

    def to_dict(self) -> dict:
        return {
            "value": P.to_decimal_string(self.value, self.bits),
            "witness": str(self.witness),
            "converged": self.converged,
            "depth": self.depth,
            "bits": self.bits,
        }


def _check_same(X: TeichPoint, Y: TeichPoint):
    if X.kind is not Y.kind:
        raise SurfaceMismatch(f"points live on different surfaces ({X.kind.value} vs {Y.kind.value})")


def thurston_distance(X: TeichPoint, Y: TeichPoint, ctrl=None) -> SupResult:
    """log of the largest length ratio l(Y)/l(X) over enumerated slopes."""
    _check_same(X, Y)
    ctrl = _control(ctrl)
    bits = max(X.bits, Y.bits)
    with working_precision(bits):
        slopes, levels, lx, fx = _length_data(X, ctrl.depth)
        _, _, ly, fy = _length_data(Y, ctrl.depth)
        scores = fy / fx

        def exact(i):
            return ly[i] / lx[i]

        ratio, idx, conv = _stalled_max(scores, levels, exact, ctrl)
        return SupResult(gmpy2.log(ratio), slopes[idx], conv, ctrl.depth, bits)


def thurston_norm(X: TeichPoint, v, ctrl=None) -> SupResult:
    """max over enumerated slopes of d log l_s (v)."""
    ctrl = _control(ctrl)
    with X.precision():
        v = Vec2(P.to_mpfr(v[0]), P.to_mpfr(v[1]))
        if v.is_zero():
            raise ZeroVector("the norm is only evaluated on nonzero vectors")
        data = covector_data(X, ctrl.depth)
        scores = data.fx * float(v.x) + data.fy * float(v.y)

        def exact(i):
            return data.cov[i].dot(v)

        value, idx, conv = _stalled_max(scores, data.levels, exact, ctrl)
        return SupResult(value, data.slopes[idx], conv, ctrl.depth, X.bits)


def norm_value(X: TeichPoint, v, depth: int):
    return thurston_norm(X, v, EnumerationControl(depth=depth)).value


# --- dual sphere --------------------------------------------------------------------


@dataclass
class DualSphere:
    point: TeichPoint
    depth: int
    slopes: list
    covectors: list

    def __len__(self):
        return len(self.slopes)

    def index(self, s: Slope) -> int:
        return self.slopes.index(s)

    def check_convex(self, tol=None) -> None:
        """Raise ConvexityViolation unless angles increase and every turn is left."""
        with self.point.precision():
            tol = mpfr(tol) if tol is not None else mpfr(2) ** -(2 * self.point.bits // 3)
            c = self.covectors
            n = len(c)
            for i in range(n):
                a, b, d = c[i], c[(i + 1) % n], c[(i + 2) % n]
                if a.cross(b) <= 0:
                    raise ConvexityViolation(f"angular order breaks between {self.slopes[i]} and {self.slopes[(i + 1) % n]}")
                turn = (b - a).cross(d - b)
                if turn < -tol * (b - a).norm2() * (d - b).norm2():
                    raise ConvexityViolation(f"dual polygon turns right at {self.slopes[(i + 1) % n]}")

    def primal_vertices(self) -> list:
        """Vertices of the approximate unit ball: meets of consecutive dual lines."""
        out = []
        with self.point.precision():
            c = self.covectors
            n = len(c)
            for i in range(n):
                a, b = c[i], c[(i + 1) % n]
                d = a.cross(b)
                out.append(Vec2((b.y - a.y) / d, (a.x - b.x) / d))
        return out

    def to_dict(self) -> dict:
        bits = self.point.bits
        return {
            "depth": self.depth,
            "vertices": [
                {"slope": str(s), "cov": [P.to_decimal_string(c.x, bits), P.to_decimal_string(c.y, bits)]}
                for s, c in zip(self.slopes, self.covectors)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_svg(self, primal: bool = False, label_depth: int = 3, highlight=()) -> str:
        """Dual polygon, or with ``primal`` the unit ball whose edge i carries slope i."""
        from .svg import polygon_svg

        shallow = dict(zip(*_level_map(self.point, self.depth)))
        labels = {i: str(s) for i, s in enumerate(self.slopes) if shallow.get(s, label_depth + 1) <= label_depth}
        marked = [self.index(s) for s in highlight]
        title = f"{self.point.kind.value} depth {self.depth}"
        if primal:
            # primal vertex i is the meet of dual lines i and i+1, so edge (i-1, i) lies on line i
            pts = [v.as_floats() for v in self.primal_vertices()]
            return polygon_svg(pts, labels, [(i - 1) % len(pts) for i in marked], title, label_edges=True)
        pts = [c.as_floats() for c in self.covectors]
        return polygon_svg(pts, labels, [], title)


def _level_map(X: TeichPoint, depth: int):
    table = slope_table(X, depth)
    return table.slopes, table.levels


def dual_sphere(X: TeichPoint, ctrl=None, check: bool = True) -> DualSphere:
    """Covectors d log l_s of all enumerated slopes, ordered counterclockwise.

    The order is the circular order of slopes (reversed when that runs
    clockwise); convexity is then verified exactly.
    """
    ctrl = _control(ctrl)
    with X.precision():
        data = covector_data(X, ctrl.depth)
        pos = {s: i for i, s in enumerate(data.slopes)}
        order = sort_circular(data.slopes)
        covs = [data.cov[pos[s]] for s in order]
        area = sum(covs[i].cross(covs[(i + 1) % len(covs)]) for i in range(len(covs)))
        if area < 0:
            order.reverse()
            covs.reverse()
        sphere = DualSphere(X, ctrl.depth, order, covs)
        if check:
            sphere.check_convex()
        return sphere


def slope_orientation(X: TeichPoint) -> int:
    """+1 when increasing circular slope order runs counterclockwise on the dual sphere."""
    key = ("orientation",)
    if key not in X._cache:
        with X.precision():
            c = [log_length_gradient(X, s) for s in (Slope(1, 0), Slope(-1, 1), Slope(0, 1), Slope(1, 1))]
            area = sum(c[i].cross(c[(i + 1) % 4]) for i in range(4))
        X._cache[key] = 1 if area > 0 else -1
    return X._cache[key]


# --- facets -------------------------------------------------------------------------


def complementary_slope(alpha: Slope) -> Slope:
    """A slope gamma with det(alpha, gamma) = 1."""
    p, q = alpha.p, alpha.q
    # extended Euclid: x p + y q = 1 -> det((p, q), (-y, x)) = p x + q y = 1
    x, y = _bezout(p, q)
    return normalize(-y, x) if (p * x + q * y) == 1 else normalize(y, -x)


def _bezout(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def _dual_trace(gens, kind, s: Slope):
    return abs(P.mat_trace(evaluate_word(gens, curve_word(kind, s).letters)))


def twist_family_covectors(X: TeichPoint, alpha: Slope, window: int, gens=None):
    """Covectors of gamma + m*alpha for |m| <= window around the shortest member, keyed by offset."""
    with X.precision():
        if gens is None:
            gens = _dual_generators(X)
        gamma = complementary_slope(alpha)
        center = family_minimum(X, alpha, gamma)
        gamma = family_member(alpha, gamma, center)
        traces = family_traces(X, alpha, gamma, -window, window, gens)
        out = {}
        for m, t in traces.items():
            L = _length_from_trace(t)
            out[m] = (family_member(alpha, gamma, m), Vec2(L.a / L.v, L.b / L.v))
        return out


@dataclass(frozen=True)
class Facet:
    slope: Slope
    v_minus: Vec2
    v_plus: Vec2
    length: mpfr
    reverse_length: mpfr
    converged: bool
    l_alpha: mpfr
    covector: Vec2
    depth: int
    bits: int
    window: int

    @property
    def midpoint(self) -> Vec2:
        return (self.v_minus + self.v_plus) / 2

    def endpoint(self, sign) -> Vec2:
        return self.v_plus if _sign(sign) > 0 else self.v_minus

    def row(self) -> dict:
        return {
            "slope": str(self.slope),
            "l_alpha": P.to_decimal_string(self.l_alpha, self.bits),
            "facet_length": P.to_decimal_string(self.length, self.bits),
            "converged": self.converged,
        }


def _sign(sign) -> int:
    if sign in (1, "+", "plus", "+1"):
        return 1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def _clip(c_alpha: Vec2, constraints, tol):
    """Clip the line <c_alpha, v> = 1 by <c, v> <= 1; returns (s_lo, s_hi, lo_c, hi_c).

    The line is p0 + s*d with p0 = c_alpha / |c_alpha|^2 and d the
    counterclockwise perpendicular of c_alpha.
    """
    n2 = c_alpha.dot(c_alpha)
    p0 = c_alpha / n2
    d = c_alpha.perp()
    lo, hi = None, None
    lo_c, hi_c = None, None
    for c in constraints:
        a = c.dot(p0)
        b = c.dot(d)
        if b > 0:
            s = (1 - a) / b
            if hi is None or s < hi:
                hi, hi_c = s, c
        elif b < 0:
            s = (1 - a) / b
            if lo is None or s > lo:
                lo, lo_c = s, c
        elif a > 1 + tol:
            raise EmptyFacet("a parallel constraint excludes the whole line")
    return p0, d, lo, hi, lo_c, hi_c


def _angle(a: Vec2, b: Vec2):
    return abs(a.cross(b)) / (a.norm2() * b.norm2())


def default_window(X: TeichPoint, alpha: Slope) -> int:
    """Twist-family size that reaches working precision.

    Consecutive family covectors approach d log l_alpha like e^(-m l_alpha / i),
    with i the intersection of Farey neighbours (2 on the sphere).
    """
    la = float(curve_length(X, alpha)) / X.kind.intersection_scale
    return int(math.ceil(X.bits * math.log(2) / max(la, 1e-3))) + 4


def facet(X: TeichPoint, alpha: Slope, ctrl=None, global_depth: int | None = None,
          window: int | None = None, norm_depth: int | None = None) -> Facet:
    """The facet of the unit tangent sphere carried by ``alpha``.

    The line <d log l_alpha, v> = 1 is clipped by the twist family
    gamma + m*alpha (whose covectors accumulate on d log l_alpha from both
    sides, so they fix the endpoints) and by every slope of the global
    enumeration at ``global_depth`` (default: ctrl.depth).
    """
    ctrl = _control(ctrl)
    depth = ctrl.depth if global_depth is None else global_depth
    with X.precision():
        tol = X.tol
        gens = _dual_generators(X)
        L = _length_from_trace(_dual_trace(gens, X.kind, alpha))
        c_alpha = Vec2(L.a / L.v, L.b / L.v)
        if window is None:
            window = default_window(X, alpha)
        family = twist_family_covectors(X, alpha, window, gens)

        # nested clips over growing windows give the stall history
        history = []
        for w in range(1, window + 1):
            cons = [family[m][1] for m in (w, -w) if m in family]
            if history:
                p0, d, lo0, hi0 = history[-1][:4]
                _, _, lo, hi, _, _ = _clip(c_alpha, cons, tol)
                lo = lo0 if lo is None or (lo0 is not None and lo0 > lo) else lo
                hi = hi0 if hi is None or (hi0 is not None and hi0 < hi) else hi
            else:
                cons = [family[m][1] for m in family if abs(m) <= 1]
                p0, d, lo, hi, _, _ = _clip(c_alpha, cons, tol)
            history.append((p0, d, lo, hi))
        p0, d, lo, hi = history[-1]
        if lo is None or hi is None:
            raise EmptyFacet(f"facet of {alpha} is unbounded; twist family too small")

        # global enumeration: only constraints that could bind are evaluated exactly
        data = covector_data(X, depth) if depth > 0 else None
        if data is not None:
            a = data.fx * float(p0.x) + data.fy * float(p0.y)
            b = data.fx * float(d.x) + data.fy * float(d.y)
            slack = 1e-9 * (abs(float(hi)) + abs(float(lo))) + 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                s = (1 - a) / b
            up = (b > 0) & (s < float(hi) + slack)
            down = (b < 0) & (s > float(lo) - slack)
            idx = [i for i in np.nonzero(up | down)[0] if data.slopes[i] != alpha]
            if idx:
                _, _, glo, ghi, _, _ = _clip(c_alpha, [data.cov[i] for i in idx], tol)
                if ghi is not None and ghi < hi:
                    hi = ghi
                if glo is not None and glo > lo:
                    lo = glo
        # Conditioning guard: the binding lines meet the facet line at a small
        # angle, so rounding in (1 - a)/b is amplified by 1/angle.  Escalate
        # when nearly parallel or when that amplified error is not negligible.
        angle = min(_angle(c_alpha, family[m][1]) for m in (window, -window))
        err = gmpy2.exp2(-X.bits) * p0.norm2() / angle
        ill = hi > lo and (angle < PARALLEL_ANGLE or err > ctrl.rel_tol * (hi - lo) * d.norm2())
        if not hi > lo or ill:
            if X.bits * 2 <= MAX_BITS:
                return facet_escalated(X, alpha, ctrl, extra_bits=X.bits, global_depth=global_depth,
                                       norm_depth=norm_depth)
            if not hi > lo:
                raise EmptyFacet(f"facet of {alpha} came out empty at {X.bits} bits")

        length_scale = hi - lo
        moves = []
        for k in range(1, ctrl.stall_levels + 1):
            if len(history) <= k:
                moves.append(mpfr("inf"))
                continue
            _, _, plo, phi = history[-1 - k]
            moves.append(max(abs(lo - (plo if plo is not None else lo)), abs(hi - (phi if phi is not None else hi))))
        converged = all(mv <= ctrl.rel_tol * length_scale for mv in moves)

        v_minus = p0 + d * lo
        v_plus = p0 + d * hi
        nd = norm_depth if norm_depth is not None else min(depth, 10)
        nctrl = EnumerationControl(depth=max(nd, 1))
        fwd = thurston_norm(X, d, nctrl).value * length_scale
        back = thurston_norm(X, -d, nctrl).value * length_scale
        return Facet(alpha, v_minus, v_plus, fwd, back, converged, L.v, c_alpha, depth, X.bits, window)


def _escalated_point(X: TeichPoint, bits: int) -> TeichPoint:
    key = ("escalated", bits)
    if key not in X._cache:
        X._cache[key] = build_point(X.kind, X.fn_length, X.fn_twist, bits)
    return X._cache[key]


def facet_escalated(X: TeichPoint, alpha: Slope, ctrl=None, extra_bits: int = 64, **kw) -> Facet:
    """Facet recomputed at ``X.bits + extra_bits``; values keep the higher precision."""
    return facet(_escalated_point(X, X.bits + extra_bits), alpha, ctrl, **kw)


def stretch_vector(X: TeichPoint, alpha: Slope, sign, ctrl=None, **kw) -> Vec2:
    f = facet(X, alpha, ctrl, **kw)
    if not f.converged:
        raise DepthInsufficient(f"facet of {alpha} did not converge")
    return f.endpoint(sign)


def facets_csv(facets) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slope", "l_alpha", "facet_length", "converged"])
    for f in facets:
        r = f.row()
        w.writerow([r["slope"], r["l_alpha"], r["facet_length"], str(r["converged"]).lower()])
    return buf.getvalue()


# --- stretch lines ----------------------------------------------------------------------


STRETCH_GLOBAL_DEPTH = 6


def _stretch_field(kind, bits, alpha, sign, ctrl, l, tau):
    Y = build_point(kind, l, tau, bits)
    f = facet(Y, alpha, ctrl, global_depth=min(ctrl.depth, STRETCH_GLOBAL_DEPTH), norm_depth=1)
    if not f.converged:
        raise IntegrationStall(f"facet of {alpha} failed to converge at l={float(l):.6g}, tau={float(tau):.6g}")
    return f.endpoint(sign)


def integrate_stretch(X: TeichPoint, alpha: Slope, sign, t, steps: int = 8, ctrl=None,
                      tol: float = 1e-12, max_halvings: int = 12) -> TeichPoint:
    """Follow the unit field Y -> v_Y(alpha+-) for time t with adaptive RK4.

    ``steps`` sets the initial step t/steps; each step is accepted when one
    full step and two half steps agree within ``tol``, otherwise halved.
    """
    ctrl = _control(ctrl)
    with X.precision():
        t = P.to_mpfr(t)
        if t < 0:
            raise ValueError("stretch time must be nonnegative")
        if t == 0:
            return X
        sgn = _sign(sign)

        def field_at(y):
            return _stretch_field(X.kind, X.bits, alpha, sgn, ctrl, y.x, y.y)

        def rk4(y, h):
            k1 = field_at(y)
            k2 = field_at(y + k1 * (h / 2))
            k3 = field_at(y + k2 * (h / 2))
            k4 = field_at(y + k3 * h)
            return y + (k1 + k2 * 2 + k3 * 2 + k4) * (h / 6)

        y = Vec2(X.fn_length, X.fn_twist)
        elapsed = mpfr(0)
        h = t / max(1, steps)
        halvings = 0
        while elapsed < t:
            h = min(h, t - elapsed)
            full = rk4(y, h)
            half = rk4(rk4(y, h / 2), h / 2)
            err = (full - half).norm2()
            if err <= tol * max(1, y.norm2()):
                # Richardson-extrapolated fifth-order update
                y = half + (half - full) / 15
                elapsed += h
                if err < tol / 64:
                    h *= 2
            else:
                h /= 2
                halvings += 1
                if halvings > max_halvings * max(1, steps):
                    raise IntegrationStall("step size collapsed while integrating the stretch line")
        return build_point(X.kind, y.x, y.y, X.ctx)


def delta_twist(l, t, bits: int | None = None):
    """4 e^t log((e^l + 1)/(e^(l/2) - 1)) - 4 log((e^(e^t l) + 1)/(e^(e^t l / 2) - 1))."""
    with working_precision(bits or max(P.current_bits(), 128)):
        l = P.to_mpfr(l)
        t = P.to_mpfr(t)
        if not l > 0:
            raise ValueError("l must be positive")
        et = gmpy2.exp(t)
        el = et * l

        def term(x):
            return gmpy2.log((gmpy2.exp(x) + 1) / (gmpy2.exp(x / 2) - 1))

        return 4 * et * term(l) - 4 * term(el)


# --- facets in an arc -------------------------------------------------------------------


def _strictly_between(a: Vec2, b: Vec2, v: Vec2) -> bool:
    """Is v strictly inside the counterclockwise open arc from a to b?"""
    ab = a.cross(b)
    av = a.cross(v)
    vb = v.cross(b)
    if ab > 0:
        return av > 0 and vb > 0
    # reflex or straight arc: inside unless in the complementary convex sector
    return not (v.cross(a) >= 0 and b.cross(v) >= 0)


def slopes_between(a: Slope, b: Slope, levels: int, containing: Slope | None = None) -> list:
    """Slopes inside a Farey interval with endpoints a, b, to ``levels`` mediant levels.

    Two intervals share these endpoints; the one whose first mediant is
    a + b is taken unless ``containing`` lies in the other one.
    """
    if abs(det(a, b)) != 1:
        raise ValueError(f"{a} and {b} are not Farey neighbours")
    u, l = (a.p, a.q), (b.p, b.q)
    if containing is not None:
        # containing = x*u + y*l up to sign; same-sign coefficients mean it is inside
        dd = det(a, b)
        x = (containing.p * l[1] - containing.q * l[0]) * dd
        y = (u[0] * containing.q - u[1] * containing.p) * dd
        if x * y < 0:
            l = (-l[0], -l[1])
    out = []
    frontier = [(u, l)]
    for _ in range(levels):
        nxt = []
        for u, l in frontier:
            m = (u[0] + l[0], u[1] + l[1])
            out.append(normalize(*m))
            nxt.append((u, m))
            nxt.append((m, l))
        frontier = nxt
    return out


def facets_in_arc(X: TeichPoint, start: Vec2, end: Vec2, ctrl=None, candidates=None,
                  arc_levels: int = 6, **facet_kw) -> list:
    """Converged facets lying in the open counterclockwise arc from ``start`` to ``end``.

    ``candidates`` defaults to the slopes enumerated at ``arc_levels``; the
    result is sorted counterclockwise from ``start``.
    """
    ctrl = _control(ctrl)
    with X.precision():
        if start.is_zero() or end.is_zero():
            raise ZeroVector("arc endpoints must be nonzero")
        if candidates is None:
            candidates = enumerate_slopes(min(arc_levels, ctrl.depth))
        found = []
        for s in candidates:
            f = facet(X, s, ctrl, **facet_kw)
            if not f.converged:
                continue
            with working_precision(max(f.bits, X.bits)):
                if _strictly_between(start, end, f.v_minus) and _strictly_between(start, end, f.v_plus):
                    found.append(f)

        def ccw_key(f):
            v = f.midpoint
            ang = math.atan2(float(start.cross(v)), float(start.dot(v)))
            return (ang if ang >= 0 else ang + 2 * math.pi, f.slope.lex_key())

        found.sort(key=ccw_key)
        return found


def longest_facet(facets):
    """Longest facet; ties broken by slope lexicographic order."""
    if not facets:
        return None
    return max(facets, key=lambda f: (f.length, tuple(-x for x in f.slope.lex_key())))
