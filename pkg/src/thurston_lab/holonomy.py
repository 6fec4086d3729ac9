"""Holonomy representations built from Fenchel-Nielsen coordinates.

A point is given by the length ``l`` of the base curve (slope 1/0) and a twist
``tau`` measured in hyperbolic length along it, so that shifting ``tau`` by
``l`` is a full Dehn twist about the base curve.

Torus generators: ``A`` translates along the base geodesic, ``B`` is the
Fenchel-Nielsen gluing of the complementary one-holed annulus.  Sphere
generators: two pairs of pants with two cusps and one boundary of length
``l`` each, glued along that boundary.  Slope traces on the sphere are
negative; everywhere below ``T`` denotes ``|tr|``.
"""

from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from . import precision as P
from .curves import (
    INFINITY,
    ZERO,
    MappingClass,
    S04,
    S11,
    Slope,
    SurfaceKind,
    curve_word,
    mapping_class_apply,
    normalize,
)
from .errors import HolonomyCorrupt, NonPositiveLength, PrecisionUnderflow
from .precision import Dual, PrecisionContext, working_precision

ONE_ONE = Slope(1, 1)
MINUS_ONE_ONE = Slope(-1, 1)

# Additive constant in the Farey edge relation T(u+l) + T(u-l) = T(u) T(l) - c.
EDGE_CONSTANT = {S11: 0, S04: 8}


def _torus_generators(l, tau):
    half = l / 2
    eh = P.exp(half)
    A = (eh, 0 * eh, 0 * eh, 1 / eh)
    a = P.coth(half)
    b = 1 / P.sinh(half)
    et = P.exp(tau / 2)
    B = (a * et, b / et, b * et, a / et)
    return [A, B]


def sphere_internal_twist(l, tau):
    """Offset making twist 0 the symmetric gluing (matches the torus at (l/2, tau))."""
    return tau + l / 2 + 2 * P.log(P.coth(l / 4))


def _sphere_generators(l, tau):
    lam = P.exp(l / 2)
    zero = 0 * lam
    alpha = (-lam, zero, zero, -1 / lam)
    k = P.coth(l / 4)
    c1 = (1 + k, 1 + zero, -k * k, 1 - k)
    c2 = P.mat_mul(P.mat_inv_sl2(c1), alpha)
    t = sphere_internal_twist(l, tau)
    e = P.exp(t / 2)
    # g = diag(1/e, e) * [[0, 1], [-1, 0]]
    g = (zero, 1 / e, -e, zero)
    g_inv = P.mat_inv_sl2(g)
    c3 = P.mat_mul(P.mat_mul(g, c1), g_inv)
    c4 = P.mat_mul(P.mat_mul(g, c2), g_inv)
    return [c1, c2, c3, c4]


def generators_for(kind: SurfaceKind, l, tau):
    return _torus_generators(l, tau) if kind is S11 else _sphere_generators(l, tau)


def evaluate_word(gens, letters):
    one = gens[0][0] * 0 + 1
    zero = one * 0
    m = (one, zero, zero, one)
    for x in letters:
        g = gens[x - 1] if x > 0 else P.mat_inv_sl2(gens[-x - 1])
        m = P.mat_mul(m, g)
    return m


def _length_from_trace(T):
    if T < 2:
        raise HolonomyCorrupt(f"trace magnitude {P.value(T)} < 2 for an essential curve")
    return 2 * P.acosh(T / 2)


@dataclass(frozen=True, eq=False)
class TeichPoint:
    kind: SurfaceKind
    fn_length: mpfr
    fn_twist: mpfr
    ctx: PrecisionContext
    generators: tuple = ()
    base_curve: Slope = INFINITY
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bits(self) -> int:
        return self.ctx.significand_bits

    @property
    def tol(self):
        return self.ctx.tol

    def __eq__(self, o):
        return (
            isinstance(o, TeichPoint)
            and self.kind is o.kind
            and self.bits == o.bits
            and self.fn_length == o.fn_length
            and self.fn_twist == o.fn_twist
        )

    def __hash__(self):
        return hash((self.kind, self.bits, str(self.fn_length), str(self.fn_twist)))

    def __repr__(self):
        return (
            f"TeichPoint({self.kind.value}, l={float(self.fn_length):.10g}, "
            f"tau={float(self.fn_twist):.10g}, bits={self.bits})"
        )

    def precision(self):
        return working_precision(self.bits)

    def shifted(self, dl, dtau) -> "TeichPoint":
        """The point at chart coordinates (l + dl, tau + dtau)."""
        with self.precision():
            return build_point(self.kind, self.fn_length + P.to_mpfr(dl), self.fn_twist + P.to_mpfr(dtau), self.ctx)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "l": P.to_decimal_string(self.fn_length, self.bits),
            "tau": P.to_decimal_string(self.fn_twist, self.bits),
            "bits": self.bits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "TeichPoint":
        ctx = PrecisionContext(int(data["bits"]))
        return build_point(SurfaceKind.parse(data["kind"]), data["l"], data["tau"], ctx)

    @classmethod
    def from_json(cls, text: str) -> "TeichPoint":
        return cls.from_dict(json.loads(text))


def build_point(kind, l, tau, ctx: PrecisionContext | int | None = None) -> TeichPoint:
    """Construct and validate a point; ``l`` and ``tau`` may be decimal strings."""
    kind = SurfaceKind.parse(kind)
    if ctx is None:
        ctx = PrecisionContext()
    elif isinstance(ctx, int):
        ctx = PrecisionContext(ctx)
    with working_precision(ctx.bits):
        lv = P.to_mpfr(l)
        tv = P.to_mpfr(tau)
        if not gmpy2.is_finite(lv) or not gmpy2.is_finite(tv):
            raise NonPositiveLength("Fenchel-Nielsen coordinates must be finite")
        if not lv > 0:
            raise NonPositiveLength(f"base length must be positive, got {lv}")
        gens = tuple(generators_for(kind, lv, tv))
        point = TeichPoint(kind, lv, tv, ctx, gens)
        _validate(point)
    return point


def _validate(X: TeichPoint):
    tol = X.tol
    gens = X.generators
    for g in gens:
        if abs(P.mat_det(g) - 1) > tol * max(1, max(abs(x) for x in g) ** 2):
            raise PrecisionUnderflow(f"generator determinant off by more than {tol}")
    if X.kind is S11:
        A, B = gens
        comm = evaluate_word(gens, (1, 2, -1, -2))
        scale = max(abs(x) for x in A + B) ** 4
        if abs(P.mat_trace(comm) + 2) > tol * scale:
            raise PrecisionUnderflow("commutator trace is not -2 within tolerance")
    else:
        prod = evaluate_word(gens[:3], (1, 2, 3))
        c4 = gens[3]
        # c1 c2 c3 c4 = I  <=>  c1 c2 c3 = c4^{-1}
        c4_inv = P.mat_inv_sl2(c4)
        scale = max(abs(x) for g in gens for x in g) ** 3
        if max(abs(a - b) for a, b in zip(prod, c4_inv)) > tol * scale:
            raise PrecisionUnderflow("peripheral product is not the identity within tolerance")
        for g in gens:
            if abs(abs(P.mat_trace(g)) - 2) > tol * max(abs(x) for x in g):
                raise PrecisionUnderflow("peripheral trace is not +-2 within tolerance")
    base = _length_from_trace(abs(P.mat_trace(evaluate_word(gens, curve_word(X.kind, INFINITY).letters))))
    if abs(base - X.fn_length) > tol * max(1, X.fn_length):
        raise PrecisionUnderflow("base curve length does not reproduce the coordinate")


def _dual_generators(X: TeichPoint):
    with X.precision():
        l = Dual.variable(X.fn_length, 0)
        t = Dual.variable(X.fn_twist, 1)
        return generators_for(X.kind, l, t)


def curve_trace(X: TeichPoint, s: Slope):
    """|trace| of the holonomy of the slope curve, from the explicit word."""
    with X.precision():
        word = curve_word(X.kind, s)
        return abs(P.mat_trace(evaluate_word(X.generators, word.letters)))


def curve_length(X: TeichPoint, s: Slope) -> mpfr:
    cache = X._cache.setdefault("length", {})
    if s in cache:
        return cache[s]
    with X.precision():
        value = _length_from_trace(curve_trace(X, s))
    cache[s] = value
    return value


def length_gradient(X: TeichPoint, s: Slope) -> P.Vec2:
    """(d l_s / d l, d l_s / d tau) by forward-mode differentiation through the holonomy."""
    with X.precision():
        gens = _dual_generators(X)
        tr = P.mat_trace(evaluate_word(gens, curve_word(X.kind, s).letters))
        length = _length_from_trace(abs(tr))
        return P.Vec2(length.a, length.b)


def log_length_gradient(X: TeichPoint, s: Slope) -> P.Vec2:
    with X.precision():
        return length_gradient(X, s) / curve_length(X, s)


# --- trace recursion over the Stern-Brocot tree ------------------------------------


def _base_traces(X: TeichPoint, gens):
    out = {}
    for s in (INFINITY, ZERO, ONE_ONE, MINUS_ONE_ONE):
        out[s] = abs(P.mat_trace(evaluate_word(gens, curve_word(X.kind, s).letters)))
    return out


@dataclass
class SlopeTable:
    """Traces (and optionally gradients) of every slope to a given depth.

    Entries are kept in tree order: the two roots, then breadth-first
    mediants.  ``levels[i]`` is the Stern-Brocot level of ``slopes[i]``.
    """

    point: TeichPoint
    depth: int
    slopes: list
    levels: list
    traces: list
    with_gradient: bool

    _lengths: list | None = None
    _index: dict | None = None

    def index(self, s: Slope) -> int:
        if self._index is None:
            self._index = {x: i for i, x in enumerate(self.slopes)}
        return self._index[s]

    def __contains__(self, s):
        if self._index is None:
            self.index(INFINITY)
        return s in self._index

    def lengths(self) -> list:
        if self._lengths is None:
            with self.point.precision():
                self._lengths = [_length_from_trace(t) for t in self.traces]
        return self._lengths

    def trace_values(self) -> list:
        return [P.value(t) for t in self.traces]

    def length_values(self) -> list:
        return [P.value(x) for x in self.lengths()]

    def log_gradients(self) -> list:
        """Covectors d log l_s in slope order (requires ``with_gradient``)."""
        if not self.with_gradient:
            raise ValueError("table was built without gradients")
        out = []
        with self.point.precision():
            for L in self.lengths():
                out.append(P.Vec2(L.a / L.v, L.b / L.v))
        return out

    def as_dict(self) -> dict:
        return {s: t for s, t in zip(self.slopes, self.trace_values())}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["slope", "trace", "length"])
        bits = self.point.bits
        for s, t, L in zip(self.slopes, self.trace_values(), self.length_values()):
            w.writerow([str(s), P.to_decimal_string(t, bits), P.to_decimal_string(L, bits)])
        return buf.getvalue()


def _table(X: TeichPoint, depth: int, with_gradient: bool) -> SlopeTable:
    with X.precision():
        gens = _dual_generators(X) if with_gradient else X.generators
        base = _base_traces(X, gens)
        c = EDGE_CONSTANT[X.kind]
        slopes = [INFINITY, ZERO]
        levels = [0, 0]
        traces = [base[INFINITY], base[ZERO]]
        queue = deque()
        # (upper, lower, T_upper, T_lower, T_(upper - lower), level)
        queue.append(((1, 0), (0, 1), base[INFINITY], base[ZERO], base[MINUS_ONE_ONE], 1))
        queue.append(((0, 1), (-1, 0), base[ZERO], base[INFINITY], base[ONE_ONE], 1))
        while queue:
            u, l, tu, tl, td, level = queue.popleft()
            if level > depth:
                continue
            m = (u[0] + l[0], u[1] + l[1])
            tm = tu * tl - c - td
            if not gmpy2.is_finite(P.value(tm)):
                raise PrecisionUnderflow(f"trace overflow at level {level}", n=level)
            slopes.append(normalize(*m))
            levels.append(level)
            traces.append(tm)
            queue.append((u, m, tu, tm, tl, level + 1))
            queue.append((m, l, tm, tl, tu, level + 1))
    return SlopeTable(X, depth, slopes, levels, traces, with_gradient)


def slope_table(X: TeichPoint, depth: int, with_gradient: bool = False) -> SlopeTable:
    """Cached recursion table; a deeper cached table is reused when available."""
    key = ("table", with_gradient)
    cached = X._cache.get(key)
    if cached is not None and cached.depth >= depth:
        if cached.depth == depth:
            return cached
        n = sum(1 for lv in cached.levels if lv <= depth)
        sub = SlopeTable(X, depth, cached.slopes[:n], cached.levels[:n], cached.traces[:n], with_gradient)
        if cached._lengths is not None:
            sub._lengths = cached._lengths[:n]
        return sub
    table = _table(X, depth, with_gradient)
    X._cache[key] = table
    return table


def trace_table(X: TeichPoint, depth: int) -> dict:
    """Map slope -> |trace| for every slope to the given Stern-Brocot depth."""
    return slope_table(X, depth).as_dict()


# --- re-marking by mapping classes --------------------------------------------------


def torus_coordinates_from_traces(l, t01, t11, tm11):
    """Recover (l, tau) of a torus from the traces of slopes 0/1, 1/1 and -1/1."""
    ratio = t01 / (2 * P.coth(l / 2))
    if ratio < 1:
        ratio = mpfr(1)
    tau = 2 * P.acosh(ratio)
    if t11 < tm11:
        tau = -tau
    return tau


def remark(X: TeichPoint, g: MappingClass) -> TeichPoint:
    """The point g.X, characterised by l_s(g.X) = l_{g^-1 s}(X) for every slope s."""
    g_inv = g.inverse()
    with X.precision():
        lengths = {s: curve_length(X, mapping_class_apply(g_inv, s)) for s in (INFINITY, ZERO, ONE_ONE, MINUS_ONE_ONE)}
        if X.kind is S11:
            l = lengths[INFINITY]
            T = {s: 2 * gmpy2.cosh(v / 2) for s, v in lengths.items()}
            tau = torus_coordinates_from_traces(l, T[ZERO], T[ONE_ONE], T[MINUS_ONE_ONE])
        else:
            # the sphere at (l, tau) has twice the torus lengths at (l/2, tau)
            l = lengths[INFINITY]
            T = {s: 2 * gmpy2.cosh(v / 4) for s, v in lengths.items()}
            tau = torus_coordinates_from_traces(l / 2, T[ZERO], T[ONE_ONE], T[MINUS_ONE_ONE])
        return build_point(X.kind, l, tau, X.ctx)


# --- named points --------------------------------------------------------------------


def modular_torus(ctx: PrecisionContext | int | None = None) -> TeichPoint:
    """Torus whose slopes 1/0, 0/1 and 1/1 all have trace 3."""
    if ctx is None:
        ctx = PrecisionContext()
    elif isinstance(ctx, int):
        ctx = PrecisionContext(ctx)
    with working_precision(ctx.bits):
        l = 2 * gmpy2.acosh(mpfr(3) / 2)
        return build_point(S11, l, -l / 2, ctx)


def symmetric_sphere(ctx: PrecisionContext | int | None = None) -> TeichPoint:
    """Four-punctured sphere whose slope lengths are twice those of the modular torus."""
    if ctx is None:
        ctx = PrecisionContext()
    elif isinstance(ctx, int):
        ctx = PrecisionContext(ctx)
    with working_precision(ctx.bits):
        l = 2 * gmpy2.acosh(mpfr(3) / 2)
        return build_point(S04, 2 * l, -l / 2, ctx)


# --- twist families -------------------------------------------------------------------


def family_member(alpha: Slope, gamma: Slope, m: int) -> Slope:
    return normalize(gamma.p + m * alpha.p, gamma.q + m * alpha.q)


def family_minimum(X: TeichPoint, alpha: Slope, gamma: Slope) -> int:
    """Offset m at which gamma + m*alpha is shortest.

    Traces along the family are convex in m; seeding the Farey recursion at
    the minimum keeps it free of cancellation in both directions.
    """
    with X.precision():
        m = 0
        t = curve_trace(X, gamma)
        for step in (1, -1):
            moved = False
            while True:
                tn = curve_trace(X, family_member(alpha, gamma, m + step))
                if tn < t:
                    m, t, moved = m + step, tn, True
                else:
                    break
            if moved:
                break
        return m


def family_traces(X: TeichPoint, alpha: Slope, gamma: Slope, lo: int, hi: int, gens=None) -> dict:
    """|tr| of gamma + m*alpha for lo <= m <= hi, keyed by m (requires det = +-1).

    Pass Dual generators as ``gens`` to carry gradients.  Uses
    T(m+1) = T(alpha) T(m) - c - T(m-1), run outward from the shortest member.
    """
    with X.precision():
        if gens is None:
            gens = X.generators
        c = EDGE_CONSTANT[X.kind]

        def word_trace(s):
            return abs(P.mat_trace(evaluate_word(gens, curve_word(X.kind, s).letters)))

        m0 = family_minimum(X, alpha, gamma)
        m0 = min(max(m0, lo), hi)
        ta = word_trace(alpha)
        out = {m0: word_trace(family_member(alpha, gamma, m0))}
        for step in (1, -1):
            if not (lo <= m0 + step <= hi):
                continue
            prev, cur = out[m0], word_trace(family_member(alpha, gamma, m0 + step))
            m = m0 + step
            out[m] = cur
            while lo <= m + step <= hi:
                prev, cur = cur, ta * cur - c - prev
                m += step
                if not gmpy2.is_finite(P.value(cur)):
                    raise PrecisionUnderflow("trace overflow along the twist family", n=m)
                out[m] = cur
        return out
