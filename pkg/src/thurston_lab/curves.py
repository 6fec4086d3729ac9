"""Exact integer combinatorics of simple closed curves on S(1,1) and S(0,4).

Essential simple closed curves on both surfaces are classified by slopes
``p/q`` in Q u {inf}.  Everything here is integer arithmetic on Python ints,
so twist iterates never overflow.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import ZeroSlopeInput


class SurfaceKind(enum.Enum):
    ONCE_PUNCTURED_TORUS = "s11"
    FOUR_PUNCTURED_SPHERE = "s04"

    @classmethod
    def parse(cls, tag) -> "SurfaceKind":
        if isinstance(tag, cls):
            return tag
        t = str(tag).strip().lower().replace(",", "").replace("_", "")
        if t in ("s11", "torus", "oncepuncturedtorus"):
            return cls.ONCE_PUNCTURED_TORUS
        if t in ("s04", "sphere", "fourpuncturedsphere"):
            return cls.FOUR_PUNCTURED_SPHERE
        raise ValueError(f"unknown surface kind {tag!r}")

    @property
    def intersection_scale(self) -> int:
        """Geometric intersection of two Farey neighbours."""
        return 1 if self is SurfaceKind.ONCE_PUNCTURED_TORUS else 2

    @property
    def twist_multiplier(self) -> int:
        # A full Dehn twist on S(0,4) acts on slopes as the square of the
        # parabolic that a half-twist induces.
        return 1 if self is SurfaceKind.ONCE_PUNCTURED_TORUS else 2


S11 = SurfaceKind.ONCE_PUNCTURED_TORUS
S04 = SurfaceKind.FOUR_PUNCTURED_SPHERE


@dataclass(frozen=True)
class Slope:
    """A primitive class (p, q); build through :func:`normalize` or :meth:`parse`."""

    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 and self.q == 0:
            raise ZeroSlopeInput("slope (0, 0) does not represent a curve")
        if math.gcd(self.p, self.q) != 1 or self.q < 0 or (self.q == 0 and self.p != 1):
            raise ValueError(f"({self.p}, {self.q}) is not in canonical form; use normalize()")

    def __str__(self):
        return f"{self.p}/{self.q}"

    def __iter__(self):
        yield self.p
        yield self.q

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    def circular_key(self):
        """Sort key for circular order on R u {inf}: inf first, then p/q ascending."""
        if self.q == 0:
            return (0, Fraction(0))
        return (1, Fraction(self.p, self.q))

    def lex_key(self):
        return (self.p, self.q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        t = str(text).strip()
        if t in ("inf", "oo", "infinity"):
            return INFINITY
        for sep in ("/", ","):
            if sep in t:
                a, b = t.split(sep, 1)
                return normalize(int(a.strip().strip("()")), int(b.strip().strip("()")))
        return normalize(int(t), 1)


def normalize(p: int, q: int) -> Slope:
    p, q = int(p), int(q)
    if p == 0 and q == 0:
        raise ZeroSlopeInput("slope (0, 0) does not represent a curve")
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


INFINITY = Slope(1, 0)
ZERO = Slope(0, 1)


def det(a: Slope, b: Slope) -> int:
    return a.p * b.q - a.q * b.p


def intersection_number(kind: SurfaceKind, a: Slope, b: Slope) -> int:
    return SurfaceKind.parse(kind).intersection_scale * abs(det(a, b))


# --- Stern-Brocot enumeration -------------------------------------------------


@dataclass(frozen=True)
class EnumerationControl:
    """How far to enumerate slopes and when to call a sup converged.

    ``depth`` counts Stern-Brocot levels; when ``max_denominator`` is set it
    replaces the depth bound by ``|p|, |q| <= max_denominator``.
    """

    depth: int = 14
    stall_levels: int = 3
    rel_tol: float = 1e-12
    max_denominator: int | None = None

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.stall_levels < 1:
            raise ValueError("stall_levels must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_denominator is not None and self.max_denominator < 1:
            raise ValueError("max_denominator must be >= 1")

    def with_depth(self, depth: int) -> "EnumerationControl":
        return EnumerationControl(depth, self.stall_levels, self.rel_tol, self.max_denominator)


@dataclass(frozen=True)
class TreeNode:
    """A Stern-Brocot node: the slope is the mediant of ``upper`` and ``lower``.

    ``upper`` is the parent nearer to inf in circular order on each half
    line; ``level`` is 1 for the two mediants of the roots.
    """

    slope: Slope
    upper: Slope
    lower: Slope
    level: int
    path: str  # "R" moves toward upper, "L" toward lower


def _vec_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def iter_tree(depth: int) -> Iterator[TreeNode]:
    """Breadth-first walk over both half trees down to ``depth`` levels.

    The positive half starts from parents (1,0), (0,1); the negative half from
    (0,1), (-1,0).  Yields mediants only, not the two roots.
    """
    queue = deque()
    queue.append(((1, 0), (0, 1), 1, ""))
    queue.append(((0, 1), (-1, 0), 1, ""))
    while queue:
        u, l, level, path = queue.popleft()
        if level > depth:
            continue
        m = _vec_add(u, l)
        yield TreeNode(normalize(*m), normalize(*u), normalize(*l), level, path)
        queue.append((u, m, level + 1, path + "R"))
        queue.append((m, l, level + 1, path + "L"))


def enumerate_slopes(control=14) -> list[Slope]:
    """All canonical slopes within the bound, in circular order starting at inf.

    ``control`` may be an int depth or an :class:`EnumerationControl`.
    """
    if isinstance(control, int):
        control = EnumerationControl(depth=control)
    if control.max_denominator is not None:
        n = control.max_denominator
        found = {INFINITY}
        for q in range(1, n + 1):
            for p in range(-n, n + 1):
                if math.gcd(p, q) == 1:
                    found.add(Slope(p, q))
        return sort_circular(found)
    found = {INFINITY, ZERO}
    found.update(node.slope for node in iter_tree(control.depth))
    return sort_circular(found)


def sort_circular(slopes: Iterable[Slope]) -> list[Slope]:
    return sorted(slopes, key=lambda s: s.circular_key())


def slope_level(s: Slope) -> int:
    """Stern-Brocot level at which ``s`` first appears (roots are level 0)."""
    if s.q == 0 or s.p == 0:
        return 0
    # sum of the continued fraction partial quotients of |p|/q
    a, b = abs(s.p), s.q
    total = 0
    while b:
        total += a // b
        a, b = b, a % b
    return total


def stern_brocot_path(s: Slope) -> tuple[int, str]:
    """Return (half, path) with half = +1/-1 and the R/L moves from the root mediant.

    Following ``path`` from the root pair of that half lands on ``s`` as a
    mediant.  Roots (inf and 0) raise ValueError.
    """
    if s.q == 0 or s.p == 0:
        raise ValueError(f"{s} is a root of the tree")
    half = 1 if s.p > 0 else -1
    if half > 0:
        u, l = (1, 0), (0, 1)
    else:
        u, l = (0, 1), (-1, 0)
    target = (s.p, s.q)
    moves = []
    while True:
        m = _vec_add(u, l)
        if m == target:
            return half, "".join(moves)
        # compare target with mediant: target > m (as fractions) means toward upper
        if target[0] * m[1] > m[0] * target[1]:
            moves.append("R")
            l = m
        else:
            moves.append("L")
            u = m


# --- mapping classes and Dehn twists ----------------------------------------


@dataclass(frozen=True)
class MappingClass:
    """Integer matrix ((a, b), (c, d)) with det +-1, acting on slopes projectively."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) != 1:
            raise ValueError("mapping class matrix must have determinant +-1")

    @classmethod
    def from_rows(cls, rows) -> "MappingClass":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> "MappingClass":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    def __matmul__(self, o: "MappingClass") -> "MappingClass":
        return MappingClass(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "MappingClass":
        k = self.det
        return MappingClass(k * self.d, -k * self.b, -k * self.c, k * self.a)

    def canonical(self) -> tuple[int, int, int, int]:
        """Representative of the class up to sign, for equality tests."""
        t = (self.a, self.b, self.c, self.d)
        first = next(x for x in t if x != 0)
        return t if first > 0 else tuple(-x for x in t)

    def same_class(self, o: "MappingClass") -> bool:
        return self.canonical() == o.canonical()

    def __call__(self, s: Slope) -> Slope:
        return mapping_class_apply(self, s)


def mapping_class_apply(g: MappingClass, s: Slope) -> Slope:
    return normalize(g.a * s.p + g.b * s.q, g.c * s.p + g.d * s.q)


def twist_matrix(axis: Slope, n: int, kind=S11) -> MappingClass:
    """Matrix I + n*m*K(axis), where m = 1 on S(1,1) and 2 on S(0,4)."""
    k = n * SurfaceKind.parse(kind).twist_multiplier
    a, b = axis.p, axis.q
    return MappingClass(1 - k * a * b, k * a * a, -k * b * b, 1 + k * a * b)


def dehn_twist(axis: Slope, n: int, target: Slope, kind=S11) -> Slope:
    return mapping_class_apply(twist_matrix(axis, n, kind), target)


R_MOVE = MappingClass(1, 1, 0, 1)
L_MOVE = MappingClass(1, 0, 1, 1)
ROTATION = MappingClass(0, -1, 1, 0)


# --- curve words --------------------------------------------------------------


@dataclass(frozen=True)
class CurveWord:
    """Cyclically reduced word in the free generators of pi_1.

    Letters are signed generator indices: on S(1,1) 1 = A, 2 = B; on S(0,4)
    1, 2, 3 are three of the four peripheral loops, the fourth being the
    inverse of their product.  Negative index means inverse.
    """

    kind: SurfaceKind
    letters: tuple[int, ...]

    _SYMBOLS = {
        S11: {1: "A", 2: "B", -1: "a", -2: "b"},
        S04: {1: "P", 2: "Q", 3: "R", -1: "p", -2: "q", -3: "r"},
    }

    def __str__(self):
        table = self._SYMBOLS[self.kind]
        return "".join(table[x] for x in self.letters)

    def __len__(self):
        return len(self.letters)

    def cyclic_permutations(self) -> Iterator["CurveWord"]:
        for i in range(len(self.letters)):
            yield CurveWord(self.kind, self.letters[i:] + self.letters[:i])


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    w = list(free_reduce(letters))
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i : j + 1])


def invert_word(letters) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


def substitute(letters, images: dict[int, tuple[int, ...]]) -> tuple[int, ...]:
    """Apply the free-group endomorphism generator -> image."""
    out: list[int] = []
    for x in letters:
        img = images[x] if x > 0 else invert_word(images[-x])
        out.extend(img)
    return free_reduce(out)


def _torus_word(s: Slope) -> tuple[int, ...]:
    if s.q == 0:
        return (1,)
    if s.p == 0:
        return (2,)
    # positive-half Christoffel word for (|p|, q): mediant = upper + lower
    _, path = stern_brocot_path(Slope(abs(s.p), s.q))
    u, l = (1,), (2,)
    for move in path:
        m = u + l
        if move == "R":
            l = m
        else:
            u = m
    word = u + l
    if s.p < 0:
        word = tuple(-x if abs(x) == 1 else x for x in word)
    return word


# Braid automorphisms of <c1, c2, c3> realising the slope moves on S(0,4).
# sigma1 <-> R = [[1,1],[0,1]];  sigma2^{-1} <-> L = [[1,0],[1,1]].
SIGMA1 = {1: (1, 2, -1), 2: (1,), 3: (3,)}
SIGMA1_INV = {1: (2,), 2: (-2, 1, 2), 3: (3,)}
SIGMA2_INV = {1: (1,), 2: (3,), 3: (-3, 2, 3)}
SIGMA2 = {1: (1,), 2: (2, 3, -2), 3: (2,)}

S04_BASE_WORDS = {
    INFINITY: (1, 2),
    ZERO: (2, 3),
    Slope(1, 1): (1, 3),
    Slope(-1, 1): (-2, 1, 2, 3),
}


def s04_move_automorphisms(s: Slope) -> list[dict[int, tuple[int, ...]]]:
    """Braid automorphisms, outermost first, carrying the word of slope (1,1) to ``s``.

    The product of their slope matrices, in the same order, maps (1,1) to s.
    """
    half, path = stern_brocot_path(s)
    autos = [] if half > 0 else [SIGMA1_INV, SIGMA2_INV, SIGMA1_INV]
    autos.extend(SIGMA1 if move == "R" else SIGMA2_INV for move in path)
    return autos


def _sphere_word(s: Slope) -> tuple[int, ...]:
    if s in S04_BASE_WORDS:
        return S04_BASE_WORDS[s]
    word = S04_BASE_WORDS[Slope(1, 1)]
    # phi_1 o phi_2 o ... o phi_k applied to the word: innermost first
    for auto in reversed(s04_move_automorphisms(s)):
        word = substitute(word, auto)
    return cyclic_reduce(word)


def curve_word(kind, s: Slope) -> CurveWord:
    kind = SurfaceKind.parse(kind)
    letters = _torus_word(s) if kind is S11 else _sphere_word(s)
    return CurveWord(kind, cyclic_reduce(letters))


# --- Farey graph ----------------------------------------------------------------


@dataclass
class FareyGraph:
    kind: SurfaceKind
    vertices: list[Slope]
    edges: list[tuple[Slope, Slope]] = field(default_factory=list)

    def adjacency(self) -> dict[Slope, set[Slope]]:
        adj: dict[Slope, set[Slope]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        seen = {self.vertices[0]}
        queue = deque([self.vertices[0]])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    def to_dict(self) -> dict:
        return {
            "vertices": [str(v) for v in self.vertices],
            "edges": [[str(a), str(b)] for a, b in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def farey_graph(kind, depth: int) -> FareyGraph:
    """Farey graph on the slopes of ``enumerate_slopes(depth)``.

    Within the Stern-Brocot tree, Farey neighbours are exactly the
    (mediant, parent) pairs, so edges come from the tree walk.
    """
    kind = SurfaceKind.parse(kind)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    vertices = enumerate_slopes(depth)
    edges = {(INFINITY, ZERO)}
    for node in iter_tree(depth):
        for parent in (node.upper, node.lower):
            edges.add((parent, node.slope))
    order = {s: i for i, s in enumerate(vertices)}
    edge_list = sorted(
        (tuple(sorted(e, key=order.__getitem__)) for e in edges),
        key=lambda e: (order[e[0]], order[e[1]]),
    )
    return FareyGraph(kind, vertices, edge_list)
