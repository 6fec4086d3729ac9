"""Extended-precision scalars, forward-mode dual numbers and 2-vectors.

All real arithmetic runs on :mod:`gmpy2` ``mpfr`` values.  The working
precision is the thread-local gmpy2 context, so every public entry point that
touches reals wraps its body in :func:`working_precision`.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

DEFAULT_BITS = 128
MIN_BITS = 53


@dataclass(frozen=True)
class PrecisionContext:
    """Significand width plus the relative tolerance used by invariant checks.

    The default tolerance is ``2**-(bits // 2)``, i.e. ``2**-64`` at 128 bits.
    """

    significand_bits: int = DEFAULT_BITS
    tolerance: float | None = None

    def __post_init__(self):
        if self.significand_bits < MIN_BITS:
            raise ValueError(f"significand_bits must be >= {MIN_BITS}, got {self.significand_bits}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @property
    def bits(self) -> int:
        return self.significand_bits

    @property
    def tol(self):
        with working_precision(self.significand_bits):
            if self.tolerance is None:
                return gmpy2.exp2(-(self.significand_bits // 2))
            return mpfr(self.tolerance)


@contextlib.contextmanager
def working_precision(bits: int):
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def current_bits() -> int:
    return gmpy2.get_context().precision


def to_mpfr(x):
    """Convert int, float, str, Fraction or mpfr to an mpfr at the current precision."""
    if isinstance(x, Dual):
        return x.v
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / mpfr(x.denominator)
    if isinstance(x, str):
        return mpfr(x.strip())
    return mpfr(x)


def to_decimal_string(x, bits: int | None = None) -> str:
    """Decimal string carrying enough digits to round-trip ``bits`` of significand."""
    if isinstance(x, Dual):
        x = x.v
    if not isinstance(x, type(mpfr(0))):
        with working_precision(bits or DEFAULT_BITS):
            x = mpfr(x)
    if bits is None:
        bits = x.precision
    digits = int(math.ceil(bits * math.log10(2))) + 1
    if gmpy2.is_zero(x):
        return "0.0"
    return f"{x:.{digits}g}"


class Dual:
    """Value plus gradient with respect to the two chart coordinates (l, tau).

    ``a`` holds the derivative along ``l`` and ``b`` the derivative along
    ``tau``.  Plain mpfr/int operands are promoted as constants.
    """

    __slots__ = ("v", "a", "b")

    def __init__(self, v, a=0, b=0):
        self.v = v
        self.a = a
        self.b = b

    @classmethod
    def variable(cls, value, index: int) -> "Dual":
        value = to_mpfr(value)
        return cls(value, mpfr(1) if index == 0 else mpfr(0), mpfr(1) if index == 1 else mpfr(0))

    @property
    def grad(self):
        return (self.a, self.b)

    def __repr__(self):
        return f"Dual({self.v!s}, {self.a!s}, {self.b!s})"

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.v + o.v, self.a + o.a, self.b + o.b)
        return Dual(self.v + o, self.a, self.b)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.v - o.v, self.a - o.a, self.b - o.b)
        return Dual(self.v - o, self.a, self.b)

    def __rsub__(self, o):
        return Dual(o - self.v, -self.a, -self.b)

    def __neg__(self):
        return Dual(-self.v, -self.a, -self.b)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.v * o.v, self.a * o.v + self.v * o.a, self.b * o.v + self.v * o.b)
        return Dual(self.v * o, self.a * o, self.b * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            q = self.v / o.v
            return Dual(q, (self.a - q * o.a) / o.v, (self.b - q * o.b) / o.v)
        return Dual(self.v / o, self.a / o, self.b / o)

    def __rtruediv__(self, o):
        q = o / self.v
        s = -q / self.v
        return Dual(q, s * self.a, s * self.b)

    def __abs__(self):
        return -self if self.v < 0 else self

    def __lt__(self, o):
        return self.v < (o.v if isinstance(o, Dual) else o)

    def __gt__(self, o):
        return self.v > (o.v if isinstance(o, Dual) else o)


def _chain(x: Dual, fx, dfx) -> Dual:
    return Dual(fx, dfx * x.a, dfx * x.b)


def exp(x):
    if isinstance(x, Dual):
        e = gmpy2.exp(x.v)
        return _chain(x, e, e)
    return gmpy2.exp(x)


def log(x):
    if isinstance(x, Dual):
        return _chain(x, gmpy2.log(x.v), 1 / x.v)
    return gmpy2.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        r = gmpy2.sqrt(x.v)
        return _chain(x, r, 1 / (2 * r))
    return gmpy2.sqrt(x)


def cosh(x):
    if isinstance(x, Dual):
        return _chain(x, gmpy2.cosh(x.v), gmpy2.sinh(x.v))
    return gmpy2.cosh(x)


def sinh(x):
    if isinstance(x, Dual):
        return _chain(x, gmpy2.sinh(x.v), gmpy2.cosh(x.v))
    return gmpy2.sinh(x)


def coth(x):
    if isinstance(x, Dual):
        s = gmpy2.sinh(x.v)
        return _chain(x, gmpy2.coth(x.v), -1 / (s * s))
    return gmpy2.coth(x)


def acosh(x):
    if isinstance(x, Dual):
        return _chain(x, gmpy2.acosh(x.v), 1 / gmpy2.sqrt(x.v * x.v - 1))
    return gmpy2.acosh(x)


def value(x):
    return x.v if isinstance(x, Dual) else x


# 2x2 matrices are flat tuples (a, b, c, d) = [[a, b], [c, d]].

def mat_mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv_sl2(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def mat_det(m):
    a, b, c, d = m
    return a * d - b * c


def mat_trace(m):
    return m[0] + m[3]


def mat_value(m):
    return tuple(value(x) for x in m)


@dataclass(frozen=True)
class Vec2:
    """A vector or covector in the (l, tau) Fenchel-Nielsen chart."""

    x: object
    y: object

    def __add__(self, o: "Vec2") -> "Vec2":
        return Vec2(self.x + o.x, self.y + o.y)

    def __sub__(self, o: "Vec2") -> "Vec2":
        return Vec2(self.x - o.x, self.y - o.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def __mul__(self, k) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k) -> "Vec2":
        return Vec2(self.x / k, self.y / k)

    def __iter__(self):
        yield self.x
        yield self.y

    def __getitem__(self, i):
        return (self.x, self.y)[i]

    def dot(self, o: "Vec2"):
        return self.x * o.x + self.y * o.y

    def cross(self, o: "Vec2"):
        return self.x * o.y - self.y * o.x

    def perp(self) -> "Vec2":
        """Rotation by +90 degrees (counterclockwise)."""
        return Vec2(-self.y, self.x)

    def norm2(self):
        return gmpy2.sqrt(self.x * self.x + self.y * self.y)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def as_floats(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))

    def with_precision(self) -> "Vec2":
        return Vec2(to_mpfr(self.x), to_mpfr(self.y))


TangentVec = Vec2
Covector = Vec2


def vec(x, y) -> Vec2:
    return Vec2(to_mpfr(x), to_mpfr(y))


def angle_key(v: Vec2) -> float:
    """Polar angle in [0, 2*pi) used only for ordering."""
    a = math.atan2(float(v.y), float(v.x))
    return a if a >= 0 else a + 2 * math.pi
