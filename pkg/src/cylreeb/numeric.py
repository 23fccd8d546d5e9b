"""Exact and certified real arithmetic.

Three kinds of values flow through the geometry code:

* ``fractions.Fraction`` for rational data (centers, radii, levels),
* :class:`Surd` for ``p + q*sqrt(s)`` with rational ``p, q`` and a
  square-free integer ``s >= 2``,
* :class:`Certified` for everything else (nested radicals, sums of surds
  with different radicands), represented as an expression tree that is
  evaluated into outward-rounded fixed-point intervals on demand.

Rational and surd comparisons are exact.  Certified comparisons refine the
enclosure until the sign of the difference is known; equality is only
ever reported when the two expression trees are identical.
"""
from __future__ import annotations

import math
import os
from contextlib import contextmanager
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from numbers import Rational as _RationalABC
from typing import Union

LESS, EQUAL, GREATER = -1, 0, 1

DEFAULT_MAX_PRECISION = 4096
START_PRECISION = 64


class NumericError(Exception):
    pass


class PrecisionExhausted(NumericError):
    """Enclosures still overlap at the precision cap."""


class NegativeRadicand(NumericError, ValueError):
    pass


class DegenerateEquation(NumericError, ValueError):
    pass


_max_precision = int(os.environ.get("CYLREEB_MAX_PRECISION", DEFAULT_MAX_PRECISION))


def max_precision() -> int:
    return _max_precision


def set_max_precision(bits: int) -> None:
    global _max_precision
    if bits < START_PRECISION:
        raise ValueError(f"precision cap must be at least {START_PRECISION} bits")
    _max_precision = int(bits)


@contextmanager
def precision_cap(bits: int):
    old = _max_precision
    set_max_precision(bits)
    try:
        yield
    finally:
        set_max_precision(old)


# ---------------------------------------------------------------------------
# square-free decomposition


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


_PRIMES = _small_primes(20000)


@lru_cache(maxsize=65536)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(f, s)`` with ``n == f*f*s`` and ``s`` not a perfect square (or 1).

    Small prime factors are removed by trial division; a large cofactor is
    kept whole, so ``s`` is square-free only up to factors above 20000.
    """
    if n < 0:
        raise ValueError("squarefree_split expects n >= 0")
    if n == 0:
        return 0, 0
    f, s = 1, 1
    rest = n
    for p in _PRIMES:
        if p * p * p > rest:
            break
        if rest % p:
            continue
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        f *= p ** (e // 2)
        if e % 2:
            s *= p
    if rest > 1:
        r = math.isqrt(rest)
        if r * r == rest:
            f *= r
        else:
            # square-free, or a large cofactor left unsplit;
            # radicands differing by a square are aligned in _align
            s *= rest
    return f, s


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"not a rational: {x!r}")


# ---------------------------------------------------------------------------
# quadratic surds


class Surd:
    """The real number ``p + q*sqrt(s)``; ``s`` square-free, ``q != 0``.

    Build instances with :meth:`make`, which collapses rational results to
    ``Fraction``.
    """

    __slots__ = ("p", "q", "s")

    def __init__(self, p: Fraction, q: Fraction, s: int):
        self.p = p
        self.q = q
        self.s = s

    @classmethod
    def make(cls, p, q, s: int) -> "ExactValue":
        p = as_fraction(p)
        q = as_fraction(q)
        s = int(s)
        if s < 0:
            raise NegativeRadicand(f"radicand {s} < 0")
        f, s = squarefree_split(s)
        q = q * f
        if q == 0 or s == 0:
            return p
        if s == 1:
            return p + q
        return cls(p, q, s)

    # arithmetic ------------------------------------------------------------
    def __neg__(self):
        return Surd(-self.p, -self.q, self.s)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.p + other, self.q, self.s)
        if isinstance(other, Surd):
            o = _align(self, other)
            if o is not None:
                return Surd.make(self.p + o.p, self.q + o.q, self.s)
            return Certified.build("+", self, other)
        if isinstance(other, Certified):
            return Certified.build("+", self, other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Surd, Certified)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd.make(self.p * other, self.q * other, self.s)
        if isinstance(other, Surd):
            o = _align(self, other)
            if o is not None:
                return Surd.make(
                    self.p * o.p + self.q * o.q * self.s,
                    self.p * o.q + self.q * o.p,
                    self.s,
                )
            return Certified.build("*", self, other)
        if isinstance(other, Certified):
            return Certified.build("*", self, other)
        return NotImplemented

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.p * self.p - self.q * self.q * self.s

    def conjugate(self) -> "Surd":
        return Surd(self.p, -self.q, self.s)

    def inverse(self) -> "Surd":
        n = self.norm()  # never 0: s is not a perfect square
        return Surd(self.p / n, -self.q / n, self.s)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("surd divided by zero")
            return Surd(self.p / other, self.q / other, self.s)
        if isinstance(other, Surd):
            o = _align(self, other)
            if o is not None:
                return self * o.inverse()
            return Certified.build("/", self, other)
        if isinstance(other, Certified):
            return Certified.build("/", self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    # comparison ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Surd):
            o = _align(self, other)
            return o is not None and (self.p, self.q) == (o.p, o.q)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        # q*sqrt(s) is determined by the signed square q^2 s
        return hash((self.p, self.q * abs(self.q) * self.s))

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.s)

    def __repr__(self):
        return f"Surd({self.p}, {self.q}, {self.s})"

    def __str__(self):
        sign = "+" if self.q > 0 else "-"
        p = f"{self.p}" if self.p else ""
        q = abs(self.q)
        qs = "" if q == 1 else f"{q}*"
        head = f"{p}{sign}" if p else ("-" if sign == "-" else "")
        return f"{head}{qs}sqrt({self.s})"


def _align(x: Surd, y: Surd) -> Surd | None:
    """Rewrite ``y`` over the radicand of ``x`` when ``x.s * y.s`` is a square."""
    if x.s == y.s:
        return y
    r = math.isqrt(x.s * y.s)
    if r * r != x.s * y.s:
        return None
    # sqrt(y.s) = r / x.s * sqrt(x.s)
    return Surd(y.p, y.q * Fraction(r, x.s), x.s)


def _surd_sign(p: Fraction, q: Fraction, s: int) -> int:
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sp == 0 or sq == 0 or sp == sq:
        return sp or sq
    lhs = p * p
    rhs = q * q * s
    if lhs == rhs:
        return 0
    return sp if lhs > rhs else sq


def _sign_exact(x) -> int:
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    return _surd_sign(x.p, x.q, x.s)


def _sign_two_radicands(a: Fraction, b: Fraction, s1: int, c: Fraction, s2: int) -> int:
    """Sign of ``a + b*sqrt(s1) + c*sqrt(s2)`` for non-square radicands."""
    sx = _surd_sign(a, b, s1)
    sy = (c > 0) - (c < 0)
    if sx == 0 or sy == 0 or sx == sy:
        return sx or sy
    # |x| vs |y| through x**2 - y**2 = (a^2 + b^2 s1 - c^2 s2) + 2ab sqrt(s1)
    d = _surd_sign(a * a + b * b * s1 - c * c * s2, 2 * a * b, s1)
    return sx if d > 0 else sy


# ---------------------------------------------------------------------------
# certified values


class _Inconclusive(Exception):
    pass


def _expr(x):
    if isinstance(x, Certified):
        return x.expr
    if isinstance(x, Surd):
        return ("s", x.p, x.q, x.s)
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return ("c", x)
    raise TypeError(f"not an exact value: {x!r}")


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _isqrt_ceil(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _const(x: Fraction, prec: int) -> tuple[int, int]:
    num = x.numerator << prec
    return num // x.denominator, _ceil_div(num, x.denominator)


def _mul_iv(a, b, prec):
    prods = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(prods) >> prec, -((-max(prods)) >> prec)


def _sqrt_iv(a, prec):
    lo, hi = a
    if hi < 0:
        raise NegativeRadicand("square root of a negative quantity")
    return math.isqrt(max(lo, 0) << prec), _isqrt_ceil(hi << prec)


def _eval(e, prec: int) -> tuple[int, int]:
    """Fixed-point enclosure ``[lo, hi] / 2**prec`` of expression ``e``."""
    op = e[0]
    if op == "c":
        return _const(e[1], prec)
    if op == "s":
        _, p, q, s = e
        root = _sqrt_iv((s << prec, s << prec), prec)
        qs = _mul_iv(_const(q, prec), root, prec)
        pc = _const(p, prec)
        return pc[0] + qs[0], pc[1] + qs[1]
    if op == "neg":
        lo, hi = _eval(e[1], prec)
        return -hi, -lo
    if op == "sqrt":
        return _sqrt_iv(_eval(e[1], prec), prec)
    a = _eval(e[1], prec)
    b = _eval(e[2], prec)
    if op == "+":
        return a[0] + b[0], a[1] + b[1]
    if op == "-":
        return a[0] - b[1], a[1] - b[0]
    if op == "*":
        return _mul_iv(a, b, prec)
    if op == "/":
        if b[0] <= 0 <= b[1]:
            raise _Inconclusive
        qs = [(x << prec, y) for x in a for y in b]
        return min(n // d for n, d in qs), max(_ceil_div(n, d) for n, d in qs)
    raise ValueError(f"unknown operator {op!r}")


class Certified:
    """A real number given by an expression tree plus a rational enclosure.

    The enclosure only ever shrinks: :meth:`refine` intersects the fresh
    interval with the current one and returns a new object.
    """

    __slots__ = ("expr", "lo", "hi", "prec")

    def __init__(self, expr, lo: Fraction | None = None, hi: Fraction | None = None, prec: int = 0):
        self.expr = expr
        self.lo = lo
        self.hi = hi
        self.prec = prec

    @classmethod
    def build(cls, op: str, *args) -> "Certified":
        return cls((op, *(_expr(a) for a in args)))

    @classmethod
    def sqrt(cls, x) -> "Certified":
        return cls(("sqrt", _expr(x)))

    def refine(self, prec: int) -> "Certified":
        if prec <= self.prec:
            return self
        try:
            lo, hi = _eval(self.expr, prec)
        except _Inconclusive:
            return Certified(self.expr, self.lo, self.hi, prec)
        lo = Fraction(lo, 1 << prec)
        hi = Fraction(hi, 1 << prec)
        if self.lo is not None:
            lo = max(lo, self.lo)
            hi = min(hi, self.hi)
        return Certified(self.expr, lo, hi, prec)

    @property
    def enclosure(self) -> tuple[Fraction | None, Fraction | None]:
        return self.lo, self.hi

    def __neg__(self):
        return Certified(("neg", self.expr))

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Surd, Certified)):
            return Certified.build("+", self, other)
        return NotImplemented

    def __radd__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            return Certified.build("+", other, self)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Surd, Certified)):
            return Certified.build("-", self, other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            return Certified.build("-", other, self)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Surd, Certified)):
            return Certified.build("*", self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            return Certified.build("*", other, self)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Surd, Certified)):
            return Certified.build("/", self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            return Certified.build("/", other, self)
        return NotImplemented

    def __eq__(self, other):
        # symbolic identity only
        if isinstance(other, Certified):
            return self.expr == other.expr
        return False

    def __hash__(self):
        return hash(self.expr)

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __float__(self):
        lo, hi = self.refine(START_PRECISION).enclosure
        return float((lo + hi) / 2)

    def __repr__(self):
        return f"Certified({_expr_str(self.expr)})"

    __str__ = __repr__


def _expr_str(e) -> str:
    op = e[0]
    if op == "c":
        return str(e[1])
    if op == "s":
        return str(Surd(e[1], e[2], e[3]))
    if op == "neg":
        return f"-({_expr_str(e[1])})"
    if op == "sqrt":
        return f"sqrt({_expr_str(e[1])})"
    return f"({_expr_str(e[1])} {op} {_expr_str(e[2])})"


ExactValue = Union[Fraction, Surd, Certified]


def coerce(x) -> ExactValue:
    if isinstance(x, (Fraction, Surd, Certified)):
        return x
    return as_fraction(x)


# ---------------------------------------------------------------------------
# operations


def compare(a, b, max_prec: int | None = None) -> int:
    """Exact three-way comparison returning LESS, EQUAL or GREATER.

    Raises PrecisionExhausted when certified enclosures cannot be separated
    within ``max_prec`` bits (default: the global cap).
    """
    a = coerce(a)
    b = coerce(b)
    if not isinstance(a, Certified) and not isinstance(b, Certified):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return (a > b) - (a < b)
        if isinstance(a, Surd) and isinstance(b, Surd) and _align(a, b) is None:
            return _sign_two_radicands(a.p - b.p, a.q, a.s, -b.q, b.s)
        return _sign_exact(a - b)
    if _expr(a) == _expr(b):
        return EQUAL
    return _certified_sign(Certified.build("-", a, b), max_prec)


def _certified_sign(c: Certified, max_prec: int | None) -> int:
    cap = max_prec or _max_precision
    prec = START_PRECISION
    while prec <= cap:
        c = c.refine(prec)
        if c.lo is not None:
            if c.lo > 0:
                return GREATER
            if c.hi < 0:
                return LESS
        prec *= 2
    raise PrecisionExhausted(f"cannot separate {c!r} from 0 within {cap} bits")


def sign(x, max_prec: int | None = None) -> int:
    return compare(x, Fraction(0), max_prec)


def sort_values(values, max_prec: int | None = None) -> list:
    return sorted(values, key=cmp_to_key(lambda x, y: compare(x, y, max_prec)))


def sqrt_exact(a) -> ExactValue:
    """Square root of a non-negative rational as Fraction or Surd."""
    a = as_fraction(a)
    if a < 0:
        raise NegativeRadicand(f"sqrt of negative rational {a}")
    if a == 0:
        return Fraction(0)
    fn, sn = squarefree_split(a.numerator)
    fd, sd = squarefree_split(a.denominator)
    # sqrt(fn^2 sn / (fd^2 sd)) = fn/(fd sd) * sqrt(sn sd)
    return Surd.make(0, Fraction(fn, fd * sd), sn * sd)


def sqrt_value(x) -> ExactValue:
    """Square root of any exact value; non-rational radicands go certified."""
    x = coerce(x)
    if isinstance(x, Fraction):
        return sqrt_exact(x)
    if isinstance(x, Surd) and _sign_exact(x) < 0:
        raise NegativeRadicand(f"sqrt of negative surd {x}")
    return Certified.sqrt(x)


def abs_value(x) -> ExactValue:
    return -x if sign(x) < 0 else x


def solve_quadratic(a, b, c) -> list[ExactValue]:
    """Real roots of ``a x^2 + b x + c`` for rational coefficients, increasing."""
    a, b, c = as_fraction(a), as_fraction(b), as_fraction(c)
    if a == 0:
        if b == 0:
            if c == 0:
                raise DegenerateEquation("all coefficients are zero")
            return []
        return [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    if disc == 0:
        return [-b / (2 * a)]
    r = sqrt_exact(disc)
    return sort_values([(-b - r) / (2 * a), (-b + r) / (2 * a)])


def solve_quadratic_values(a, b, c) -> list[ExactValue]:
    """Like :func:`solve_quadratic` but coefficients may be any exact value."""
    a, b, c = coerce(a), coerce(b), coerce(c)
    if all(isinstance(v, Fraction) for v in (a, b, c)):
        return solve_quadratic(a, b, c)
    if sign(a) == 0:
        if sign(b) == 0:
            if sign(c) == 0:
                raise DegenerateEquation("all coefficients are zero")
            return []
        return [-c / b]
    disc = b * b - 4 * a * c
    sd = sign(disc)
    if sd < 0:
        return []
    if sd == 0:
        return [-b / (2 * a)]
    r = sqrt_value(disc)
    return sort_values([(-b - r) / (2 * a), (-b + r) / (2 * a)])


def to_float(x) -> float:
    return float(coerce(x))


def enclose(x, prec: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``x`` at ``prec`` bits (exact for rationals)."""
    x = coerce(x)
    if isinstance(x, Fraction):
        return x, x
    c = x if isinstance(x, Certified) else Certified(_expr(x))
    c = c.refine(prec)
    if c.lo is None:
        raise PrecisionExhausted(f"no enclosure for {x!r} at {prec} bits")
    return c.lo, c.hi


def rational_between(a, b) -> Fraction:
    """A short rational strictly between ``a < b``."""
    if compare(a, b) >= 0:
        raise ValueError("rational_between needs a < b")
    prec = START_PRECISION
    while prec <= _max_precision:
        _, a_hi = enclose(a, prec)
        b_lo, _ = enclose(b, prec)
        if a_hi < b_lo:
            return _simplest_between(a_hi, b_lo)
        prec *= 2
    raise PrecisionExhausted("cannot place a rational between two values")


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Dyadic rational with the smallest denominator in the open interval (lo, hi)."""
    d = 1
    while True:
        n = math.floor(lo * d) + 1
        if Fraction(n, d) < hi:
            # centre it among the admissible numerators at this denominator
            top = math.ceil(hi * d) - 1
            return Fraction((n + top) // 2, d)
        d *= 2


def value_to_json(x):
    x = coerce(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Surd):
        return {"p": str(x.p), "q": str(x.q), "s": x.s}
    raise TypeError("certified values are recomputed, never serialized")


def value_from_json(obj) -> ExactValue:
    if isinstance(obj, dict):
        try:
            return Surd.make(Fraction(obj["p"]), Fraction(obj["q"]), int(obj["s"]))
        except KeyError as exc:
            raise ValueError(f"surd object missing field {exc}") from None
    if isinstance(obj, bool):
        raise ValueError("booleans are not exact values")
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, str):
        return Fraction(obj)
    raise ValueError(f"cannot decode exact value from {obj!r}")
