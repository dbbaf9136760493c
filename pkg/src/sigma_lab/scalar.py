"""Exact scalars: rationals and elements of one real quadratic field.

Rationals are plain :class:`fractions.Fraction` (always in lowest terms with
a positive denominator).  An element ``a + b*sqrt(d)`` with ``b != 0`` is a
:class:`Quad`; every operation whose result has ``b == 0`` returns a
``Fraction`` instead, so a rational value has exactly one representation.

:class:`CReal` wraps values that are only known through certified bounds
(p-th roots, spectral estimates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

from .errors import RadicandMismatch

DIGITS = 50
_GUARD = 10


@lru_cache(maxsize=None)
def _check_radicand(d):
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"radicand must be an integer >= 2, got {d!r}")
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            raise ValueError(f"radicand {d} is not square-free")
        k += 1
    return d


def _rational_parts(x):
    if isinstance(x, int):
        return x, 1
    if isinstance(x, Fraction):
        return x.numerator, x.denominator
    raise TypeError(f"not an exact scalar: {x!r}")


def _make(p, q, r, d):
    if q == 0:
        return Fraction(p, r)
    if r < 0:
        p, q, r = -p, -q, -r
    g = math.gcd(math.gcd(p, q), r)
    if g != 1:
        p, q, r = p // g, q // g, r // g
    obj = object.__new__(Quad)
    obj._p, obj._q, obj._r, obj._d = p, q, r, d
    return obj


def quad(a, b, d):
    """Return ``a + b*sqrt(d)``; a ``Fraction`` when ``b == 0``."""
    a, b = Fraction(a), Fraction(b)
    _check_radicand(d)
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    return _make(a.numerator * (den // a.denominator),
                 b.numerator * (den // b.denominator), den, d)


class Quad:
    """``(p + q*sqrt(d)) / r`` with integers, ``r > 0``, ``q != 0``, gcd 1."""

    __slots__ = ("_p", "_q", "_r", "_d")

    def __new__(cls, a, b, d):
        return quad(a, b, d)

    @property
    def a(self):
        return Fraction(self._p, self._r)

    @property
    def b(self):
        return Fraction(self._q, self._r)

    @property
    def d(self):
        return self._d

    def conjugate(self):
        return _make(self._p, -self._q, self._r, self._d)

    # -- coercion -------------------------------------------------------
    def _parts(self, other):
        if isinstance(other, Quad):
            if other._d != self._d:
                raise RadicandMismatch(
                    f"cannot combine sqrt({self._d}) with sqrt({other._d})")
            return other._p, other._q, other._r
        if isinstance(other, (int, Fraction)):
            n, m = _rational_parts(other)
            return n, 0, m
        return None

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        p2, q2, r2 = o
        p1, q1, r1 = self._p, self._q, self._r
        return _make(p1 * r2 + p2 * r1, q1 * r2 + q2 * r1, r1 * r2, self._d)

    __radd__ = __add__

    def __neg__(self):
        return _make(-self._p, -self._q, self._r, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        p2, q2, r2 = o
        p1, q1, r1 = self._p, self._q, self._r
        return _make(p1 * r2 - p2 * r1, q1 * r2 - q2 * r1, r1 * r2, self._d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        p2, q2, r2 = o
        p1, q1, r1, d = self._p, self._q, self._r, self._d
        return _make(p1 * p2 + q1 * q2 * d, p1 * q2 + p2 * q1, r1 * r2, d)

    __rmul__ = __mul__

    def _inverse(self):
        p, q, r, d = self._p, self._q, self._r, self._d
        norm = p * p - q * q * d  # nonzero: sqrt(d) is irrational
        return _make(p * r, -q * r, norm, d)

    def __truediv__(self, other):
        if isinstance(other, Quad):
            return self * other._inverse()
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            n, m = _rational_parts(other)
            return _make(self._p * m, self._q * m, self._r * n, self._d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._inverse() * other
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (self._inverse()) ** (-k)
        result = Fraction(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order ----------------------------------------------------------
    def sign(self):
        p, q = self._p, self._q
        if p >= 0 and q >= 0:
            return 1
        if p <= 0 and q <= 0:
            return -1
        # opposite signs: compare p^2 with q^2 d
        if p * p > q * q * self._d:
            return 1 if p > 0 else -1
        return 1 if q > 0 else -1

    def _cmp(self, other):
        diff = self - other
        return sign(diff)

    def __eq__(self, other):
        if isinstance(other, Quad):
            return (self._p, self._q, self._r, self._d) == (other._p, other._q, other._r, other._d)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash((self._p, self._q, self._r, self._d))

    def __lt__(self, other):
        if self._parts(other) is None:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if self._parts(other) is None:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if self._parts(other) is None:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if self._parts(other) is None:
            return NotImplemented
        return self._cmp(other) >= 0

    def __bool__(self):
        return True

    def __float__(self):
        p, q, r, d = self._p, self._q, self._r, self._d
        s = math.sqrt(d)
        if (p > 0) == (q > 0) or p == 0:
            return (p + q * s) / r
        # cancellation-free form via the conjugate
        return (p * p - q * q * d) / (r * (p - q * s))

    def __repr__(self):
        return f"Quad({self.a}, {self.b}, {self._d})"

    def __str__(self):
        b = self.b
        op = "+" if b > 0 else "-"
        return f"{self.a} {op} {abs(b)}*sqrt({self._d})"


Scalar = (int, Fraction, Quad)


def is_scalar(x):
    return isinstance(x, (int, Fraction, Quad)) and not isinstance(x, bool)


def as_scalar(x):
    """Coerce ints and ``"p/q"`` strings to exact scalars."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, Quad)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def sign(x):
    if isinstance(x, Quad):
        return x.sign()
    return (x > 0) - (x < 0)


def scalar_arith(x, y, op):
    """Apply ``op`` in ``{'+', '-', '*', '/'}`` exactly."""
    x, y = as_scalar(x), as_scalar(y)
    if op == "+":
        return x + y
    if op in ("-", "−"):
        return x - y
    if op in ("*", "×"):
        return x * y
    if op in ("/", "÷"):
        if y == 0:
            raise ZeroDivisionError("division by zero")
        return x / y
    raise ValueError(f"unknown operator {op!r}")


def sqrt_of(d):
    """``sqrt(d)`` as a field element."""
    return quad(0, 1, d)


# -- certified decimal bounds ------------------------------------------------

def iroot(n, k):
    """Largest integer ``t`` with ``t**k <= n`` (``n >= 0``)."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def bounds(x, digits=DIGITS + _GUARD):
    """Fractions ``lo <= x <= hi`` with ``hi - lo <= 2 * 10**-digits``."""
    if isinstance(x, CReal):
        return x.lo, x.hi
    if not isinstance(x, Quad):
        x = Fraction(x)
        return x, x
    scale = 10 ** digits
    s = math.isqrt(x.d * scale * scale)
    s_lo = Fraction(s, scale)
    s_hi = Fraction(s + 1, scale)
    if x.b > 0:
        return x.a + x.b * s_lo, x.a + x.b * s_hi
    return x.a + x.b * s_hi, x.a + x.b * s_lo


def _floor_fraction(x):
    return x.numerator // x.denominator


def decimal_str(x, digits=DIGITS):
    """Decimal truncation (toward minus infinity) to ``digits`` places.

    The exact value lies in ``[result, result + 10**-digits)`` up to one unit
    of the last place, which is the bound recorded alongside in reports.
    """
    lo, _ = bounds(x, digits + _GUARD)
    t = _floor_fraction(lo * 10 ** digits)
    neg = t < 0
    t = abs(t)
    body = str(t).rjust(digits + 1, "0")
    s = body[:-digits] + "." + body[-digits:] if digits else body
    s = s.rstrip("0").rstrip(".") if "." in s else s
    return ("-" if neg else "") + s


def to_decimal(x, digits=DIGITS):
    with localcontext() as ctx:
        ctx.prec = digits + 5
        return Decimal(decimal_str(x, digits))


def _root_floor(x, k, digits):
    scale = 10 ** digits
    t = iroot(_floor_fraction(x * scale ** k), k)
    return Fraction(t, scale)


def _root_ceil(x, k, digits):
    scale = 10 ** digits
    n = x * scale ** k
    c = -((-n.numerator) // n.denominator)
    t = iroot(c, k)
    if t ** k < c:
        t += 1
    return Fraction(t, scale)


def pow_bounds(lo, hi, exponent, digits=DIGITS + _GUARD):
    """Bounds for ``[lo, hi] ** exponent`` with ``0 <= lo`` and rational exponent > 0."""
    e = Fraction(exponent)
    if lo < 0:
        raise ValueError("pow_bounds needs a nonnegative interval")
    u, v = e.numerator, e.denominator
    if u <= 0:
        raise ValueError("exponent must be positive")
    lo_u, hi_u = lo ** u, hi ** u
    if v == 1:
        return lo_u, hi_u
    return _root_floor(lo_u, v, digits), _root_ceil(hi_u, v, digits)


def exact_root(x, k):
    """``x ** (1/k)`` when ``x`` is a nonnegative rational perfect k-th power, else None."""
    if isinstance(x, Quad) or x < 0:
        return None
    x = Fraction(x)
    n, m = x.numerator, x.denominator
    rn, rm = iroot(n, k), iroot(m, k)
    if rn ** k == n and rm ** k == m:
        return Fraction(rn, rm)
    return None


@dataclass(frozen=True)
class CReal:
    """A real number known through certified rational bounds ``lo <= x <= hi``.

    ``exact`` holds the value itself when it is an exact scalar; ``power``
    holds ``x ** exponent`` exactly when known (a p-th root carried as its
    exact p-th power).
    """

    lo: Fraction
    hi: Fraction
    exact: object = None
    power: object = None
    exponent: Fraction | None = None

    @classmethod
    def of(cls, x):
        if isinstance(x, CReal):
            return x
        x = as_scalar(x)
        lo, hi = bounds(x)
        return cls(lo, hi, exact=x, power=x, exponent=Fraction(1))

    @classmethod
    def interval(cls, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        if lo == hi:
            return cls.of(lo)
        return cls(lo, hi)

    @classmethod
    def root(cls, power, k):
        """The nonnegative ``power ** (1/k)`` for a nonnegative exact ``power``."""
        k = Fraction(k)
        power = as_scalar(power)
        if sign(power) < 0:
            raise ValueError("root of a negative number")
        if k == 1:
            return cls.of(power)
        # power ** (1/k) = (numerator-th root) ** denominator
        r = exact_root(power, k.numerator)
        if r is not None:
            r = r ** k.denominator
            return cls(r, r, exact=r, power=power, exponent=k)
        plo, phi = bounds(power)
        lo, hi = pow_bounds(max(plo, Fraction(0)), phi, 1 / k)
        return cls(lo, hi, power=power, exponent=k)

    @property
    def is_exact(self):
        return self.exact is not None

    @property
    def width(self):
        return self.hi - self.lo

    def __float__(self):
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)

    def decimal(self, digits=DIGITS):
        if self.exact is not None:
            return decimal_str(self.exact, digits)
        return decimal_str((self.lo + self.hi) / 2, digits)

    def pow(self, exponent):
        e = Fraction(exponent)
        if e == 1:
            return self
        if self.exact is not None and e.denominator == 1 and e > 0:
            return CReal.of(self.exact ** e.numerator)
        if self.power is not None and self.exponent is not None and e == self.exponent:
            return CReal.of(self.power)
        lo, hi = pow_bounds(max(self.lo, Fraction(0)), self.hi, e)
        return CReal(lo, hi)

    def __add__(self, other):
        o = CReal.of(other)
        if self.exact is not None and o.exact is not None:
            return CReal.of(self.exact + o.exact)
        return CReal(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __mul__(self, other):
        o = CReal.of(other)
        if self.exact is not None and o.exact is not None:
            return CReal.of(self.exact * o.exact)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return CReal(min(c), max(c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CReal.of(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        if self.exact is not None and o.exact is not None:
            return CReal.of(self.exact / o.exact)
        c = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return CReal(min(c), max(c))

    def __repr__(self):
        if self.exact is not None:
            return f"CReal(exact={self.exact})"
        return f"CReal({float(self.lo)!r} .. {float(self.hi)!r})"


def compare(x, y):
    """Certified comparison: -1, 0, 1, or None when bounds cannot separate."""
    if not isinstance(x, CReal) and not isinstance(y, CReal):
        return sign(as_scalar(x) - as_scalar(y))
    cx, cy = CReal.of(x), CReal.of(y)
    if cx.exact is not None and cy.exact is not None:
        return sign(cx.exact - cy.exact)
    if (cx.power is not None and cy.power is not None and cx.exponent is not None
            and cx.exponent == cy.exponent and cx.exponent > 0
            and sign(cx.power) >= 0 and sign(cy.power) >= 0):
        return sign(cx.power - cy.power)
    if cx.hi < cy.lo:
        return -1
    if cx.lo > cy.hi:
        return 1
    return None


def certainly_le(x, y):
    """True when ``x <= y`` is certified, False when ``x > y`` is, else None."""
    c = compare(x, y)
    if c is None:
        return None
    return c <= 0


def lower(x):
    """Certified lower bound as a Fraction."""
    return bounds(x)[0]


def upper(x):
    return bounds(x)[1]
