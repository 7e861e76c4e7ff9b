"""Exact and directed-rounding number types.

Three layers live here:

* ``Interval``: closed interval with ``Fraction`` endpoints.  Slow but exact,
  used wherever a handful of values must be certified.
* ``Fx``: interval whose endpoints are integers scaled by ``2**prec``.  Every
  operation rounds outward, so the true value always stays inside.  This is
  what the dynamic programming runs on when ``ln`` or ``e`` shows up.
* ``SymConst``: exact linear combination of monomials ``ln2**i * e**j``.  Keeps
  transcendental constants symbolic until a caller picks an interval for them.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import mpmath

DEFAULT_PRECISION = 60
MIN_PRECISION = 16

Rational = Union[int, Fraction]


def default_precision() -> int:
    """Bits of precision for transcendental brackets (``RTBOUND_PRECISION``)."""
    raw = os.environ.get("RTBOUND_PRECISION", "").strip()
    if not raw:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(f"RTBOUND_PRECISION must be an integer, got {raw!r}") from exc
    if bits < MIN_PRECISION:
        raise ValueError(f"RTBOUND_PRECISION must be at least {MIN_PRECISION}")
    return bits


def _frac(x: Rational | str | Decimal) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str, Decimal)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# --------------------------------------------------------------------------
# Rational intervals


@dataclass(frozen=True, slots=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        lo, hi = _frac(self.lo), _frac(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Rational) -> "Interval":
        x = _frac(x)
        return cls(x, x)

    @staticmethod
    def coerce(x: "Interval | Rational") -> "Interval":
        return x if isinstance(x, Interval) else Interval.point(x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: "Interval | Rational") -> bool:
        other = Interval.coerce(x)
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval | Rational") -> bool:
        other = Interval.coerce(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other: "Interval | Rational") -> "Interval":
        other = Interval.coerce(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval | Rational") -> "Interval":
        other = Interval.coerce(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other: Rational) -> "Interval":
        return Interval.coerce(other) - self

    def __mul__(self, other: "Interval | Rational") -> "Interval":
        if not isinstance(other, Interval):
            k = _frac(other)
            return Interval(self.lo * k, self.hi * k) if k >= 0 else Interval(self.hi * k, self.lo * k)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval | Rational") -> "Interval":
        other = Interval.coerce(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def __pow__(self, k: int) -> "Interval":
        if k < 0:
            return Interval.point(1) / (self ** (-k))
        result = Interval.point(1)
        for _ in range(k):
            result = result * self
        return result

    def __str__(self) -> str:
        if self.is_point():
            return format_rational(self.lo)
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


# --------------------------------------------------------------------------
# Transcendental brackets


@lru_cache(maxsize=None)
def ln_scaled(n: int, prec: int) -> tuple[int, int]:
    """Integers ``lo, hi`` with ``lo <= ln(n) * 2**prec <= hi``."""
    if n < 1:
        raise ValueError("ln argument must be a positive integer")
    if n == 1:
        return (0, 0)
    with mpmath.workprec(prec + 32):
        v = mpmath.log(n) * mpmath.mpf(2) ** prec
        return int(mpmath.floor(v)) - 1, int(mpmath.ceil(v)) + 1


def ln_scaled_fast(n: int, prec: int) -> tuple[int, int]:
    """Cheaper bracket built on ``math.log``, good to about 50 bits.

    glibc's ``log`` is accurate to within one ulp, so widening the double
    result by eight ulps on each side is a safe enclosure.
    """
    if n == 1:
        return (0, 0)
    m, e = math.frexp(math.log(n))
    mant = int(m * (1 << 53))  # log(n) as a double == mant * 2**(e-53)
    shift = e - 53 + prec
    centre = mant << shift if shift >= 0 else mant >> -shift
    slack = 1 << max(shift + 3, 0)
    return centre - slack - 1, centre + slack + 1


@lru_cache(maxsize=None)
def euler_scaled(prec: int) -> tuple[int, int]:
    with mpmath.workprec(prec + 32):
        v = mpmath.e * mpmath.mpf(2) ** prec
        return int(mpmath.floor(v)) - 1, int(mpmath.ceil(v)) + 1


def _scaled_to_interval(pair: tuple[int, int], prec: int) -> Interval:
    den = 1 << prec
    return Interval(Fraction(pair[0], den), Fraction(pair[1], den))


def ln_interval(n: int, prec: int | None = None) -> Interval:
    """Tight rational enclosure of ``ln(n)``."""
    prec = default_precision() if prec is None else prec
    return _scaled_to_interval(ln_scaled(n, prec), prec)


def ln_interval_of(x: Fraction, prec: int | None = None) -> Interval:
    """Enclosure of ``ln(x)`` for a positive rational ``x``."""
    prec = default_precision() if prec is None else prec
    x = _frac(x)
    if x <= 0:
        raise ValueError("ln argument must be positive")
    if x.denominator == 1:
        return ln_interval(x.numerator, prec)
    return ln_interval(x.numerator, prec) - ln_interval(x.denominator, prec)


def euler_interval(prec: int | None = None) -> Interval:
    prec = default_precision() if prec is None else prec
    return _scaled_to_interval(euler_scaled(prec), prec)


FOUR_DIGIT_LN2 = Interval(Fraction("0.6931"), Fraction("0.6932"))
FOUR_DIGIT_EULER = Interval(Fraction("2.7182"), Fraction("2.7183"))


@dataclass(frozen=True, slots=True)
class Constants:
    """Interval values chosen for ``ln 2`` and ``e``."""

    ln2: Interval
    euler: Interval
    name: str = "custom"

    @classmethod
    def tight(cls, prec: int | None = None) -> "Constants":
        prec = default_precision() if prec is None else prec
        return cls(ln_interval(2, prec), euler_interval(prec), f"tight-{prec}")

    @classmethod
    def four_digit(cls) -> "Constants":
        """The four-decimal brackets [0.6931, 0.6932] and [2.7182, 2.7183]."""
        return cls(FOUR_DIGIT_LN2, FOUR_DIGIT_EULER, "four-digit")

    @classmethod
    def named(cls, name: str) -> "Constants":
        if name == "tight":
            return cls.tight()
        if name == "four-digit":
            return cls.four_digit()
        raise ValueError(f"unknown constant set {name!r}")


# --------------------------------------------------------------------------
# Fixed-point intervals


class Fx:
    """Outward-rounded interval ``[lo, hi] / 2**prec`` on plain integers."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo: int, hi: int, prec: int):
        self.lo = lo
        self.hi = hi
        self.prec = prec

    @classmethod
    def of(cls, value: Rational, prec: int) -> "Fx":
        value = _frac(value)
        scaled = value.numerator << prec
        den = value.denominator
        return cls(scaled // den, ceil_div(scaled, den), prec)

    @classmethod
    def ln(cls, n: int, prec: int) -> "Fx":
        lo, hi = ln_scaled(n, prec)
        return cls(lo, hi, prec)

    @classmethod
    def euler(cls, prec: int) -> "Fx":
        lo, hi = euler_scaled(prec)
        return cls(lo, hi, prec)

    def _lift(self, other: "Fx | Rational") -> "Fx":
        return other if isinstance(other, Fx) else Fx.of(other, self.prec)

    def __add__(self, other: "Fx | Rational") -> "Fx":
        other = self._lift(other)
        return Fx(self.lo + other.lo, self.hi + other.hi, self.prec)

    __radd__ = __add__

    def __sub__(self, other: "Fx | Rational") -> "Fx":
        other = self._lift(other)
        return Fx(self.lo - other.hi, self.hi - other.lo, self.prec)

    def __neg__(self) -> "Fx":
        return Fx(-self.hi, -self.lo, self.prec)

    def __mul__(self, other: "Fx | Rational") -> "Fx":
        if isinstance(other, int):
            if other >= 0:
                return Fx(self.lo * other, self.hi * other, self.prec)
            return Fx(self.hi * other, self.lo * other, self.prec)
        if isinstance(other, Fraction):
            num, den = other.numerator, other.denominator
            if num >= 0:
                return Fx((self.lo * num) // den, ceil_div(self.hi * num, den), self.prec)
            return Fx((self.hi * num) // den, ceil_div(self.lo * num, den), self.prec)
        a, b, c, d = self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi
        p = self.prec
        return Fx(min(a, b, c, d) >> p, -((-max(a, b, c, d)) >> p), p)

    __rmul__ = __mul__

    def div_int(self, k: int) -> "Fx":
        if k <= 0:
            raise ValueError("divisor must be a positive integer")
        return Fx(self.lo // k, ceil_div(self.hi, k), self.prec)

    def lower(self) -> Fraction:
        return Fraction(self.lo, 1 << self.prec)

    def upper(self) -> Fraction:
        return Fraction(self.hi, 1 << self.prec)

    def to_interval(self) -> Interval:
        return Interval(self.lower(), self.upper())

    def __repr__(self) -> str:
        return f"Fx({float(self.lower())!r}..{float(self.upper())!r})"


# --------------------------------------------------------------------------
# Symbolic constants


Monomial = tuple[int, int]  # (power of ln 2, power of e)


class SymConst:
    """Exact sum of ``coeff * ln2**i * e**j`` terms; immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Rational] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for key, value in (terms or {}).items():
            value = _frac(value)
            if value:
                clean[key] = clean.get(key, Fraction(0)) + value
        self._terms = tuple(sorted((k, v) for k, v in clean.items() if v))

    @classmethod
    def of(cls, value: "SymConst | Rational") -> "SymConst":
        if isinstance(value, SymConst):
            return value
        return cls({(0, 0): value})

    @classmethod
    def ln2(cls) -> "SymConst":
        return cls({(1, 0): 1})

    @classmethod
    def euler(cls) -> "SymConst":
        return cls({(0, 1): 1})

    @property
    def terms(self) -> tuple[tuple[Monomial, Fraction], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(k == (0, 0) for k, _ in self._terms)

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms[0][1] if self._terms else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SymConst.of(other)
        return isinstance(other, SymConst) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __add__(self, other: "SymConst | Rational") -> "SymConst":
        merged = dict(self._terms)
        for k, v in SymConst.of(other)._terms:
            merged[k] = merged.get(k, Fraction(0)) + v
        return SymConst(merged)

    __radd__ = __add__

    def __neg__(self) -> "SymConst":
        return SymConst({k: -v for k, v in self._terms})

    def __sub__(self, other: "SymConst | Rational") -> "SymConst":
        return self + (-SymConst.of(other))

    def __rsub__(self, other: Rational) -> "SymConst":
        return SymConst.of(other) - self

    def __mul__(self, other: "SymConst | Rational") -> "SymConst":
        other = SymConst.of(other)
        out: dict[Monomial, Fraction] = {}
        for (i1, j1), v1 in self._terms:
            for (i2, j2), v2 in other._terms:
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, Fraction(0)) + v1 * v2
        return SymConst(out)

    __rmul__ = __mul__

    def interval(self, constants: Constants) -> Interval:
        total = Interval.point(0)
        for (i, j), v in self._terms:
            total = total + (constants.ln2 ** i) * (constants.euler ** j) * v
        return total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), v in self._terms:
            factors = ["ln2"] * i + ["e"] * j
            if not factors:
                parts.append(format_rational(v))
            elif v == 1:
                parts.append("*".join(factors))
            elif v == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(format_rational(v) + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"SymConst({self})"


def sum_sym(items: Iterable[SymConst]) -> SymConst:
    total = SymConst()
    for item in items:
        total = total + item
    return total


# --------------------------------------------------------------------------
# Formatting and rounding


def _is_terminating(x: Fraction) -> bool:
    den = x.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def format_rational(x: Rational) -> str:
    """Exact decimal text when the expansion terminates, else ``num/den``."""
    x = _frac(x)
    if x.denominator == 1:
        return str(x.numerator)
    if _is_terminating(x):
        digits = len(str(x.denominator)) + len(str(abs(x.numerator))) + 5
        with localcontext() as ctx:
            ctx.prec = digits
            text = format(Decimal(x.numerator) / Decimal(x.denominator), "f")
        return text
    return f"{x.numerator}/{x.denominator}"


def format_decimal(x: Rational, digits: int = 17, rounding: str = ROUND_FLOOR) -> str:
    """Decimal text with ``digits`` fractional places rounded in one direction."""
    x = _frac(x)
    if x.denominator == 1 or (_is_terminating(x) and len(format_rational(x).split(".")[-1]) <= digits):
        return format_rational(x)
    return str(_quantize(x, digits, rounding))


MILLI = Fraction(1, 1000)


def _quantize(x: Fraction, digits: int, rounding: str) -> Decimal:
    scale = 10 ** digits
    scaled = x * scale
    k = math.floor(scaled) if rounding == ROUND_FLOOR else math.ceil(scaled)
    return Decimal(k).scaleb(-digits)


def round_up_milli(x: Rational) -> Decimal:
    """Smallest multiple of 10**-3 that is >= x."""
    return _quantize(_frac(x), 3, ROUND_CEILING)


def round_above_milli(x: Rational) -> Decimal:
    """Smallest multiple of 10**-3 that is strictly greater than x."""
    x = _frac(x)
    k = math.floor(x * 1000) + 1
    return Decimal(k).scaleb(-3)


def floor_to_grid(x: Fraction, digits: int) -> Fraction:
    if x.denominator == 1 or _is_terminating(x) and len(format_rational(x).split(".")[-1]) <= digits:
        return x
    scale = 10 ** digits
    return Fraction(math.floor(x * scale), scale)


def ceil_to_grid(x: Fraction, digits: int) -> Fraction:
    if x.denominator == 1 or _is_terminating(x) and len(format_rational(x).split(".")[-1]) <= digits:
        return x
    scale = 10 ** digits
    return Fraction(math.ceil(x * scale), scale)
