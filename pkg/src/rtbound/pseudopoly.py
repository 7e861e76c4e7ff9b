"""Pseudo-polynomial algebra.

``ExtPoly`` is the working form: a sum of ``coeff * n**a * (n-1)**b * ln(n)**l``
with symbolic constant coefficients.  ``PseudoPoly`` is the resolved form
``sum a_i n**i ln n + sum b_i n**i`` with rational coefficients.

``to_inequality`` turns an over-approximation ``d * p_d + p_c + w * c`` and a
template ``d * f + c`` into a pair ``(p, q)`` such that ``d * p(n) >= q(n)``
implies the over-approximation stays below the template at ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, Mapping

from .errors import StructureError
from .numeric import (
    Constants,
    Interval,
    Rational,
    SymConst,
    ceil_to_grid,
    default_precision,
    floor_to_grid,
    format_decimal,
    ln_interval,
)
from .shapes import BoundShape

if TYPE_CHECKING:
    from .overapprox import OvApPair
    from .recdsl import Coefficient

Key = tuple[int, int, int]  # (power of n, power of n-1, power of ln n)

MIN_N_POWER = -2
MIN_PRED_POWER = -1


class ExtPoly:
    """Immutable sparse map ``(a, b, l) -> SymConst``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, SymConst | Rational] | None = None, *, check: bool = True):
        clean: dict[Key, SymConst] = {}
        for key, coef in (terms or {}).items():
            a, b, l = key
            if l not in (0, 1):
                raise ValueError(f"ln power must be 0 or 1, got {l}")
            if check and (a < MIN_N_POWER or b < MIN_PRED_POWER):
                raise ValueError(f"term n^{a}(n-1)^{b} is outside the supported denominators")
            coef = SymConst.of(coef)
            total = clean.get(key, SymConst()) + coef
            clean[key] = total
        self._terms = {k: v for k, v in sorted(clean.items()) if not v.is_zero()}

    @classmethod
    def term(cls, coef: SymConst | Rational, a: int = 0, b: int = 0, l: int = 0) -> "ExtPoly":
        return cls({(a, b, l): coef})

    @classmethod
    def constant(cls, coef: SymConst | Rational) -> "ExtPoly":
        return cls.term(coef)

    @classmethod
    def from_shape(cls, f: BoundShape) -> "ExtPoly":
        power, logs = f.monomial
        return cls.term(1, power, 0, logs)

    @property
    def terms(self) -> dict[Key, SymConst]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Key, SymConst]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExtPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __add__(self, other: "ExtPoly") -> "ExtPoly":
        merged: dict[Key, SymConst] = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, SymConst()) + v
        return ExtPoly(merged, check=False)

    def __neg__(self) -> "ExtPoly":
        return ExtPoly({k: -v for k, v in self._terms.items()}, check=False)

    def __sub__(self, other: "ExtPoly") -> "ExtPoly":
        return self + (-other)

    def scale(self, k: SymConst | Rational) -> "ExtPoly":
        k = SymConst.of(k)
        return ExtPoly({key: v * k for key, v in self._terms.items()}, check=False)

    def shift(self, a: int, b: int = 0) -> "ExtPoly":
        """Multiply by ``n**a * (n-1)**b``."""
        return ExtPoly({(ka + a, kb + b, l): v for (ka, kb, l), v in self._terms.items()}, check=False)

    def expand(self) -> "ExtPoly":
        """Rewrite every ``(n-1)**b`` with ``b >= 0`` as a polynomial in ``n``."""
        out: dict[Key, SymConst] = {}
        for (a, b, l), v in self._terms.items():
            if b < 0:
                raise StructureError("cannot expand a negative power of (n-1)")
            for k in range(b + 1):
                coef = v * (math.comb(b, k) * (-1) ** (b - k))
                key = (a + k, 0, l)
                out[key] = out.get(key, SymConst()) + coef
        return ExtPoly(out, check=False)

    def min_powers(self) -> tuple[int, int]:
        if not self._terms:
            return (0, 0)
        return min(a for a, _, _ in self._terms), min(b for _, b, _ in self._terms)

    def evaluate(
        self,
        n: int | Interval,
        constants: Constants | None = None,
        ln_n: Interval | None = None,
    ) -> Interval:
        """Enclosure of the value at ``n`` (``ln_n`` overrides the log of ``n``)."""
        constants = constants or Constants.tight()
        n_val = Interval.coerce(n)
        if ln_n is None:
            if not isinstance(n, int):
                raise ValueError("pass ln_n when n is not an integer")
            ln_n = ln_interval(n)
        total = Interval.point(0)
        for (a, b, l), v in self._terms.items():
            piece = v.interval(constants) * (n_val ** a) * ((n_val - 1) ** b)
            if l:
                piece = piece * ln_n
            total = total + piece
        return total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"({v})*{_monomial_text(k)}" for k, v in self._terms.items())

    def __repr__(self) -> str:
        return f"ExtPoly({self})"


def _monomial_text(key: Key) -> str:
    a, b, l = key
    parts = []
    if a:
        parts.append("n" if a == 1 else f"n^{a}")
    if b:
        parts.append("(n-1)" if b == 1 else f"(n-1)^{b}")
    if l:
        parts.append("ln n")
    return "*".join(parts) or "1"


# --------------------------------------------------------------------------
# Resolved pseudo-polynomials


def _trim(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    coeffs = tuple(Fraction(c) for c in coeffs)
    end = len(coeffs)
    while end > 1 and coeffs[end - 1] == 0:
        end -= 1
    return coeffs[:end] if end else (Fraction(0),)


@dataclass(frozen=True, slots=True)
class PseudoPoly:
    """``sum log_coeffs[i] * n**i * ln n + sum plain_coeffs[i] * n**i``."""

    log_coeffs: tuple[Fraction, ...] = (Fraction(0),)
    plain_coeffs: tuple[Fraction, ...] = (Fraction(0),)

    def __post_init__(self) -> None:
        object.__setattr__(self, "log_coeffs", _trim(self.log_coeffs or (0,)))
        object.__setattr__(self, "plain_coeffs", _trim(self.plain_coeffs or (0,)))

    @classmethod
    def from_dict(cls, logs: Mapping[int, Rational], plain: Mapping[int, Rational]) -> "PseudoPoly":
        def dense(m: Mapping[int, Rational]) -> tuple[Fraction, ...]:
            if not m:
                return (Fraction(0),)
            if min(m) < 0:
                raise StructureError("pseudo-polynomial with a negative power")
            out = [Fraction(0)] * (max(m) + 1)
            for i, v in m.items():
                out[i] += Fraction(v)
            return tuple(out)

        return cls(dense(logs), dense(plain))

    def is_zero(self) -> bool:
        return not any(self.log_coeffs) and not any(self.plain_coeffs)

    @property
    def k(self) -> int:
        return len(self.log_coeffs) - 1

    @property
    def ell(self) -> int:
        return len(self.plain_coeffs) - 1

    def degree(self) -> Fraction | None:
        """``k + 1/2`` when the top term carries ``ln n``, else ``ell``; None for 0."""
        if self.is_zero():
            return None
        a_k = self.log_coeffs[-1]
        if self.k >= self.ell and a_k != 0:
            return Fraction(2 * self.k + 1, 2)
        return Fraction(self.ell)

    def leading(self) -> tuple[int, int, Fraction]:
        """``(power, has_log, coefficient)`` of the leading term."""
        if self.is_zero():
            return (0, 0, Fraction(0))
        a_k = self.log_coeffs[-1]
        if self.k >= self.ell and a_k != 0:
            return (self.k, 1, a_k)
        return (self.ell, 0, self.plain_coeffs[-1])

    @property
    def leading_coefficient(self) -> Fraction:
        return self.leading()[2]

    def coefficients(self) -> Iterator[tuple[int, int, Fraction]]:
        """All ``(power, has_log, coefficient)`` triples, zeros included."""
        for i, c in enumerate(self.log_coeffs):
            yield i, 1, c
        for i, c in enumerate(self.plain_coeffs):
            yield i, 0, c

    def evaluate(self, n: int, prec: int | None = None) -> Interval:
        ln_n = ln_interval(n, prec)
        total = Interval.point(0)
        for i, has_log, c in self.coefficients():
            if c:
                term = Interval.point(c * Fraction(n) ** i)
                total = total + (term * ln_n if has_log else term)
        return total

    def evaluate_float(self, n: float) -> float:
        ln_n = math.log(n)
        return sum(float(c) * n ** i * (ln_n if has_log else 1.0) for i, has_log, c in self.coefficients() if c)

    def to_json(self, digits: int = 17) -> dict[str, list[str]]:
        return {
            "log": [format_decimal(c, digits) for c in self.log_coeffs],
            "plain": [format_decimal(c, digits) for c in self.plain_coeffs],
        }

    def __str__(self) -> str:
        parts = []
        for i, has_log, c in sorted(self.coefficients(), key=lambda t: (-(2 * t[0] + t[1]))):
            if not c:
                continue
            mono = "*".join(
                p for p in (("n" if i == 1 else f"n^{i}") if i else "", "ln n" if has_log else "") if p
            )
            coef = format_decimal(c, 6)
            parts.append(coef if not mono else (mono if c == 1 else f"-{mono}" if c == -1 else f"{coef}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def degree(p: PseudoPoly) -> Fraction | None:
    return p.degree()


def leading(p: PseudoPoly) -> tuple[str, Fraction]:
    power, has_log, coef = p.leading()
    mono = f"n^{power}" + (" ln n" if has_log else "")
    return mono, coef


# --------------------------------------------------------------------------
# Inequality construction


def resolution_digits(prec: int | None = None) -> int:
    """Decimal places kept when a resolved constant is snapped to a grid."""
    prec = default_precision() if prec is None else prec
    return math.ceil(prec * math.log10(2)) + 2


@dataclass(frozen=True, slots=True)
class Inequality:
    """``d * p(n) >= q(n)`` together with the multiplier used to clear fractions."""

    p: PseudoPoly
    q: PseudoPoly
    multiplier: tuple[int, int]
    p_symbolic: ExtPoly = field(compare=False)
    q_symbolic: ExtPoly = field(compare=False)

    def __iter__(self):
        return iter((self.p, self.q))

    @property
    def multiplier_text(self) -> str:
        a, b = self.multiplier
        return _monomial_text((a, b, 0))


def _relax_mixed(p0: ExtPoly) -> ExtPoly:
    """Replace ``-k / (n (n-1))`` (k > 0) by ``-2k / n**2``, valid for n >= 2."""
    out: dict[Key, SymConst] = {}
    for (a, b, l), v in p0.items():
        key = (a, b, l)
        if b == -1 and a == -1 and l == 0 and v.is_rational() and v.rational() < 0:
            key, v = (-2, 0, 0), v * 2
        out[key] = out.get(key, SymConst()) + v
    return ExtPoly(out)


def _resolve(poly: ExtPoly, constants: Constants, upward: bool, digits: int) -> PseudoPoly:
    logs: dict[int, Fraction] = {}
    plain: dict[int, Fraction] = {}
    for (a, b, l), v in poly.items():
        if b != 0 or a < 0:
            raise StructureError("pseudo-polynomial still has a denominator after clearing")
        if v.is_rational():
            value = v.rational()
        else:
            iv = v.interval(constants)
            value = ceil_to_grid(iv.hi, digits) if upward else floor_to_grid(iv.lo, digits)
        target = logs if l else plain
        target[a] = target.get(a, Fraction(0)) + value
    return PseudoPoly.from_dict(logs, plain)


def to_inequality(
    ov: "OvApPair",
    f: BoundShape,
    c: "Coefficient",
    constants: Constants | None = None,
) -> Inequality:
    """Rearrange ``OvAp <= d * f + c`` into ``d * p >= q`` with a minimal multiplier.

    Symbolic constants in ``p`` resolve to lower endpoints and those in ``q`` to
    upper endpoints.  Both sides are multiplied by a positive quantity and
    every monomial ``n**i`` or ``n**i ln n`` is non-negative for n >= 1, so the
    rounding can only make ``d * p >= q`` harder to satisfy.
    """
    constants = constants or Constants.tight()
    c_sym = c.sym()
    p0 = _relax_mixed(ExtPoly.from_shape(f) - ov.p_d)
    q0 = ov.p_c + ExtPoly.constant(ov.c_weight * c_sym - c_sym)

    a_min = min(p0.min_powers()[0], q0.min_powers()[0])
    b_min = min(p0.min_powers()[1], q0.min_powers()[1])
    mult = (max(0, -a_min), max(0, -b_min))
    p_sym = p0.shift(*mult).expand()
    q_sym = q0.shift(*mult).expand()

    digits = resolution_digits()
    p = _resolve(p_sym, constants, upward=False, digits=digits)
    q = _resolve(q_sym, constants, upward=True, digits=digits)
    if any(coef < 0 for _, _, coef in q.coefficients()):
        raise StructureError(f"q has a negative coefficient: {q}")
    if q.leading_coefficient <= 0:
        raise StructureError("q has no positive leading coefficient")
    return Inequality(p, q, mult, p_sym, q_sym)

