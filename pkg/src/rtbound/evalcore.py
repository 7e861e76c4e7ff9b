"""Dynamic-programming evaluation of recurrences and the empirical constants d_z.

Relations without ``ln`` or ``e`` can be evaluated exactly with ``Fraction``.
Everything else runs on ``Fx`` enclosures, which are also used for long exact
tables because big rationals get slow quickly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Sequence, Union

from .errors import ResourceError
from .numeric import Fx, Interval, default_precision, ln_scaled, round_up_milli
from .recdsl import Atom, BiRecurrence, Coefficient, RecExpr, UniRecurrence
from .shapes import BoundShape

DEFAULT_CAP = 10**7
EXACT_AUTO_LIMIT = 400

Value = Union[Fraction, Fx]


class _Exact:
    exact = True
    zero = Fraction(0)

    def num(self, x: int | Fraction) -> Fraction:
        return Fraction(x)

    def coef(self, c: Coefficient) -> Fraction:
        if c.euler:
            raise ValueError("exact evaluation cannot represent e")
        return c.rational

    def ln(self, n: int) -> Fraction:
        if n == 1:
            return Fraction(0)
        raise ValueError("exact evaluation cannot represent ln")

    def div_int(self, x: Fraction, k: int) -> Fraction:
        return x / k


class _Fixed:
    exact = False

    def __init__(self, prec: int):
        self.prec = prec
        self.zero = Fx(0, 0, prec)

    def num(self, x: int | Fraction) -> Fx:
        return Fx.of(x, self.prec)

    def coef(self, c: Coefficient) -> Fraction | Fx:
        return Fx.euler(self.prec) * c.rational if c.euler else c.rational

    def ln(self, n: int) -> Fx:
        return Fx.ln(n, self.prec)

    def div_int(self, x: Fx, k: int) -> Fx:
        return x.div_int(k)


def _atom_value(atom: Atom, n: int, values: Sequence[Value], prefix: Sequence[Value], ar) -> Value:
    """Value of one atom at ``n``; ``values[j]`` is T(j), ``prefix[j]`` is T(1)+...+T(j)."""
    if atom is Atom.ONE:
        return ar.num(1)
    if atom is Atom.VAR:
        return ar.num(n)
    if atom is Atom.LN_VAR:
        return ar.ln(n)
    if atom is Atom.VAR_LN_VAR:
        return ar.ln(n) * n
    if atom is Atom.INV_VAR:
        return ar.num(Fraction(1, n))
    if atom is Atom.T_PRED:
        return values[n - 1]
    if atom is Atom.T_FLOOR_HALF:
        return values[n // 2]
    if atom is Atom.T_CEIL_HALF:
        return values[(n + 1) // 2]
    if atom is Atom.AVG_ALL:
        return ar.div_int(prefix[n - 1], n)
    if atom is Atom.AVG_HALVES:
        return ar.div_int(prefix[n - 1] * 2 - prefix[(n + 1) // 2 - 1] - prefix[n // 2 - 1], n)
    raise AssertionError(atom)


def _plain_value(expr: RecExpr, n: int, ar) -> Value:
    total = ar.zero
    for coef, atom in expr.terms:
        total = total + ar.coef(coef) * _atom_value(atom, n, (), (), ar)
    return total


def _compiled(expr: RecExpr, ar) -> list[tuple[Fraction | Fx, Atom]]:
    return [(ar.coef(c), a) for c, a in expr.terms]


def _run_scaled(expr: RecExpr, upto: int, prec: int, first: Fx) -> list[Fx]:
    """``_run`` for fixed point on bare ``(lo, hi)`` integers.

    Every coefficient and atom value is non-negative, so products round
    ``lo * lo`` down and ``hi * hi`` up without sign cases.
    """
    one = 1 << prec
    terms = []
    for coef, atom in expr.terms:
        c = Fx.euler(prec) * coef.rational if coef.euler else Fx.of(coef.rational, prec)
        terms.append((atom, c.lo, c.hi))
    lo_vals, hi_vals = [0, first.lo], [0, first.hi]
    lo_sum, hi_sum = [0, first.lo], [0, first.hi]
    for n in range(2, upto + 1):
        t_lo = t_hi = 0
        for atom, c_lo, c_hi in terms:
            if atom is Atom.ONE:
                v_lo = v_hi = one
            elif atom is Atom.VAR:
                v_lo = v_hi = n << prec
            elif atom is Atom.LN_VAR:
                v_lo, v_hi = ln_scaled(n, prec)
            elif atom is Atom.VAR_LN_VAR:
                v_lo, v_hi = ln_scaled(n, prec)
                v_lo, v_hi = v_lo * n, v_hi * n
            elif atom is Atom.INV_VAR:
                v_lo, v_hi = one // n, -(-one // n)
            elif atom is Atom.T_PRED:
                v_lo, v_hi = lo_vals[n - 1], hi_vals[n - 1]
            elif atom is Atom.T_FLOOR_HALF:
                v_lo, v_hi = lo_vals[n // 2], hi_vals[n // 2]
            elif atom is Atom.T_CEIL_HALF:
                v_lo, v_hi = lo_vals[(n + 1) // 2], hi_vals[(n + 1) // 2]
            elif atom is Atom.AVG_ALL:
                v_lo, v_hi = lo_sum[n - 1] // n, -(-hi_sum[n - 1] // n)
            else:
                a, b = (n + 1) // 2 - 1, n // 2 - 1
                v_lo = (2 * lo_sum[n - 1] - lo_sum[a] - lo_sum[b]) // n
                v_hi = -(-(2 * hi_sum[n - 1] - hi_sum[a] - hi_sum[b]) // n)
            t_lo += (c_lo * v_lo) >> prec
            t_hi += -((-(c_hi * v_hi)) >> prec)
        lo_vals.append(t_lo)
        hi_vals.append(t_hi)
        lo_sum.append(lo_sum[-1] + t_lo)
        hi_sum.append(hi_sum[-1] + t_hi)
    return [Fx(lo, hi, prec) for lo, hi in zip(lo_vals, hi_vals)]


def _run(expr: RecExpr, upto: int, ar, first: Value, extra: Callable[[int], Value] | None = None) -> list[Value]:
    """``values[1..upto]`` of T(1) = first, T(n) = expr(n) + extra(n)."""
    if extra is None and not ar.exact:
        return _run_scaled(expr, upto, ar.prec, first)
    values: list[Value] = [ar.zero, first]
    prefix: list[Value] = [ar.zero, first]
    terms = _compiled(expr, ar)
    for n in range(2, upto + 1):
        total = ar.zero
        for coef, atom in terms:
            total = total + coef * _atom_value(atom, n, values, prefix, ar)
        if extra is not None:
            total = total + extra(n)
        values.append(total)
        prefix.append(prefix[-1] + total)
    return values


@dataclass(frozen=True, slots=True)
class EvalTable:
    """``values[n]`` for ``1 <= n <= limit``; index 0 is padding."""

    raw: tuple[Value, ...]
    exact: bool
    limit: int
    prec: int | None = None

    def __len__(self) -> int:
        return self.limit

    def __getitem__(self, n: int) -> Fraction | Interval:
        if not 1 <= n <= self.limit:
            raise IndexError(n)
        v = self.raw[n]
        return v if self.exact else v.to_interval()

    def interval(self, n: int) -> Interval:
        v = self[n]
        return v if isinstance(v, Interval) else Interval.point(v)

    def upper(self, n: int) -> Fraction:
        v = self.raw[n]
        return v if self.exact else v.upper()

    def lower(self, n: int) -> Fraction:
        v = self.raw[n]
        return v if self.exact else v.lower()

    @property
    def values(self) -> list[Fraction | Interval]:
        return [self[n] for n in range(1, self.limit + 1)]


def _check_size(upto: int, cap: int) -> None:
    if upto < 1:
        raise ValueError("upto must be at least 1")
    if upto > cap:
        raise ResourceError(f"requested {upto} entries, cap is {cap}")


def _arith(exact: bool, prec: int | None):
    return _Exact() if exact else _Fixed(default_precision() if prec is None else prec)


_cache: dict[tuple, tuple[Value, ...]] = {}
_cache_lock = threading.Lock()
_CACHE_SLOTS = 32


def eval_uni(
    rec: UniRecurrence,
    upto: int,
    *,
    exact: bool | None = None,
    prec: int | None = None,
    cap: int = DEFAULT_CAP,
) -> EvalTable:
    """T(1..upto) by dynamic programming.

    ``exact=None`` picks exact rationals for short tables of relations without
    ``ln`` or ``e`` and fixed-point enclosures otherwise.
    """
    _check_size(upto, cap)
    if exact is None:
        exact = not rec.has_transcendental() and upto <= EXACT_AUTO_LIMIT
    if exact and rec.has_transcendental():
        raise ValueError("relation uses ln or e; exact evaluation is impossible")
    prec = None if exact else (default_precision() if prec is None else prec)
    key = (rec, exact, prec)
    with _cache_lock:
        cached = _cache.get(key)
    if cached is None or len(cached) <= upto:
        ar = _arith(exact, prec)
        first = ar.coef(rec.base_cost)
        if isinstance(first, Fraction) and not exact:
            first = ar.num(first)
        cached = tuple(_run(rec.expr, upto, ar, first))
        with _cache_lock:
            if len(_cache) >= _CACHE_SLOTS:
                _cache.pop(next(iter(_cache)))
            _cache[key] = cached
    return EvalTable(cached, exact, upto, prec)


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def factor_value(expr: RecExpr, n: int, *, exact: bool | None = None, prec: int | None = None) -> Fraction | Interval:
    """Value of a T-free expression (an h or b factor) at ``n``."""
    if exact is None:
        exact = not expr.has_transcendental()
    ar = _arith(exact, prec)
    v = _plain_value(expr, n, ar)
    return v if exact else v.to_interval()


def eval_bi_row(
    rec: BiRecurrence,
    n: int,
    upto: int,
    *,
    exact: bool | None = None,
    prec: int | None = None,
    cap: int = DEFAULT_CAP,
) -> EvalTable:
    """T(n, 1..upto) computed directly from the bivariate relation."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_size(upto, cap)
    transcendental = (
        rec.e_part.has_transcendental()
        or rec.h_part.has_transcendental()
        or rec.b_part.has_transcendental()
        or rec.base_cost.euler
    )
    if exact is None:
        exact = not transcendental and upto <= EXACT_AUTO_LIMIT
    if exact and transcendental:
        raise ValueError("relation uses ln or e; exact evaluation is impossible")
    ar = _arith(exact, prec)
    h_n = _plain_value(rec.h_part, n, ar)
    first = h_n * ar.coef(rec.base_cost)
    if isinstance(first, Fraction) and not exact:
        first = ar.num(first)

    def product(m: int) -> Value:
        return h_n * _plain_value(rec.b_part, m, ar)

    values = _run(rec.e_part, upto, ar, first, product)
    return EvalTable(tuple(values), exact, upto, None if exact else ar.prec)


def eval_bi(rec: BiRecurrence, n: int, m: int, **kwargs) -> Interval:
    """T(n, m) as an interval (a point when exact)."""
    return eval_bi_row(rec, n, m, **kwargs).interval(m)


# --------------------------------------------------------------------------
# Ratios against a bound shape


def _shape_lower(f: BoundShape, n: int, prec: int) -> Fraction:
    power, logs = f.monomial
    base = Fraction(n) ** power
    if logs:
        return base * Fraction(ln_scaled(n, prec)[0], 1 << prec)
    return base


def max_ratio(table: EvalTable, f: BoundShape, c: Fraction, lo: int, hi: int) -> tuple[Fraction, int | None]:
    """Upper bound on ``max (T(n) - c) / f(n)`` over ``lo <= n <= hi``.

    ``c`` must be a lower bound of the base cost.  Terms with ``T(n) <= c``
    contribute nothing; the result is 0 when no term is positive.
    """
    prec = table.prec or default_precision()
    best, where = Fraction(0), None
    for n in range(max(lo, 2), hi + 1):
        num = table.upper(n) - c
        if num <= 0:
            continue
        ratio = num / _shape_lower(f, n, prec)
        if ratio > best:
            best, where = ratio, n
    return best, where


def d_z(rec: UniRecurrence, f: BoundShape, z: int) -> Decimal:
    """``max_{2<=n<=z} (T(n) - c) / f(n)`` rounded up at 10**-3."""
    if z < 2:
        raise ValueError("z must be at least 2")
    table = eval_uni(rec, z)
    best, _ = max_ratio(table, f, rec.base_cost.lower_bound(), 2, z)
    return round_up_milli(best)


def first_violation(
    table: EvalTable,
    f: BoundShape,
    d: Fraction,
    c: Fraction,
    lo: int = 2,
) -> int | None:
    """Smallest n in ``[lo, limit]`` where ``T(n) <= d * f(n) + c`` is not certified.

    ``c`` must be a lower bound of the base cost.  Fixed-point tables are
    checked in scaled integers so that 10**5 entries take well under a second.
    """
    d = Fraction(d)
    c = Fraction(c)
    if table.exact:
        prec = default_precision()
        for n in range(max(lo, 2), table.limit + 1):
            if table.raw[n] > d * _shape_lower(f, n, prec) + c:
                return n
        return None
    prec = table.prec
    power, logs = f.monomial
    dn, dd = d.numerator, d.denominator
    # compare T_hi * dd * c.den <= dn * f_lo * c.den + c.num * dd * 2**prec
    c_num, c_den = c.numerator, c.denominator
    shift = 1 << prec
    for n in range(max(lo, 2), table.limit + 1):
        f_lo = ln_scaled(n, prec)[0] if logs else shift
        if power:
            f_lo *= n
        lhs = table.raw[n].hi * dd * c_den
        rhs = dn * f_lo * c_den + c_num * dd * shift
        if lhs > rhs:
            return n
    return None
