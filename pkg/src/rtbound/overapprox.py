"""Sound over-approximations of ``Subst(expr, d*f + c)``.

Each T-bearing atom applied to a bound shape has a fixed upper estimate (the
cell table below).  Averaged sums of the constant ``c`` are bounded by ``c``
itself, so every T-term contributes ``coefficient * cell`` to the part scaled
by ``d`` and ``coefficient * c`` to the constant part.

The module also exposes the three integral primitives and numeric checks of
the floor/ceil, predecessor and summation inequalities the cells rest on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .numeric import Constants, Fx, Interval, SymConst, default_precision, ln_scaled, ln_scaled_fast
from .pseudopoly import ExtPoly
from .recdsl import Atom, RecExpr
from .shapes import BoundShape

__all__ = [
    "BoundShape",
    "OvApPair",
    "cell",
    "ovap",
    "gamma_ln",
    "gamma_inv",
    "gamma_nln",
    "atom_poly",
    "check_inequalities",
    "inequality_sweep",
    "InequalityCheck",
]

_LN2 = SymConst.ln2()
F = Fraction


def _poly(*terms: tuple[SymConst | Fraction | int, int, int, int]) -> ExtPoly:
    out = ExtPoly()
    for coef, a, b, l in terms:
        out = out + ExtPoly.term(coef, a, b, l)
    return out


# (coef, power of n, power of n-1, power of ln n)
_CELLS: dict[tuple[BoundShape, Atom], ExtPoly] = {
    (BoundShape.LOG_N, Atom.T_PRED): _poly((1, 0, 0, 1), (-1, -1, 0, 0)),
    (BoundShape.LOG_N, Atom.T_FLOOR_HALF): _poly((1, 0, 0, 1), (-_LN2, 0, 0, 0)),
    (BoundShape.LOG_N, Atom.T_CEIL_HALF): _poly((1, 0, 0, 1), (-_LN2, 0, 0, 0), (1, -1, 0, 0)),
    (BoundShape.LOG_N, Atom.AVG_ALL): _poly(
        (1, 0, 0, 1), (-1, 0, 0, 0), (F(-1, 2), -1, 0, 1), (F(13, 12), -1, 0, 0)
    ),
    (BoundShape.LOG_N, Atom.AVG_HALVES): _poly(
        (1, 0, 0, 1), (_LN2 - 1, 0, 0, 0), (F(1, 2), -1, 0, 1), (F("0.6672"), -1, 0, 0), (F(1, 2), -2, 0, 0)
    ),
    (BoundShape.LINEAR, Atom.T_PRED): _poly((1, 1, 0, 0), (-1, 0, 0, 0)),
    (BoundShape.LINEAR, Atom.T_FLOOR_HALF): _poly((F(1, 2), 1, 0, 0)),
    (BoundShape.LINEAR, Atom.T_CEIL_HALF): _poly((F(1, 2), 1, 0, 0), (F(1, 2), 0, 0, 0)),
    (BoundShape.LINEAR, Atom.AVG_ALL): _poly((F(1, 2), 1, 0, 0), (F(-1, 2), 0, 0, 0)),
    (BoundShape.LINEAR, Atom.AVG_HALVES): _poly((F(3, 4), 1, 0, 0), (F(-1, 4), -1, 0, 0)),
    (BoundShape.N_LOG_N, Atom.T_PRED): _poly((1, 1, 0, 1), (-1, 0, 0, 1), (-1, 0, 0, 0), (1, -1, 0, 0)),
    (BoundShape.N_LOG_N, Atom.T_FLOOR_HALF): _poly((F(1, 2), 1, 0, 1), (-_LN2 * F(1, 2), 1, 0, 0)),
    (BoundShape.N_LOG_N, Atom.T_CEIL_HALF): _poly(
        (F(1, 2), 1, 0, 1),
        (-_LN2 * F(1, 2), 1, 0, 0),
        ((1 - _LN2) * F(1, 2), 0, 0, 0),
        (F(1, 2), 0, 0, 1),
        (F(1, 2), -1, 0, 0),
    ),
    (BoundShape.N_LOG_N, Atom.AVG_ALL): _poly(
        (F(1, 2), 1, 0, 1), (F(-1, 4), 1, 0, 0), (F(-1, 2), 0, 0, 1), (F(1, 12), -1, 0, 1), (F("0.5139"), -1, 0, 0)
    ),
    (BoundShape.N_LOG_N, Atom.AVG_HALVES): _poly(
        (F(3, 4), 1, 0, 1),
        (F("-0.2017"), 1, 0, 0),
        (F(-1, 2), 0, 0, 1),
        (F("-0.2698"), 0, 0, 0),
        (F(1, 8), -1, 0, 1),
        (F("1.6369"), -1, 0, 0),
        (F(1, 2), -1, -1, 0),
        (F(1, 4), -2, 0, 0),
    ),
}


def cell(f: BoundShape, t: Atom) -> ExtPoly:
    """Upper estimate of the T-atom ``t`` applied to ``f`` (for n >= 2)."""
    if not t.recursive:
        raise ValueError(f"{t} is not a T-bearing atom")
    return _CELLS[(f, t)]


def atom_poly(atom: Atom) -> ExtPoly:
    """A non-T atom as an ExtPoly in n."""
    table = {
        Atom.ONE: ExtPoly.constant(1),
        Atom.VAR: ExtPoly.term(1, 1),
        Atom.LN_VAR: ExtPoly.term(1, 0, 0, 1),
        Atom.VAR_LN_VAR: ExtPoly.term(1, 1, 0, 1),
        Atom.INV_VAR: ExtPoly.term(1, -1),
    }
    return table[atom]


def gamma_ln() -> ExtPoly:
    """``n ln n - n - ln n / 2 + 1``, tracking ``sum_{j<n} ln j`` up to a constant."""
    return _poly((1, 1, 0, 1), (-1, 1, 0, 0), (F(-1, 2), 0, 0, 1), (1, 0, 0, 0))


def gamma_inv() -> ExtPoly:
    """``ln n``, tracking ``sum_{j<n} 1/j`` up to a constant."""
    return ExtPoly.term(1, 0, 0, 1)


def gamma_nln() -> ExtPoly:
    """``n^2 ln n / 2 - n^2 / 4 - n ln n / 2 + ln n / 12 + 1/4``, tracking ``sum_{j<n} j ln j``."""
    return _poly((F(1, 2), 2, 0, 1), (F(-1, 4), 2, 0, 0), (F(-1, 2), 1, 0, 1), (F(1, 12), 0, 0, 1), (F(1, 4), 0, 0, 0))


# Gap ranges: gamma(n) - sum in [lo, hi] for n >= 2.
HARMONIC_GAP = Interval(F("-0.7552"), F(-1, 6))
LOG_SUM_GAP = Interval(F(-1, 12), F("0.2701"))
NLOG_SUM_GAP = Interval(F(-19, 72), F("0.1575"))


@dataclass(frozen=True, slots=True)
class OvApPair:
    """``OvAp(expr, d*f + c)(n) = d * p_d(n) + p_c(n) + c_weight * c``."""

    p_d: ExtPoly
    p_c: ExtPoly
    c_weight: SymConst

    def p_c_with(self, c: SymConst | Fraction | int) -> ExtPoly:
        """The d-free part with the base constant folded in."""
        return self.p_c + ExtPoly.constant(self.c_weight * SymConst.of(c))

    def evaluate(self, d: Fraction, c: Interval, n: int, constants: Constants | None = None) -> Interval:
        constants = constants or Constants.tight()
        weight = self.c_weight.interval(constants)
        return self.p_d.evaluate(n, constants) * d + self.p_c.evaluate(n, constants) + weight * c


def ovap(expr: RecExpr, f: BoundShape) -> OvApPair:
    p_d = ExtPoly()
    p_c = ExtPoly()
    c_weight = SymConst()
    for coef, atom in expr.terms:
        k = coef.sym()
        if atom.recursive:
            p_d = p_d + cell(f, atom).scale(k)
            c_weight = c_weight + k
        else:
            p_c = p_c + atom_poly(atom).scale(k)
    return OvApPair(p_d, p_c, c_weight)


# --------------------------------------------------------------------------
# Numeric checks of the underlying inequalities


@dataclass(frozen=True, slots=True)
class InequalityCheck:
    """One inequality at one n.

    ``status`` is ``"certified"`` when the enclosures prove it, ``"tight"``
    when the enclosures overlap (equality cases), ``"violated"`` otherwise.
    """

    name: str
    n: int
    status: str
    lhs: Interval
    rhs: Interval

    @property
    def passed(self) -> bool:
        return self.status != "violated"


def _leq(name: str, n: int, lhs: Interval, rhs: Interval) -> InequalityCheck:
    if lhs.hi <= rhs.lo:
        status = "certified"
    elif lhs.lo <= rhs.hi:
        status = "tight"
    else:
        status = "violated"
    return InequalityCheck(name, n, status, lhs, rhs)


def _within(name: str, n: int, value: Interval, target: Interval) -> InequalityCheck:
    if target.contains(value):
        status = "certified"
    elif target.intersects(value):
        status = "tight"
    else:
        status = "violated"
    return InequalityCheck(name, n, status, value, target)


@dataclass
class _Sums:
    """Scaled enclosures of the three prefix sums over j = 1..n-1."""

    harmonic: tuple[int, int]
    logs: tuple[int, int]
    nlogs: tuple[int, int]


def _iter_sums(ns: Iterable[int], prec: int, fast: bool) -> dict[int, _Sums]:
    wanted = sorted(set(ns))
    if not wanted:
        return {}
    bracket = ln_scaled_fast if fast else ln_scaled
    one = 1 << prec
    h_lo = h_hi = l_lo = l_hi = j_lo = j_hi = 0
    out: dict[int, _Sums] = {}
    idx = 0
    for j in range(1, wanted[-1] + 1):
        while idx < len(wanted) and wanted[idx] == j:
            out[j] = _Sums((h_lo, h_hi), (l_lo, l_hi), (j_lo, j_hi))
            idx += 1
        h_lo += one // j
        h_hi += -((-one) // j)
        lo, hi = bracket(j, prec)
        l_lo += lo
        l_hi += hi
        j_lo += j * lo
        j_hi += j * hi
    return out


def _iv(pair: tuple[int, int], prec: int) -> Interval:
    return Fx(pair[0], pair[1], prec).to_interval()


def _checks_at(n: int, sums: dict[int, _Sums], prec: int, fast: bool, constants: Constants) -> list[InequalityCheck]:
    bracket = ln_scaled_fast if fast else ln_scaled

    def ln(k: int) -> Interval:
        return _iv(bracket(k, prec), prec)

    ln2 = constants.ln2
    ln_n = ln(n)
    fl, cl = n // 2, (n + 1) // 2
    inv = Interval.point(F(1, n))
    inv_pred = Interval.point(F(1, n - 1))
    s = sums[n]
    harmonic, logs, nlogs = _iv(s.harmonic, prec), _iv(s.logs, prec), _iv(s.nlogs, prec)

    checks = [
        _leq("floor-half lower", n, ln_n - ln2 - inv_pred, ln(fl)),
        _leq("floor-half upper", n, ln(fl), ln_n - ln2),
        _leq("ceil-half lower", n, ln_n - ln2, ln(cl)),
        _leq("ceil-half upper", n, ln(cl), ln_n - ln2 + inv),
        _leq("predecessor lower", n, ln_n - inv_pred, ln(n - 1)),
        _leq("predecessor upper", n, ln(n - 1), ln_n - inv),
        _within("harmonic gap", n, ln_n - harmonic, HARMONIC_GAP),
        _within("log-sum gap", n, gamma_ln().evaluate(n, constants, ln_n) - logs, LOG_SUM_GAP),
        _within("nlog-sum gap", n, gamma_nln().evaluate(n, constants, ln_n) - nlogs, NLOG_SUM_GAP),
    ]
    if n >= 4:
        # sum_{j=ceil(n/2)}^{n-1} ln j + sum_{j=floor(n/2)}^{n-1} ln j
        composite = logs * 2 - _iv(sums[cl].logs, prec) - _iv(sums[fl].logs, prec)
        bound = (
            ln_n * n
            - (1 - ln2) * n
            + ln_n * F(1, 2)
            + F("0.6672")
            + Interval.point(F(1, 2 * n))
        )
        checks.append(_leq("halves log-sum composite", n, composite, bound))
    return checks


def check_inequalities(n: int, prec: int | None = None, constants: Constants | None = None) -> list[InequalityCheck]:
    """Check every floor/ceil, predecessor and summation inequality at ``n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    prec = default_precision() if prec is None else prec
    constants = constants or Constants.tight(prec)
    sums = _iter_sums((n, n // 2, (n + 1) // 2), prec, fast=False)
    return _checks_at(n, sums, prec, False, constants)


def inequality_sweep(ns: Iterable[int], prec: int | None = None) -> list[InequalityCheck]:
    """``check_inequalities`` over many n, sharing one pass of prefix sums."""
    prec = default_precision() if prec is None else prec
    ns = sorted(set(ns))
    if ns and ns[0] < 2:
        raise ValueError("n must be at least 2")
    constants = Constants.tight(prec)
    needed = set(ns)
    for n in ns:
        needed.update((n // 2, (n + 1) // 2))
    sums = _iter_sums(needed, prec, fast=True)
    out: list[InequalityCheck] = []
    for n in ns:
        out.extend(_checks_at(n, sums, prec, True, constants))
    return out
