"""Decide and synthesize bounds ``T(n) <= d * f(n) + c``.

Decision: over-approximate the recurrence with the template plugged in,
rearrange into ``d * p(n) >= q(n)`` and compare leading terms.  Synthesis then
finds an explicit ``N`` after which ``q/p`` is within ``eps`` of its limit,
and takes ``d`` large enough for both that tail and the exact prefix below N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction

import numpy as np

from .errors import ResourceError
from .evalcore import DEFAULT_CAP, eval_uni, first_violation, max_ratio
from .numeric import Constants, Interval, ln_interval, round_above_milli, round_up_milli
from .overapprox import ovap
from .pseudopoly import Inequality, PseudoPoly, to_inequality
from .recdsl import BiRecurrence, RecExpr, Recurrence, UniRecurrence
from .shapes import SHAPE_ORDER, BoundShape

YES = "yes"
FAIL = "fail"

_SCREEN_CHUNK = 1 << 16
_SCREEN_SLACK = 1e-9


@dataclass(frozen=True)
class AnalysisResult:
    verdict: str
    shape: BoundShape
    shape_label: str
    base_cost: Fraction | str
    epsilon: Fraction | None = None
    d: Decimal | None = None
    threshold_N: int | None = None
    p: PseudoPoly | None = None
    q: PseudoPoly | None = None
    prefix_max: Decimal | None = None
    prefix_argmax: int | None = None
    threshold_d: Decimal | None = None
    multiplier: tuple[int, int] | None = None
    h_label: str | None = None
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.verdict == YES

    def bound_text(self) -> str:
        if self.d is None:
            return ""
        if self.h_label is None:
            return f"T(n) <= {self.d} * {self.shape_label} + {self.base_cost}"
        h = "" if self.h_label == "1" else f" * {self.h_label}"
        return f"T(n,m) <= {self.d} * {self.shape_label} + {self.base_cost}{h}"


def _c_lower(rec: UniRecurrence, constants: Constants) -> Fraction:
    return rec.base_cost.sym().interval(constants).lo


def _ineq_ratio(p: PseudoPoly, q: PseudoPoly) -> tuple[bool, Fraction]:
    """``(deg p == deg q, C_q / C_p)``."""
    same = p.degree() == q.degree()
    return same, q.leading_coefficient / p.leading_coefficient


def _build(rec: UniRecurrence, f: BoundShape, constants: Constants) -> tuple[Inequality, bool, list[str]]:
    ineq = to_inequality(ovap(rec.expr, f), f, rec.base_cost, constants)
    p, q = ineq.p, ineq.q
    c_p = p.leading_coefficient
    deg_p, deg_q = p.degree(), q.degree()
    notes = [
        f"multiplier {ineq.multiplier_text}",
        f"p = {p}",
        f"q = {q}",
        f"deg p = {deg_p}, deg q = {deg_q}, C_p = {float(c_p):.6g}",
    ]
    ok = c_p > 0 and deg_p is not None and deg_p >= deg_q
    if not ok:
        notes.append("C_p <= 0" if c_p <= 0 else "deg p < deg q")
    return ineq, ok, notes


def uni_dec(rec: UniRecurrence, f: BoundShape, constants: Constants | None = None) -> AnalysisResult:
    """``yes`` when some ``d * f + c`` passes the inductive check; ``fail`` means unknown."""
    constants = constants or Constants.tight()
    ineq, ok, notes = _build(rec, f, constants)
    return AnalysisResult(
        verdict=YES if ok else FAIL,
        shape=f,
        shape_label=f.label(),
        base_cost=str(rec.base_cost),
        p=ineq.p,
        q=ineq.q,
        multiplier=ineq.multiplier,
        diagnostics=tuple(notes),
    )


# --------------------------------------------------------------------------
# Threshold N


@dataclass(frozen=True)
class _RatioTerms:
    """Terms of ``x`` or ``y``: ``coef * N**dn * ln(N)**dl`` relative to the leading term of p."""

    terms: tuple[tuple[Fraction, int, int], ...]

    @classmethod
    def build(cls, poly: PseudoPoly, lead_power: int, lead_log: int, c_p: Fraction, skip: tuple[int, int] | None):
        out = []
        for power, has_log, coef in poly.coefficients():
            if coef == 0 or (power, has_log) == skip:
                continue
            out.append((abs(coef) / c_p, power - lead_power, has_log - lead_log))
        return cls(tuple(out))

    def floats(self, ns: np.ndarray, logs: np.ndarray) -> np.ndarray:
        total = np.zeros_like(ns)
        for coef, dn, dl in self.terms:
            total += float(coef) * ns**dn * logs**dl
        return total

    def upper(self, n: int, ln_n: Interval) -> Fraction:
        total = Fraction(0)
        for coef, dn, dl in self.terms:
            if dl == 1:
                factor = ln_n.hi
            elif dl == -1:
                factor = 1 / ln_n.lo
            else:
                factor = Fraction(1)
            total += coef * Fraction(n) ** dn * factor
        return total


def _ratio_terms(p: PseudoPoly, q: PseudoPoly) -> tuple[_RatioTerms, _RatioTerms]:
    lead_power, lead_log, c_p = p.leading()
    key = (lead_power, lead_log)
    x_terms = _RatioTerms.build(p, lead_power, lead_log, c_p, skip=key)
    # when the degrees agree the q term on p's leading monomial is exactly C_q/C_p
    y_skip = key if p.degree() == q.degree() else None
    y_terms = _RatioTerms.build(q, lead_power, lead_log, c_p, skip=y_skip)
    return x_terms, y_terms


def threshold_values(p: PseudoPoly, q: PseudoPoly, n: int) -> tuple[Fraction, Fraction]:
    """Certified upper bounds of ``x(n)`` and ``y(n)``."""
    x_terms, y_terms = _ratio_terms(p, q)
    ln_n = ln_interval(n)
    return x_terms.upper(n, ln_n), y_terms.upper(n, ln_n)


THRESHOLD_RULES = ("reference", "inclusive", "strict")


def _literal_float(p: PseudoPoly, q: PseudoPoly, n: int) -> tuple[float, float]:
    """``x(n), y(n)`` in binary64, summed term by term exactly as the formula reads."""
    lead_power, lead_log, c_p = p.leading()
    ln_n = math.log(n)
    p_bar = float(c_p) * float(n) ** lead_power * (ln_n if lead_log else 1.0)

    def scaled_sum(poly: PseudoPoly) -> float:
        total = 0.0
        for power, has_log, coef in poly.coefficients():
            if coef:
                total += abs(float(coef)) * float(n) ** power * (ln_n if has_log else 1.0)
        return total / p_bar

    same = p.degree() == q.degree()
    ratio = float(q.leading_coefficient) / float(c_p) if same else 0.0
    return -1.0 + scaled_sum(p), -ratio + scaled_sum(q)


def threshold_N(
    p: PseudoPoly,
    q: PseudoPoly,
    eps: Fraction,
    cap: int = DEFAULT_CAP,
    rule: str = "reference",
) -> int:
    """Least N >= 2 at which both ``x(N)`` and ``y(N)`` are small enough.

    Every rule requires the certified bounds (rational arithmetic, outward
    ``ln`` enclosure) to satisfy ``x, y <= eps``; ``"strict"`` requires
    ``< eps`` instead.  ``"reference"`` additionally requires the strict test
    ``x, y < eps`` to hold when the formula is evaluated in binary64; ties
    that land exactly on ``eps`` then resolve the way a plain floating-point
    implementation resolves them.  A vectorised float pass screens candidates
    in blocks before any exact work is done.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"rule must be one of {THRESHOLD_RULES}")
    if p.leading_coefficient <= 0 or (p.degree() or 0) < (q.degree() or 0):
        raise ValueError("threshold_N needs C_p > 0 and deg p >= deg q")
    x_terms, y_terms = _ratio_terms(p, q)
    eps_f = float(eps)
    limit = eps_f + _SCREEN_SLACK

    def accepted(n: int) -> bool:
        ln_n = ln_interval(n)
        x, y = x_terms.upper(n, ln_n), y_terms.upper(n, ln_n)
        if rule == "strict":
            return x < eps and y < eps
        if not (x <= eps and y <= eps):
            return False
        if rule == "reference":
            xf, yf = _literal_float(p, q, n)
            return xf < eps_f and yf < eps_f
        return True

    start = 2
    last = (math.nan, math.nan)
    while start <= cap:
        stop = min(start + _SCREEN_CHUNK, cap + 1)
        ns = np.arange(start, stop, dtype=np.float64)
        logs = np.log(ns)
        xs = x_terms.floats(ns, logs)
        ys = y_terms.floats(ns, logs)
        for idx in np.flatnonzero((xs <= limit) & (ys <= limit)):
            n = start + int(idx)
            if accepted(n):
                return n
        last = (float(xs[-1]), float(ys[-1]))
        start = stop
    raise ResourceError(f"no threshold N up to {cap} (last x = {last[0]:.6g}, y = {last[1]:.6g})")


# --------------------------------------------------------------------------
# Synthesis


def uni_synth(
    rec: UniRecurrence,
    f: BoundShape,
    eps: Fraction | str | float,
    constants: Constants | None = None,
    cap: int = DEFAULT_CAP,
    rule: str = "reference",
) -> AnalysisResult:
    eps = _as_eps(eps)
    constants = constants or Constants.tight()
    decision = uni_dec(rec, f, constants)
    decision = replace(decision, epsilon=eps)
    if not decision.ok:
        return decision
    p, q = decision.p, decision.q
    n_star = threshold_N(p, q, eps, cap, rule)
    same, ratio = _ineq_ratio(p, q)
    t_d = ((ratio if same else Fraction(0)) + eps) / (1 - eps)
    prefix, argmax = Fraction(0), None
    if n_star > 2:
        table = eval_uni(rec, n_star - 1, cap=cap)
        prefix, argmax = max_ratio(table, f, _c_lower(rec, constants), 2, n_star - 1)
    d = round_above_milli(max(t_d, prefix))
    notes = list(decision.diagnostics)
    notes.append(f"N = {n_star}; threshold d = {float(t_d):.6f}; prefix max = {float(prefix):.6f}")
    if argmax is not None:
        notes.append(f"prefix max attained at n = {argmax}")
    return replace(
        decision,
        d=d,
        threshold_N=n_star,
        prefix_max=round_up_milli(prefix),
        prefix_argmax=argmax,
        threshold_d=round_up_milli(t_d),
        diagnostics=tuple(notes),
    )


def _as_eps(eps: Fraction | str | float | Decimal) -> Fraction:
    value = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if not 0 < value < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    return value


# --------------------------------------------------------------------------
# Bivariate relations


def reduce_bi(rec: BiRecurrence) -> tuple[UniRecurrence, RecExpr]:
    """Drop n and replace h by 1: ``T(m) = e_part + b(m)``, ``T(1) = c``."""
    return UniRecurrence(rec.e_part + rec.b_part, rec.base_cost), rec.h_part


def h_label(h: RecExpr) -> str:
    text = h.render("n")
    return text if len(h.terms) == 1 else f"({text})"


def bi_shape_label(h: RecExpr, f_m: BoundShape) -> str:
    label = h_label(h)
    tail = f_m.label("m")
    if label == "1":
        return tail
    return f"{label} {tail}"


def _lift(result: AnalysisResult, h: RecExpr, f_m: BoundShape) -> AnalysisResult:
    return replace(result, shape_label=bi_shape_label(h, f_m), h_label=h_label(h))


def bi_dec(rec: BiRecurrence, f_m: BoundShape, constants: Constants | None = None) -> AnalysisResult:
    uni, h = reduce_bi(rec)
    return _lift(uni_dec(uni, f_m, constants), h, f_m)


def bi_synth(
    rec: BiRecurrence,
    f_m: BoundShape,
    eps: Fraction | str | float,
    constants: Constants | None = None,
    cap: int = DEFAULT_CAP,
    rule: str = "reference",
) -> AnalysisResult:
    uni, h = reduce_bi(rec)
    return _lift(uni_synth(uni, f_m, eps, constants, cap, rule), h, f_m)


# --------------------------------------------------------------------------
# Front door


def analyze(
    rec: Recurrence,
    shape: BoundShape | None,
    mode: str = "synth",
    eps: Fraction | str | float | None = None,
    constants: Constants | None = None,
    cap: int = DEFAULT_CAP,
    rule: str = "reference",
) -> AnalysisResult:
    """Run decision or synthesis; ``shape=None`` tries ln n, n, n ln n in turn."""
    if mode not in ("decide", "synth"):
        raise ValueError("mode must be 'decide' or 'synth'")
    if mode == "synth" and eps is None:
        raise ValueError("synthesis needs an epsilon")
    bivariate = isinstance(rec, BiRecurrence)
    decide = bi_dec if bivariate else uni_dec
    synth = bi_synth if bivariate else uni_synth
    shapes = SHAPE_ORDER if shape is None else (shape,)
    tried: list[str] = []
    result: AnalysisResult | None = None
    for candidate in shapes:
        result = decide(rec, candidate, constants)
        tried.append(f"{result.shape_label}: {result.verdict}")
        if result.ok:
            if mode == "synth":
                result = synth(rec, candidate, eps, constants, cap, rule)
            break
    assert result is not None
    if shape is None:
        result = replace(result, diagnostics=result.diagnostics + ("auto: " + ", ".join(tried),))
    return result


def certified_bound_holds(rec: UniRecurrence, result: AnalysisResult, upto: int) -> int | None:
    """First n <= upto where the synthesized bound is not certified, else None."""
    if result.d is None:
        raise ValueError("result carries no d")
    table = eval_uni(rec, upto, exact=False)
    return first_violation(table, result.shape, Fraction(result.d), _c_lower(rec, Constants.tight()))


__all__ = [
    "AnalysisResult",
    "YES",
    "FAIL",
    "uni_dec",
    "uni_synth",
    "threshold_N",
    "threshold_values",
    "reduce_bi",
    "bi_dec",
    "bi_synth",
    "analyze",
    "certified_bound_holds",
]
