import math
from decimal import Decimal
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtbound.numeric import (
    Constants,
    Fx,
    Interval,
    SymConst,
    ceil_to_grid,
    euler_interval,
    floor_to_grid,
    format_rational,
    ln_interval,
    ln_scaled,
    ln_scaled_fast,
    round_above_milli,
    round_up_milli,
)

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)


def intervals():
    return st.tuples(fractions, fractions).map(lambda t: Interval(min(t), max(t)))


@given(intervals(), intervals(), st.data())
def test_interval_ops_contain_pointwise_results(a, b, data):
    x = data.draw(st.fractions(min_value=a.lo, max_value=a.hi))
    y = data.draw(st.fractions(min_value=b.lo, max_value=b.hi))
    assert (a + b).contains(Interval.point(x + y))
    assert (a - b).contains(Interval.point(x - y))
    assert (a * b).contains(Interval.point(x * y))
    if not b.contains(Interval.point(Fraction(0))):
        assert (a / b).contains(Interval.point(x / y))


def test_interval_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Interval(Fraction(2), Fraction(1))


@given(st.integers(min_value=1, max_value=10**9))
def test_ln_enclosure_contains_reference(n):
    iv = ln_interval(n, 60)
    with mpmath.workdps(50):
        ref = mpmath.log(n)
        assert mpmath.mpf(iv.lo.numerator) / iv.lo.denominator <= ref <= mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    assert iv.hi - iv.lo <= Fraction(1, 2**55)


@given(st.integers(min_value=2, max_value=10**7))
def test_fast_ln_encloses_tight_ln(n):
    lo, hi = ln_scaled(n, 60)
    flo, fhi = ln_scaled_fast(n, 60)
    assert flo <= lo and hi <= fhi


def test_euler_enclosure():
    iv = euler_interval(60)
    assert float(iv.lo) <= math.e <= float(iv.hi)
    four = Constants.four_digit()
    assert four.euler == Interval(Fraction("2.7182"), Fraction("2.7183"))
    assert four.ln2 == Interval(Fraction("0.6931"), Fraction("0.6932"))


@given(st.integers(min_value=-10**6, max_value=10**6), st.integers(min_value=2, max_value=10**4))
def test_fx_arithmetic_encloses_exact(a, n):
    x = Fx.of(Fraction(a, 7), 60) + Fx.ln(n, 60) * 3
    exact = Fraction(a, 7) + 3 * ln_interval(n, 80).lo
    assert x.lower() - Fraction(1, 2**50) <= exact <= x.upper() + Fraction(1, 2**50)


def test_symconst_interval():
    s = SymConst.of(Fraction(3)) + SymConst.ln2() * 2 - SymConst.euler()
    iv = s.interval(Constants.tight())
    with mpmath.workdps(50):
        expected = 3 + 2 * mpmath.log(2) - mpmath.e
        assert mpmath.mpf(iv.lo.numerator) / iv.lo.denominator <= expected
        assert expected <= mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    assert iv.hi - iv.lo < Fraction(1, 2**50)


@given(st.fractions(min_value=0, max_value=10**4, max_denominator=10**6))
def test_milli_rounding(x):
    up = Fraction(round_up_milli(x))
    above = Fraction(round_above_milli(x))
    assert up >= x and up - x < Fraction(1, 1000)
    assert above > x and above - x <= Fraction(1, 1000)
    assert (up * 1000).denominator == 1 and (above * 1000).denominator == 1


def test_rounding_examples():
    assert round_above_milli(Fraction(17)) == Decimal("17.001")
    assert round_up_milli(Fraction(17)) == Decimal("17.000")


@given(st.fractions(min_value=-100, max_value=100, max_denominator=10**6), st.integers(min_value=1, max_value=8))
def test_grid_rounding_brackets(x, digits):
    assert floor_to_grid(x, digits) <= x <= ceil_to_grid(x, digits)


def test_format_rational():
    assert format_rational(Fraction(89, 5)) == "17.8"
    assert format_rational(Fraction(22, 3)) == "22/3"
    assert format_rational(Fraction(7)) == "7"
