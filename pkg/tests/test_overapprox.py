from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import subst_literal
from rtbound.analyzer import uni_dec
from rtbound.corpus import corpus_entry, corpus_list
from rtbound.numeric import Constants, Interval
from rtbound.overapprox import (
    HARMONIC_GAP,
    LOG_SUM_GAP,
    NLOG_SUM_GAP,
    atom_poly,
    cell,
    check_inequalities,
    ovap,
    inequality_sweep,
)
from rtbound.recdsl import Atom, RecExpr, Coefficient, parse_uni
from rtbound.shapes import BoundShape

C = Constants.tight()
T_ATOMS = [a for a in Atom if a.recursive]
SLACK = Fraction(1, 10**12)


def literal_atom(atom: Atom, shape: BoundShape, n: int) -> Interval:
    expr = RecExpr(((Coefficient(Fraction(1)), atom),))
    return subst_literal(expr, shape, Fraction(1), Interval.point(Fraction(0)), n, C)


@pytest.mark.parametrize("shape", list(BoundShape))
@pytest.mark.parametrize("atom", T_ATOMS)
def test_cell_dominates_literal_value(shape, atom):
    poly = cell(shape, atom)
    for n in list(range(2, 120)) + [257, 1000]:
        upper = poly.evaluate(n, C)
        exact = literal_atom(atom, shape, n)
        assert upper.hi + SLACK >= exact.lo
        assert upper.lo + SLACK >= exact.hi, (shape, atom, n)


def test_cell_rejects_plain_atom():
    with pytest.raises(ValueError):
        cell(BoundShape.LINEAR, Atom.ONE)


def test_atom_poly_values():
    assert atom_poly(Atom.INV_VAR).evaluate(4, C) == Interval.point(Fraction(1, 4))
    assert atom_poly(Atom.VAR).evaluate(7, C) == Interval.point(Fraction(7))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 10, 99, 100, 1000, 10**4])
def test_inequality_checks_pass(n):
    checks = check_inequalities(n)
    assert checks and all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_sweep_matches_exact_checks():
    ns = [2, 3, 17, 64, 500]
    fast = {(c.name, c.n): c.passed for c in inequality_sweep(ns)}
    slow = {(c.name, c.n): c.passed for n in ns for c in check_inequalities(n)}
    assert fast == slow


def test_gap_ranges():
    assert HARMONIC_GAP == Interval(Fraction("-0.7552"), Fraction(-1, 6))
    assert LOG_SUM_GAP.lo == Fraction(-1, 12)
    assert NLOG_SUM_GAP.lo == Fraction(-19, 72)


def _accepted():
    for entry in corpus_list():
        rec = entry.uni()
        for shape in BoundShape:
            if uni_dec(rec, shape).ok:
                yield entry.id, shape


@pytest.mark.parametrize("entry, shape", list(_accepted()))
def test_dominance_on_corpus(entry, shape):
    rec = corpus_entry(entry).uni()
    ov = ovap(rec.expr, shape)
    c = rec.base_cost.sym().interval(C)
    for d in (Fraction(1, 10), Fraction(1), Fraction(10)):
        for n in list(range(2, 40)) + [311, 1000]:
            over = ov.evaluate(d, c, n, C)
            exact = subst_literal(rec.expr, shape, d, c, n, C)
            assert over.hi + SLACK >= exact.lo and over.lo + SLACK >= exact.hi - (c.hi - c.lo) * 4


COEFS = ["", "2*", "e*"]
PLAIN = ["1", "n", "ln(n)", "n*ln(n)", "1/n"]
REC = ["T(n-1)", "T(floor(n/2))", "T(ceil(n/2))", "avg_all(T)", "avg_halves(T)"]


@given(
    st.lists(st.tuples(st.sampled_from(COEFS), st.sampled_from(REC)), min_size=1, max_size=3),
    st.sampled_from(PLAIN),
    st.sampled_from(list(BoundShape)),
    st.fractions(min_value=Fraction(1, 10), max_value=20, max_denominator=100),
    st.integers(min_value=2, max_value=60),
)
def test_dominance_random_relations(rec_terms, plain, shape, d, n):
    text = " + ".join([plain] + [c + a for c, a in rec_terms])
    rec = parse_uni(f"rel T(n) = {text}\nbase T(1) = 1")
    ov = ovap(rec.expr, shape)
    c = Interval.point(Fraction(1))
    over = ov.evaluate(d, c, n, C)
    exact = subst_literal(rec.expr, shape, d, c, n, C)
    assert over.lo + SLACK >= exact.hi - Fraction(1, 10**9)


@pytest.mark.parametrize("entry", ["r_search", "q_sort", "q_select", "diam_b"])
def test_gap_over_f_bounded(entry):
    rec = corpus_entry(entry).uni()
    ov = ovap(rec.expr, corpus_entry(entry).shape)
    shape = corpus_entry(entry).shape
    c = Interval.point(Fraction(1))
    for n in (100, 1000, 5000):
        over = ov.evaluate(Fraction(1), c, n, C)
        exact = subst_literal(rec.expr, shape, Fraction(1), c, n, C)
        assert float((over.hi - exact.lo) / shape.interval(n).lo) <= 10
