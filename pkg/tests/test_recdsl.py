from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtbound.corpus import corpus_list
from rtbound.errors import RecSyntaxError, ValidationError
from rtbound.recdsl import (
    Atom,
    BiRecurrence,
    Coefficient,
    RecExpr,
    UniRecurrence,
    format_recurrence,
    parse,
    parse_bi,
    parse_uni,
)

COEFS = ["", "2*", "3.5*", "e*", "2*e*", "1.25*"]
PLAIN = ["1", "n", "ln(n)", "n*ln(n)", "1/n"]
REC = ["T(n-1)", "T(floor(n/2))", "T(ceil(n/2))", "avg_all(T)", "avg_halves(T)"]


@st.composite
def uni_texts(draw):
    plain = draw(st.lists(st.tuples(st.sampled_from(COEFS), st.sampled_from(PLAIN)), min_size=1, max_size=4))
    rec = draw(st.lists(st.tuples(st.sampled_from(COEFS), st.sampled_from(REC)), min_size=1, max_size=3))
    terms = [(c.rstrip("*") or "1") if a == "1" else c + a for c, a in plain + rec]
    terms = draw(st.permutations(terms))
    base = draw(st.sampled_from(["1", "2", "0.5", "e", "3*e"]))
    return f"rel T(n) = {' + '.join(terms)}\nbase T(1) = {base}\n"


@st.composite
def bi_texts(draw):
    h = draw(st.sampled_from(["1", "n", "ln(n)", "n*ln(n)", "2*n"]))
    b = draw(st.sampled_from(["1", "1/m", "e*1/m", "ln(m)", "m", "e"]))
    return f"rel T(n,m) = {{{h}}} * {{{b}}} + T(n,m-1)\nbase T(n,1) = {{{h}}} * 1\n"


@given(uni_texts())
def test_uni_round_trip(text):
    rec = parse_uni(text)
    again = parse_uni(format_recurrence(rec))
    assert again == rec
    assert format_recurrence(again) == format_recurrence(rec)


@given(bi_texts())
def test_bi_round_trip(text):
    rec = parse_bi(text)
    assert isinstance(rec, BiRecurrence)
    assert parse(format_recurrence(rec)) == rec


@given(uni_texts(), st.randoms())
def test_term_order_is_irrelevant(text, rnd):
    rec = parse_uni(text)
    terms = list(rec.expr.terms)
    rnd.shuffle(terms)
    assert RecExpr(tuple(terms)) == rec.expr


def test_like_terms_merge():
    rec = parse_uni("rel T(n) = 6 + 1*avg_halves(T) + 4\nbase T(1) = 1")
    assert rec.expr.terms == ((Coefficient(Fraction(10)), Atom.ONE), (Coefficient(Fraction(1)), Atom.AVG_HALVES))


def test_corpus_round_trip():
    for entry in corpus_list():
        assert parse(format_recurrence(entry.relation)) == entry.relation


def test_all_atoms_reachable():
    rec = parse_uni(
        "rel T(n) = e + 2*e*n + 3.5*ln(n) + n*ln(n) + 1/n + T(n-1) + 2*T(floor(n/2))"
        " + T(ceil(n/2)) + avg_all(T) + avg_halves(T)\nbase T(1) = 2*e"
    )
    assert {a for _, a in rec.expr.terms} == set(Atom)
    assert rec.base_cost == Coefficient(Fraction(2), True)


def test_comments_and_whitespace():
    rec = parse("# header\n  rel T(n)=6+avg_halves(T)   # trailing\n\nbase T(1)=1\n")
    assert isinstance(rec, UniRecurrence)


@pytest.mark.parametrize(
    "text, error",
    [
        ("rel T(n) = 6\nbase T(1) = 1", ValidationError),
        ("rel T(n) = T(n-1)\nbase T(1) = 1", ValidationError),
        ("rel T(n) = 1 + T(n-1)\nbase T(1) = 0", ValidationError),
        ("rel T(n) = 0.5*n + T(n-1)\nbase T(1) = 1", ValidationError),
        ("rel T(n) = 1 + 0.5*T(n-1)\nbase T(1) = 1", ValidationError),
        ("rel T(n) = 1 + T(n-1)", RecSyntaxError),
        ("rel T(n) = 1 + T(n-2)\nbase T(1) = 1", RecSyntaxError),
        ("rel T(n) = 1 + @\nbase T(1) = 1", RecSyntaxError),
        ("rel T(n,m) = {m} * {1/m} + T(n,m-1)\nbase T(n,1) = {m} * 1", ValidationError),
        ("rel T(n,m) = {n} * {1/m} + T(n,m-1)\nbase T(n,1) = {n*ln(n)} * 1", ValidationError),
        ("rel T(n,m) = {n} * {1/n} + T(n,m-1)\nbase T(n,1) = {n} * 1", ValidationError),
        ("rel T(n,m) = T(n,m-1) + 1\nbase T(n,1) = {n} * 1", RecSyntaxError),
    ],
)
def test_rejections(text, error):
    with pytest.raises(error):
        parse(text)


def test_syntax_error_position():
    with pytest.raises(RecSyntaxError) as info:
        parse("rel T(n) = 1 + T(n-2)\nbase T(1) = 1")
    assert info.value.line == 1 and info.value.column == 20
