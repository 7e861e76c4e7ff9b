import json
from decimal import Decimal

from rtbound.analyzer import analyze, uni_synth
from rtbound.corpus import (
    DEFAULT_EPSILONS,
    ENTRY_IDS,
    corpus_entry,
    corpus_list,
    fixtures,
    reproduce,
    with_select_slope,
)
from rtbound.recdsl import Atom, BiRecurrence, format_recurrence, parse
from rtbound.shapes import BoundShape


def test_nine_entries_in_order():
    assert [e.id for e in corpus_list()] == list(ENTRY_IDS)
    assert sum(isinstance(e.relation, BiRecurrence) for e in corpus_list()) == 3


def test_entries_round_trip_and_analyze():
    for entry in corpus_list():
        assert parse(format_recurrence(entry.relation)) == entry.relation
        assert analyze(entry.relation, entry.shape, "decide").ok


def test_q_select_and_diam_a_encodings():
    q = corpus_entry("q_select").relation
    assert {a for _, a in q.expr.terms} == {Atom.ONE, Atom.VAR, Atom.AVG_HALVES}
    d = corpus_entry("diam_a").relation
    assert any(a is Atom.VAR_LN_VAR and c.rational == 2 for c, a in d.expr.terms)
    assert all(e.uni().base_cost.rational == 1 for e in corpus_list())


def test_sort_sel_frozen_slope():
    rec = corpus_entry("sort_sel").relation
    terms = {a: c.rational for c, a in rec.expr.terms}
    assert terms[Atom.ONE] == 5 and str(terms[Atom.VAR]) == "8091/1000"


def test_sort_sel_slope_cross_check():
    result = uni_synth(corpus_entry("q_select").relation, BoundShape.LINEAR, "0.01")
    assert result.d == Decimal("8.091")
    rebuilt = with_select_slope(corpus_entry("sort_sel").relation, result.d)
    assert rebuilt == corpus_entry("sort_sel").relation


def test_fixture_coverage():
    table = fixtures()["entries"]
    assert sorted(table) == sorted(ENTRY_IDS)
    fail_rows = sum(v == "fail" for e in table.values() for v in e["decisions"].values())
    assert fail_rows == 9
    for entry in table.values():
        assert sorted(entry["synth"]) == sorted(DEFAULT_EPSILONS)
    assert corpus_entry("coupon").expected.d100 == Decimal("0.910")


def test_reproduce_single_column_filters():
    run = reproduce(["0.5"])
    keys = {c.key for c in run.cells if c.kind in ("N", "d")}
    assert keys == {"0.5"}


def test_reproduce_detects_injected_mismatch():
    run = reproduce(["0.5"], fixture_overrides={"coupon": {"synth": {"0.5": {"d": "3.5"}}}})
    bad = [c for c in run.failures() if c.entry == "coupon"]
    assert bad and bad[0].kind == "d" and bad[0].expected == "3.5"


def test_cells_serialize():
    run = reproduce(["0.5"])
    json.dumps([c.to_json() for c in run.cells])
