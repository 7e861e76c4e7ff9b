from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from rtbound.analyzer import (
    THRESHOLD_RULES,
    analyze,
    bi_synth,
    certified_bound_holds,
    threshold_N,
    threshold_values,
    uni_dec,
    uni_synth,
)
from rtbound.corpus import D100_Z, corpus_entry, corpus_list
from rtbound.errors import ResourceError, StructureError
from rtbound.evalcore import d_z
from rtbound.numeric import Constants
from rtbound.recdsl import parse_uni
from rtbound.shapes import BoundShape

EPSILONS = ["0.5", "0.3", "0.1", "0.01"]
# Diam. A converges like 1/ln N; see the decisions ledger.
UNREACHABLE = {("diam_a", "0.1"), ("diam_a", "0.01")}


def _decision_rows():
    for entry in corpus_list():
        for shape, verdict in entry.expected.decisions.items():
            yield entry.id, shape, verdict


@pytest.mark.parametrize("entry, shape, verdict", list(_decision_rows()))
def test_decisions(entry, shape, verdict):
    result = analyze(corpus_entry(entry).relation, BoundShape.parse(shape), "decide")
    assert result.verdict == verdict


def _synth_cases():
    for entry in corpus_list():
        for eps in EPSILONS:
            marks = [pytest.mark.xfail(raises=ResourceError, strict=True)] if (entry.id, eps) in UNREACHABLE else []
            yield pytest.param(entry.id, eps, marks=marks)


@pytest.mark.parametrize("entry, eps", list(_synth_cases()))
def test_synthesis_coherent_with_decision(entry, eps):
    e = corpus_entry(entry)
    result = analyze(e.relation, e.shape, "synth", eps)
    assert result.ok and result.d is not None and result.threshold_N >= 2
    floor = max(result.prefix_max, result.threshold_d)
    assert floor <= result.d <= floor + Decimal("0.001")
    assert result.d >= d_z(e.uni(), e.shape, D100_Z)


def test_r_search_synthesis_values():
    result = uni_synth(corpus_entry("r_search").relation, BoundShape.LOG_N, "0.01")
    assert result.threshold_N == 1398
    assert abs(result.d - Decimal("19.762")) <= Decimal("0.005")


def test_auto_shape_picks_first_success():
    result = analyze(corpus_entry("q_sort").relation, None, "decide")
    assert result.shape is BoundShape.N_LOG_N
    assert any(d.startswith("auto:") for d in result.diagnostics)


def test_bivariate_labels():
    coupon = analyze(corpus_entry("coupon").relation, None, "synth", "0.5")
    assert coupon.shape_label == "n ln m" and coupon.d == Decimal("3.001")
    res_b = analyze(corpus_entry("res_b").relation, None, "synth", "0.01")
    assert res_b.shape_label == "m"
    assert "T(n,m) <=" in res_b.bound_text()


@pytest.mark.parametrize("entry", ["r_search", "q_sort", "q_select", "diam_b", "coupon"])
def test_threshold_is_least(entry):
    e = corpus_entry(entry)
    result = uni_dec(e.uni(), e.shape)
    eps = Fraction("0.1")
    n_star = threshold_N(result.p, result.q, eps, rule="inclusive")
    x, y = threshold_values(result.p, result.q, n_star)
    assert x <= eps and y <= eps
    for n in range(2, n_star):
        x, y = threshold_values(result.p, result.q, n)
        assert x > eps or y > eps


@pytest.mark.parametrize("entry", ["r_search", "q_sort", "q_select", "diam_b", "sort_sel"])
def test_rule_ordering(entry):
    e = corpus_entry(entry)
    result = uni_dec(e.uni(), e.shape)
    for eps in (Fraction(1, 2), Fraction(1, 10)):
        ns = [threshold_N(result.p, result.q, eps, rule=r) for r in ("inclusive", "reference", "strict")]
        assert ns[0] <= ns[1] <= ns[2]


def test_threshold_argument_checks():
    result = uni_dec(corpus_entry("r_search").relation, BoundShape.LOG_N)
    with pytest.raises(ValueError):
        threshold_N(result.p, result.q, Fraction(0))
    with pytest.raises(ValueError):
        threshold_N(result.p, result.q, Fraction(1, 2), rule="nearest")
    with pytest.raises(ResourceError):
        threshold_N(result.p, result.q, Fraction(1, 1000), cap=100)
    assert set(THRESHOLD_RULES) == {"reference", "inclusive", "strict"}


def test_epsilon_validation():
    with pytest.raises(ValueError):
        analyze(corpus_entry("r_search").relation, BoundShape.LOG_N, "synth", "1.5")
    with pytest.raises(ValueError):
        analyze(corpus_entry("r_search").relation, BoundShape.LOG_N, "synth", None)


def test_four_digit_constants_close():
    tight = uni_synth(corpus_entry("q_sort").relation, BoundShape.N_LOG_N, "0.01")
    four = uni_synth(corpus_entry("q_sort").relation, BoundShape.N_LOG_N, "0.01", Constants.four_digit())
    assert abs(tight.d - four.d) <= Decimal("0.01")


@pytest.mark.parametrize("entry", ["r_search", "q_sort", "q_select", "diam_b", "sort_sel"])
def test_bound_sound_to_10k(entry):
    e = corpus_entry(entry)
    for eps in ("0.5", "0.01"):
        result = uni_synth(e.relation, e.shape, eps)
        assert certified_bound_holds(e.relation, result, 10**4) is None


def test_bivariate_bound_sound():
    from rtbound.evalcore import eval_bi

    for entry in ("coupon", "res_a", "res_b"):
        rec = corpus_entry(entry).relation
        result = bi_synth(rec, corpus_entry(entry).shape, "0.1")
        for n in (1, 2, 7, 50):
            for m in (1, 2, 9, 60):
                value = eval_bi(rec, n, m)
                h = Fraction(n) if entry != "res_b" else Fraction(1)
                bound = corpus_entry(entry).shape.interval(m) * Fraction(result.d) + Fraction(1)
                assert value.hi <= (bound * h).lo + Fraction(1, 10**12)


COEFS = ["", "2*", "e*"]
PLAIN = ["1", "n", "ln(n)", "n*ln(n)", "1/n"]
REC = ["T(n-1)", "T(floor(n/2))", "T(ceil(n/2))", "avg_all(T)", "avg_halves(T)"]


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.lists(st.sampled_from(PLAIN), min_size=1, max_size=2),
    st.sampled_from(REC),
    st.sampled_from(COEFS),
    st.sampled_from(list(BoundShape)),
    st.sampled_from(["0.5", "0.2"]),
)
def test_synthesized_bounds_hold(plain, rec_atom, coef, shape, eps):
    text = " + ".join(plain + [coef + rec_atom])
    rec = parse_uni(f"rel T(n) = {text}\nbase T(1) = 1")
    try:
        if not uni_dec(rec, shape).ok:
            return
        result = uni_synth(rec, shape, eps, cap=10**5)
    except (ResourceError, StructureError):
        return
    assert certified_bound_holds(rec, result, 2000) is None


def test_negative_q_coefficient_is_surfaced():
    rec = parse_uni("rel T(n) = 1 + e*avg_halves(T)\nbase T(1) = 1")
    with pytest.raises(StructureError):
        uni_dec(rec, BoundShape.N_LOG_N)
