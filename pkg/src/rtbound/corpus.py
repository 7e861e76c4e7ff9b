"""Built-in benchmark relations and the expected results they are checked against."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable

from .analyzer import AnalysisResult, analyze, reduce_bi
from .errors import RecError
from .evalcore import d_z
from .numeric import Constants
from .recdsl import Atom, BiRecurrence, Coefficient, RecExpr, Recurrence, UniRecurrence, parse
from .shapes import SHAPE_ORDER, BoundShape

ENTRY_IDS = (
    "r_search", "q_sort", "q_select", "diam_a", "diam_b",
    "sort_sel", "coupon", "res_a", "res_b",
)
DEFAULT_EPSILONS = ("0.5", "0.3", "0.1", "0.01")
# The d_100 fixtures are maxima over 2 <= n <= 99.
D100_Z = 99
SORT_SEL_SOURCE = "q_select"


@dataclass(frozen=True)
class Expected:
    decisions: dict[str, str]
    synth: dict[str, tuple[int, Decimal]]
    d100: Decimal


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    title: str
    relation: Recurrence
    shape: BoundShape
    source: str
    expected: Expected

    @property
    def bivariate(self) -> bool:
        return isinstance(self.relation, BiRecurrence)

    def uni(self) -> UniRecurrence:
        """The relation itself, or the reduced one-variable relation."""
        return reduce_bi(self.relation)[0] if self.bivariate else self.relation


def data_text(name: str) -> str:
    return resources.files("rtbound").joinpath("data", name).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def fixtures() -> dict:
    return json.loads(data_text("fixtures.json"))


def _expected(raw: dict) -> Expected:
    return Expected(
        decisions=dict(raw["decisions"]),
        synth={eps: (int(cell["N"]), Decimal(cell["d"])) for eps, cell in raw["synth"].items()},
        d100=Decimal(raw["d100"]),
    )


@lru_cache(maxsize=1)
def _load() -> tuple[CorpusEntry, ...]:
    table = fixtures()["entries"]
    entries = []
    for entry_id in ENTRY_IDS:
        source = data_text(f"{entry_id}.rec")
        raw = table[entry_id]
        entries.append(
            CorpusEntry(
                id=entry_id,
                title=raw["title"],
                relation=parse(source),
                shape=BoundShape.parse(raw["shape"]),
                source=source,
                expected=_expected(raw),
            )
        )
    return tuple(entries)


def corpus_list() -> list[CorpusEntry]:
    return list(_load())


def corpus_entry(entry_id: str) -> CorpusEntry:
    for entry in _load():
        if entry.id == entry_id:
            return entry
    raise KeyError(entry_id)


def with_select_slope(rec: UniRecurrence, slope: Decimal) -> UniRecurrence:
    """Replace the linear coefficient of the Sort-Sel relation by ``slope``."""
    terms = [(Coefficient(Fraction(slope)), a) if a is Atom.VAR else (c, a) for c, a in rec.expr.terms]
    return UniRecurrence(RecExpr(tuple(terms)), rec.base_cost)


# --------------------------------------------------------------------------
# Reproduction


@dataclass(frozen=True)
class Cell:
    entry: str
    kind: str  # decision | N | d | d100
    key: str  # shape for decisions, epsilon otherwise
    expected: str
    actual: str | None
    status: str  # ok | mismatch | error
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "entry": self.entry, "kind": self.kind, "key": self.key,
            "expected": self.expected, "actual": self.actual,
            "status": self.status, "note": self.note,
        }


@dataclass
class Reproduction:
    cells: list[Cell] = field(default_factory=list)
    results: dict[tuple[str, str], AnalysisResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]


def _compare_d(entry: str, kind: str, key: str, expected: Decimal, actual: Decimal | None, tol: Decimal) -> Cell:
    if actual is None:
        return Cell(entry, kind, key, str(expected), None, "mismatch", "no value")
    status = "ok" if abs(actual - expected) <= tol else "mismatch"
    return Cell(entry, kind, key, str(expected), str(actual), status)


def _synth(rec: UniRecurrence | BiRecurrence, shape: BoundShape, eps: str, constants, cap, rule) -> AnalysisResult:
    return analyze(rec, shape, "synth", eps, constants=constants, cap=cap, rule=rule)


def reproduce(
    epsilons: Iterable[str] = DEFAULT_EPSILONS,
    *,
    fixture_overrides: dict | None = None,
    constants: Constants | None = None,
    cap: int = 10**7,
    rule: str = "reference",
    chain_sort_sel: bool = True,
    threads: int = 4,
) -> Reproduction:
    """Recompute every decision, synthesis and d_100 cell and compare with the fixtures.

    With ``chain_sort_sel`` the Sort-Sel slope at each epsilon is the d that
    Q-Select synthesizes at the same epsilon; otherwise the frozen slope of the
    shipped relation is used throughout.
    ``fixture_overrides`` maps ``entry -> {"synth": {eps: {"N":..,"d":..}}, "d100":..}``
    and replaces the matching expected values (for harness tests).
    """
    epsilons = [str(Decimal(str(e))) for e in epsilons]
    constants = constants or Constants.tight()
    tol = Decimal(fixtures()["tolerance"]["d"])
    entries = corpus_list()
    if fixture_overrides:
        entries = [_override(e, fixture_overrides.get(e.id)) for e in entries]
    out = Reproduction()

    # Decisions.
    for entry in entries:
        for shape_key, verdict in entry.expected.decisions.items():
            shape = BoundShape.parse(shape_key)
            try:
                got = analyze(entry.relation, shape, "decide", constants=constants).verdict
                status = "ok" if got == verdict else "mismatch"
                out.cells.append(Cell(entry.id, "decision", shape_key, verdict, got, status))
            except RecError as exc:
                out.cells.append(Cell(entry.id, "decision", shape_key, verdict, None, "error", str(exc)))

    # Synthesis; Sort-Sel depends on Q-Select so it runs after the rest.
    def job(entry: CorpusEntry, eps: str, rec) -> tuple[str, str, AnalysisResult | Exception]:
        try:
            return entry.id, eps, _synth(rec, entry.shape, eps, constants, cap, rule)
        except RecError as exc:
            return entry.id, eps, exc

    first = [(e, eps, e.relation) for e in entries if e.id != "sort_sel" for eps in epsilons]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        done = list(pool.map(lambda a: job(*a), first))
        sort_sel = next(e for e in entries if e.id == "sort_sel")
        second = []
        for eps in epsilons:
            rec = sort_sel.relation
            if chain_sort_sel:
                source = next((r for i, k, r in done if i == SORT_SEL_SOURCE and k == eps), None)
                if isinstance(source, AnalysisResult) and source.d is not None:
                    rec = with_select_slope(rec, source.d)
            second.append((sort_sel, eps, rec))
        done += list(pool.map(lambda a: job(*a), second))

    outcome = {(i, k): r for i, k, r in done}
    for entry in entries:
        for eps in epsilons:
            result = outcome[(entry.id, eps)]
            exp = entry.expected.synth.get(eps)
            if exp is None:
                continue
            exp_n, exp_d = exp
            if isinstance(result, Exception):
                note = f"{type(result).__name__}: {result}"
                out.cells.append(Cell(entry.id, "N", eps, str(exp_n), None, "error", note))
                out.cells.append(Cell(entry.id, "d", eps, str(exp_d), None, "error", note))
                continue
            out.results[(entry.id, eps)] = result
            got_n = result.threshold_N
            status = "ok" if got_n == exp_n else "mismatch"
            out.cells.append(Cell(entry.id, "N", eps, str(exp_n), None if got_n is None else str(got_n), status))
            out.cells.append(_compare_d(entry.id, "d", eps, exp_d, result.d, tol))

    # d_100 column.
    for entry in entries:
        value = d_z(entry.uni(), entry.shape, D100_Z)
        out.cells.append(_compare_d(entry.id, "d100", "z=100", entry.expected.d100, value, tol))

    order = {e: i for i, e in enumerate(ENTRY_IDS)}
    kinds = {"decision": 0, "N": 1, "d": 2, "d100": 3}
    eps_order = {e: i for i, e in enumerate(epsilons)}
    shape_order = {s.value: i for i, s in enumerate(SHAPE_ORDER)}
    out.cells.sort(key=lambda c: (order[c.entry], kinds[c.kind], eps_order.get(c.key, shape_order.get(c.key, 0))))
    return out


def _override(entry: CorpusEntry, patch: dict | None) -> CorpusEntry:
    if not patch:
        return entry
    synth = dict(entry.expected.synth)
    for eps, cell in patch.get("synth", {}).items():
        n, d = synth.get(eps, (0, Decimal(0)))
        synth[eps] = (int(cell.get("N", n)), Decimal(str(cell.get("d", d))))
    d100 = Decimal(str(patch["d100"])) if "d100" in patch else entry.expected.d100
    decisions = {**entry.expected.decisions, **patch.get("decisions", {})}
    return replace(entry, expected=Expected(decisions, synth, d100))


__all__ = [
    "CorpusEntry",
    "Cell",
    "Reproduction",
    "ENTRY_IDS",
    "DEFAULT_EPSILONS",
    "D100_Z",
    "corpus_list",
    "corpus_entry",
    "fixtures",
    "reproduce",
    "with_select_slope",
]
