"""Recurrence AST, the ``.rec`` text format, and its parser/printer.

Univariate file::

    # comment
    rel T(n) = 6 + avg_halves(T)
    base T(1) = 1

Bivariate (separable) file, with the ``{h} * {b}`` product written exactly once::

    rel T(n,m) = {n} * {1/m} + T(n,m-1)
    base T(n,1) = {n} * 1

Coefficients are exact decimals; the token ``e`` stands for Euler's number and
stays symbolic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .errors import RecSyntaxError, ValidationError
from .numeric import FOUR_DIGIT_EULER, SymConst, format_rational


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True, slots=True, order=True)
class Coefficient:
    """``rational`` or ``rational * e``; ``e`` itself is never materialised."""

    rational: Fraction
    euler: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "rational", Fraction(self.rational))

    @classmethod
    def one(cls) -> "Coefficient":
        return cls(Fraction(1))

    def sym(self) -> SymConst:
        return SymConst.euler() * self.rational if self.euler else SymConst.of(self.rational)

    def lower_bound(self) -> Fraction:
        """A rational that is <= the value (exact when no ``e``)."""
        return self.rational * FOUR_DIGIT_EULER.lo if self.euler else self.rational

    def is_positive(self) -> bool:
        return self.rational > 0

    def __str__(self) -> str:
        if not self.euler:
            return _decimal_text(self.rational)
        if self.rational == 1:
            return "e"
        return f"{_decimal_text(self.rational)} * e"


def _decimal_text(x: Fraction) -> str:
    text = format_rational(x)
    if "/" in text:
        raise ValueError(f"{x} has no finite decimal form and cannot be written in .rec syntax")
    return text


class Atom(Enum):
    ONE = "one"
    VAR = "var"
    LN_VAR = "ln_var"
    VAR_LN_VAR = "var_ln_var"
    INV_VAR = "inv_var"
    T_PRED = "t_pred"
    T_FLOOR_HALF = "t_floor_half"
    T_CEIL_HALF = "t_ceil_half"
    AVG_ALL = "avg_all"
    AVG_HALVES = "avg_halves"

    @property
    def recursive(self) -> bool:
        return self in _RECURSIVE

    @property
    def rank(self) -> int:
        return _ATOM_ORDER[self]

    def render(self, var: str = "n", bivariate: bool = False) -> str:
        if self is Atom.ONE:
            return "1"
        if self is Atom.VAR:
            return var
        if self is Atom.LN_VAR:
            return f"ln({var})"
        if self is Atom.VAR_LN_VAR:
            return f"{var}*ln({var})"
        if self is Atom.INV_VAR:
            return f"1/{var}"
        if self is Atom.AVG_ALL:
            return "avg_all(T)"
        if self is Atom.AVG_HALVES:
            return "avg_halves(T)"
        arg = {Atom.T_PRED: "{v}-1", Atom.T_FLOOR_HALF: "floor({v}/2)", Atom.T_CEIL_HALF: "ceil({v}/2)"}[self]
        arg = arg.format(v="m" if bivariate else "n")
        return f"T(n,{arg})" if bivariate else f"T({arg})"


_RECURSIVE = frozenset({Atom.T_PRED, Atom.T_FLOOR_HALF, Atom.T_CEIL_HALF, Atom.AVG_ALL, Atom.AVG_HALVES})
_ATOM_ORDER = {atom: i for i, atom in enumerate(Atom)}
H_ATOMS = frozenset({Atom.ONE, Atom.VAR, Atom.LN_VAR, Atom.VAR_LN_VAR})
B_ATOMS = frozenset({Atom.ONE, Atom.INV_VAR, Atom.LN_VAR, Atom.VAR, Atom.VAR_LN_VAR})
TRANSCENDENTAL_ATOMS = frozenset({Atom.LN_VAR, Atom.VAR_LN_VAR})

Term = tuple[Coefficient, Atom]


@dataclass(frozen=True, slots=True)
class RecExpr:
    """Canonical sum of ``coefficient * atom`` terms.

    Terms with the same atom and the same ``e`` flag are merged; order is by
    atom then flag, so structurally equal sums compare equal.
    """

    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        merged: dict[tuple[Atom, bool], Fraction] = {}
        for coef, atom in self.terms:
            key = (atom, coef.euler)
            merged[key] = merged.get(key, Fraction(0)) + coef.rational
        canon = tuple(
            (Coefficient(r, euler), atom)
            for (atom, euler), r in sorted(merged.items(), key=lambda kv: (kv[0][0].rank, kv[0][1]))
            if r != 0
        )
        object.__setattr__(self, "terms", canon)

    @classmethod
    def of(cls, *pairs: tuple[Coefficient | int | Fraction | str, Atom]) -> "RecExpr":
        terms = []
        for coef, atom in pairs:
            if not isinstance(coef, Coefficient):
                coef = Coefficient(Fraction(coef))
            terms.append((coef, atom))
        return cls(tuple(terms))

    def __add__(self, other: "RecExpr") -> "RecExpr":
        return RecExpr(self.terms + other.terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def atoms(self) -> frozenset[Atom]:
        return frozenset(atom for _, atom in self.terms)

    @property
    def recursive_terms(self) -> tuple[Term, ...]:
        return tuple(t for t in self.terms if t[1].recursive)

    @property
    def plain_terms(self) -> tuple[Term, ...]:
        return tuple(t for t in self.terms if not t[1].recursive)

    def has_transcendental(self) -> bool:
        return any(c.euler or a in TRANSCENDENTAL_ATOMS for c, a in self.terms)

    def render(self, var: str = "n", bivariate: bool = False) -> str:
        return " + ".join(_render_term(c, a, var, bivariate) for c, a in self.terms)


def _render_term(coef: Coefficient, atom: Atom, var: str, bivariate: bool) -> str:
    if atom is Atom.ONE:
        return str(coef)
    text = atom.render(var, bivariate)
    if coef == Coefficient.one():
        return text
    return f"{coef} * {text}"


def _check_coefficients(expr: RecExpr, what: str) -> None:
    for coef, atom in expr.terms:
        if not coef.is_positive():
            raise ValidationError(f"{what}: coefficient of {atom.render()} must be positive")
        if atom is not Atom.ONE and coef.lower_bound() < 1:
            raise ValidationError(f"{what}: scalar factor {coef} of {atom.render()} is below 1")


@dataclass(frozen=True, slots=True)
class UniRecurrence:
    """``T(n) = expr`` for n >= 2 and ``T(1) = base_cost``."""

    expr: RecExpr
    base_cost: Coefficient

    def __post_init__(self) -> None:
        if not self.base_cost.is_positive():
            raise ValidationError("base cost must be positive")
        if not self.expr.recursive_terms:
            raise ValidationError("relation has no T-term")
        if not self.expr.plain_terms:
            raise ValidationError("relation has no non-T term")
        _check_coefficients(self.expr, "relation")

    def has_transcendental(self) -> bool:
        return self.expr.has_transcendental() or self.base_cost.euler

    def __str__(self) -> str:
        return format_uni(self)


@dataclass(frozen=True, slots=True)
class BiRecurrence:
    """``T(n,m) = e_part + h(n) * b(m)`` for m >= 2 and ``T(n,1) = h(n) * base_cost``."""

    e_part: RecExpr
    h_part: RecExpr
    b_part: RecExpr
    base_cost: Coefficient

    def __post_init__(self) -> None:
        if not self.base_cost.is_positive():
            raise ValidationError("base cost must be positive")
        if not self.e_part.terms:
            raise ValidationError("relation has no T-term")
        if self.e_part.plain_terms:
            raise ValidationError("only T-terms may appear outside the {h} * {b} product")
        if not self.h_part.terms or not self.b_part.terms:
            raise ValidationError("h and b factors must be non-empty")
        if not self.h_part.atoms <= H_ATOMS:
            raise ValidationError("h factor may only use 1, n, ln(n), n*ln(n)")
        if not self.b_part.atoms <= B_ATOMS:
            raise ValidationError("b factor may only use 1, 1/m, ln(m), m, m*ln(m)")
        _check_coefficients(self.e_part, "relation")
        for part, name in ((self.h_part, "h factor"), (self.b_part, "b factor")):
            for coef, _ in part.terms:
                if not coef.is_positive():
                    raise ValidationError(f"{name}: coefficients must be positive")

    def __str__(self) -> str:
        return format_bi(self)


Recurrence = Union[UniRecurrence, BiRecurrence]


# --------------------------------------------------------------------------
# Printing


def format_uni(rec: UniRecurrence) -> str:
    return f"rel T(n) = {rec.expr.render()}\nbase T(1) = {rec.base_cost}\n"


def format_bi(rec: BiRecurrence) -> str:
    e_text = rec.e_part.render("m", bivariate=True)
    h_text = rec.h_part.render("n")
    b_text = rec.b_part.render("m")
    return (
        f"rel T(n,m) = {e_text} + {{{h_text}}} * {{{b_text}}}\n"
        f"base T(n,1) = {{{h_text}}} * {rec.base_cost}\n"
    )


def format_recurrence(rec: Recurrence) -> str:
    return format_uni(rec) if isinstance(rec, UniRecurrence) else format_bi(rec)


# --------------------------------------------------------------------------
# Tokenizer


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[-+*/(){},=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "number", "name", "punct", "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise RecSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        chunk = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Parser


@dataclass(frozen=True, slots=True)
class _ParsedTerm:
    coef: Coefficient
    atom: Atom
    var: str | None  # variable the atom mentions, None for constants and T-terms
    token: Token


_VARS = ("n", "m")


@dataclass
class _Parser:
    tokens: list[Token]
    pos: int = 0
    bivariate: bool = False

    # -- token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind != "eof" and tok.text == text

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, expected: str) -> RecSyntaxError:
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return RecSyntaxError(f"unexpected {found}", tok.line, tok.column, expected)

    def expect(self, *texts: str) -> None:
        for text in texts:
            if not self.at(text):
                raise self.fail(repr(text))
            self.advance()

    def expect_name(self, *names: str) -> str:
        tok = self.peek()
        if tok.kind != "name" or tok.text not in names:
            raise self.fail(" or ".join(repr(n) for n in names))
        self.advance()
        return tok.text

    # -- grammar
    def constant(self) -> Coefficient:
        """CONST := decimal | 'e' | decimal '*' 'e'"""
        tok = self.peek()
        if tok.kind == "name" and tok.text == "e":
            self.advance()
            return Coefficient(Fraction(1), euler=True)
        if tok.kind != "number":
            raise self.fail("a decimal constant or 'e'")
        self.advance()
        value = Fraction(tok.text)
        if self.at("*") and self.peek(1).kind == "name" and self.peek(1).text == "e":
            self.pos += 2
            return Coefficient(value, euler=True)
        return Coefficient(value)

    def _starts_inverse(self) -> bool:
        return self.peek().kind == "number" and self.peek().text == "1" and self.at("/", 1)

    def _starts_constant(self) -> bool:
        tok = self.peek()
        if tok.kind == "number":
            return not self._starts_inverse()
        return tok.kind == "name" and tok.text == "e"

    def term(self) -> _ParsedTerm:
        start = self.peek()
        if self._starts_constant():
            coef = self.constant()
            if self.at("*"):
                self.advance()
                atom, var = self.atom()
                if coef.lower_bound() < 1:
                    raise ValidationError(
                        f"scalar factor {coef} at line {start.line}, column {start.column} is below 1"
                    )
                return _ParsedTerm(coef, atom, var, start)
            if not coef.is_positive():
                raise ValidationError(f"constant at line {start.line}, column {start.column} must be positive")
            return _ParsedTerm(coef, Atom.ONE, None, start)
        atom, var = self.atom()
        return _ParsedTerm(Coefficient.one(), atom, var, start)

    def atom(self) -> tuple[Atom, str | None]:
        tok = self.peek()
        if self._starts_inverse():
            self.pos += 2
            return Atom.INV_VAR, self.expect_name(*_VARS)
        if tok.kind != "name":
            raise self.fail("an atom")
        if tok.text in _VARS:
            self.advance()
            if self.at("*") and self.peek(1).kind == "name" and self.peek(1).text == "ln":
                self.pos += 2
                self.expect("(")
                self.expect_name(tok.text)
                self.expect(")")
                return Atom.VAR_LN_VAR, tok.text
            return Atom.VAR, tok.text
        if tok.text == "ln":
            self.advance()
            self.expect("(")
            var = self.expect_name(*_VARS)
            self.expect(")")
            return Atom.LN_VAR, var
        if tok.text in ("avg_all", "avg_halves"):
            self.advance()
            self.expect("(", "T", ")")
            return (Atom.AVG_ALL if tok.text == "avg_all" else Atom.AVG_HALVES), None
        if tok.text == "T":
            self.advance()
            return self.t_call(), None
        raise self.fail("an atom")

    def t_call(self) -> Atom:
        self.expect("(")
        if self.bivariate:
            self.expect("n", ",")
        rec_var = "m" if self.bivariate else "n"
        if self.at("floor") or self.at("ceil"):
            which = self.advance().text
            self.expect("(", rec_var, "/")
            if not (self.peek().kind == "number" and self.peek().text == "2"):
                raise self.fail("'2'")
            self.advance()
            self.expect(")", ")")
            return Atom.T_FLOOR_HALF if which == "floor" else Atom.T_CEIL_HALF
        self.expect(rec_var, "-")
        if not (self.peek().kind == "number" and self.peek().text == "1"):
            raise self.fail("'1'")
        self.advance()
        self.expect(")")
        return Atom.T_PRED

    def expr(self) -> list[_ParsedTerm]:
        terms = [self.term()]
        while self.at("+"):
            self.advance()
            terms.append(self.term())
        return terms

    def braced(self) -> list[_ParsedTerm]:
        self.expect("{")
        terms = self.expr()
        self.expect("}")
        return terms

    # -- files
    def uni_file(self) -> UniRecurrence:
        self.expect("rel", "T", "(", "n", ")", "=")
        terms = self.expr()
        self.expect("base", "T", "(")
        if not (self.peek().kind == "number" and self.peek().text == "1"):
            raise self.fail("'1'")
        self.advance()
        self.expect(")", "=")
        base = self.constant()
        if self.peek().kind != "eof":
            raise self.fail("end of input")
        for t in terms:
            if t.var not in (None, "n"):
                raise ValidationError(f"univariate relation mentions {t.var!r}")
        expr = RecExpr(tuple((t.coef, t.atom) for t in terms))
        return UniRecurrence(expr, base)

    def bi_file(self) -> BiRecurrence:
        self.bivariate = True
        self.expect("rel", "T", "(", "n", ",", "m", ")", "=")
        e_terms: list[_ParsedTerm] = []
        product: tuple[list[_ParsedTerm], list[_ParsedTerm]] | None = None
        while True:
            if self.at("{"):
                if product is not None:
                    tok = self.peek()
                    raise RecSyntaxError("second {h} * {b} product", tok.line, tok.column, "'+' T-term")
                h_terms = self.braced()
                self.expect("*")
                b_terms = self.braced()
                product = (h_terms, b_terms)
            else:
                e_terms.append(self.term())
            if not self.at("+"):
                break
            self.advance()
        if product is None:
            raise self.fail("a {h} * {b} product")
        self.expect("base", "T", "(", "n", ",")
        if not (self.peek().kind == "number" and self.peek().text == "1"):
            raise self.fail("'1'")
        self.advance()
        self.expect(")", "=")
        base_h = self.braced()
        self.expect("*")
        base = self.constant()
        if self.peek().kind != "eof":
            raise self.fail("end of input")

        h_terms, b_terms = product
        for t in e_terms:
            if not t.atom.recursive:
                raise ValidationError(
                    f"non-T term at line {t.token.line}, column {t.token.column} outside the {{h}} * {{b}} product"
                )
        for t in h_terms + base_h:
            if t.atom.recursive or t.var == "m":
                raise ValidationError(f"h factor at line {t.token.line} may only mention n")
        for t in b_terms:
            if t.atom.recursive or t.var == "n":
                raise ValidationError(f"b factor at line {t.token.line} may only mention m")
        h_expr = RecExpr(tuple((t.coef, t.atom) for t in h_terms))
        if RecExpr(tuple((t.coef, t.atom) for t in base_h)) != h_expr:
            raise ValidationError("base case h factor differs from the relation's h factor")
        return BiRecurrence(
            e_part=RecExpr(tuple((t.coef, t.atom) for t in e_terms)),
            h_part=h_expr,
            b_part=RecExpr(tuple((t.coef, t.atom) for t in b_terms)),
            base_cost=base,
        )


def _is_bivariate(tokens: list[Token]) -> bool:
    texts = [t.text for t in tokens[:5]]
    return texts[:4] == ["rel", "T", "(", "n"] and len(texts) > 4 and texts[4] == ","


def parse_uni(text: str) -> UniRecurrence:
    return _Parser(tokenize(text)).uni_file()


def parse_bi(text: str) -> BiRecurrence:
    return _Parser(tokenize(text)).bi_file()


def parse(text: str) -> Recurrence:
    """Parse either format, picking it from the arity of the ``rel`` header."""
    tokens = tokenize(text)
    parser = _Parser(tokens)
    return parser.bi_file() if _is_bivariate(tokens) else parser.uni_file()

