"""Text grammar for estimands.

    expr    := factor (('*' | '/') factor)*
    factor  := term | sum | '(' expr ')' | '1'
    sum     := ('sum_' | 'Σ_') ('{' vars '}' | var) expr
    term    := 'P' ['^' domain] '(' vars ['|' given (',' given)*] ')'
    given   := 'do(' vars ')' | 'S=1' | var

A sum extends as far right as possible. Variables are identifiers followed by
optional primes.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from functools import reduce

from funcparserlib.lexer import LexerError, Token, make_tokenizer
from funcparserlib.parser import NoParseError, Parser, finished, forward_decl, many, maybe, tok

from .estimand import (
    ONE,
    TARGET,
    Estimand,
    EstimandError,
    Product,
    ProbTerm,
    Quotient,
    Sum,
    Var,
    canonicalize,
)

logger = logging.getLogger(__name__)


class GrammarError(EstimandError):
    """Estimand text that does not parse."""

    def __init__(self, position: int | None, reason: str):
        self.position = position
        self.reason = reason
        where = f" at column {position}" if position is not None else ""
        super().__init__(f"cannot parse estimand{where}: {reason}")


_SPECS = [
    ("Space", (r"[ \t\r\n]+",)),
    ("Sum", (r"sum_|Σ_",)),
    ("Name", (r"[A-Za-z][A-Za-z0-9_]*'*",)),
    ("Number", (r"[0-9]+",)),
    ("Op", (r"[(){}|,*/^=]",)),
]

_tokenizer = make_tokenizer(_SPECS)


def tokenize(text: str) -> list[Token]:
    try:
        return [t for t in _tokenizer(text) if t.type != "Space"]
    except LexerError as e:
        column = e.place[1] if e.place else None
        raise GrammarError(column, f"unexpected character {e.msg!r}") from e


def _op(s: str) -> Parser:
    return tok("Op", s)


def _build_term(args: tuple) -> ProbTerm:
    domain, outcomes, given = args
    conditions: list[Var] = []
    do_set: list[Var] = []
    selected = False
    for item in given or []:
        if item == "S=1":
            selected = True
        elif isinstance(item, tuple):
            do_set.extend(item[1])
        else:
            conditions.append(item)
    return ProbTerm(
        frozenset(outcomes),
        frozenset(conditions),
        frozenset(do_set),
        selected,
        domain if domain is not None else TARGET,
    )


def _fold(args: tuple) -> Estimand:
    first, rest = args

    def step(left: Estimand, pair: tuple[str, Estimand]) -> Estimand:
        operator, right = pair
        if operator == "/":
            return Quotient(left, right)
        left_factors = left.factors if isinstance(left, Product) else (left,)
        return Product((*left_factors, right))

    return reduce(step, rest, first)


def _grammar() -> Parser:
    var = tok("Name") >> Var.of
    vars_ = var + many(-_op(",") + var) >> (lambda a: [a[0], *a[1]])

    domain = -_op("^") + (
        tok("Name")
        | _op("*")
        | (-_op("{") + -_op("(") + tok("Name") + -_op(")") + -_op("}"))
        | (-_op("{") + (tok("Name") | _op("*")) + -_op("}"))
    )
    do_item = tok("Name", "do") + -_op("(") + vars_ + -_op(")") >> tuple
    sel_item = tok("Name", "S") + _op("=") + tok("Number", "1") >> (lambda _: "S=1")
    given = do_item | sel_item | var
    given_list = given + many(-_op(",") + given) >> (lambda a: [a[0], *a[1]])
    term = (
        -tok("Name", "P")
        + maybe(domain)
        + -_op("(")
        + vars_
        + maybe(-_op("|") + given_list)
        + -_op(")")
    ) >> _build_term

    expr = forward_decl()
    bound = (-_op("{") + vars_ + -_op("}")) | (var >> (lambda v: [v]))
    sum_ = -tok("Sum") + bound + expr >> (lambda a: Sum(frozenset(a[0]), a[1]))
    one = tok("Number", "1") >> (lambda _: ONE)
    factor = term | sum_ | (-_op("(") + expr + -_op(")")) | one
    expr.define(factor + many((_op("*") | _op("/")) + factor) >> _fold)
    return expr + -finished


_PARSER = _grammar()


def parse_estimand(text: str, canonical: bool = True) -> Estimand:
    """Parse the text form (as produced by `render(e, "text")`).

    Raises:
        GrammarError: on malformed input
        EstimandError: if the parsed expression is ill-formed
    """
    tokens: Sequence[Token] = tokenize(text)
    if not tokens:
        raise GrammarError(None, "empty input")
    try:
        e = _PARSER.parse(tokens)
    except NoParseError as err:
        raise GrammarError(_column(err), err.msg) from err
    logger.debug("Parsed estimand %r", text)
    return canonicalize(e) if canonical else e


def parse_term(text: str) -> ProbTerm:
    """Parse a single probability term such as a query."""
    e = parse_estimand(text, canonical=False)
    if not isinstance(e, ProbTerm):
        raise GrammarError(None, "expected a single probability term")
    return e


def _column(err: NoParseError) -> int | None:
    state = getattr(err, "state", None)
    if state is None:
        return None
    pos = getattr(state, "max", None)
    return pos if isinstance(pos, int) else None
