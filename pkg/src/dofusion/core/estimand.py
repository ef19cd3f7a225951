"""Symbolic probability expressions.

An estimand is a tree of atomic probability terms combined by sums, products
and quotients. Symbols range over whole variables: `Var("X")` is the value x of
vertex X and `Var("X", 1)` a second copy x' bound by some sum.

Canonical form is prenex: every sum is hoisted to the top with its bound
variables renamed apart, products are flattened and factors sorted. Quotients
keep their own canonical numerator and denominator.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .graph import Graph, VertexSet

logger = logging.getLogger(__name__)

TARGET = "*"
DEFAULT_SOURCE = "pi"


class EstimandError(Exception):
    """Malformed estimand."""

    pass


class CaptureDetected(EstimandError):
    """A sum rebinds a variable already bound by an enclosing sum."""

    pass


class InvalidQuery(EstimandError):
    """A query that does not describe a target-domain probability over the graph."""

    pass


# =============================================================================
# Syntax tree
# =============================================================================


@dataclass(frozen=True, order=True)
class Var:
    """A value symbol of a vertex; `prime` distinguishes bound copies."""

    vertex: str
    prime: int = 0

    @classmethod
    def of(cls, item: str | Var) -> Var:
        if isinstance(item, Var):
            return item
        stripped = item.rstrip("'")
        return cls(stripped, len(item) - len(stripped))

    def __str__(self) -> str:
        return self.vertex + "'" * self.prime


def _vars(items: Iterable[str | Var]) -> frozenset[Var]:
    if isinstance(items, (str, Var)):
        items = [items]
    return frozenset(Var.of(i) for i in items)


@dataclass(frozen=True)
class ProbTerm:
    """P^domain(outcomes | do(do_set), conditions [, S=1])."""

    outcomes: frozenset[Var]
    conditions: frozenset[Var] = frozenset()
    do_set: frozenset[Var] = frozenset()
    selected: bool = False
    domain: str = TARGET

    def __post_init__(self) -> None:
        if not self.outcomes:
            raise EstimandError("a probability term needs at least one outcome")
        parts = (self.outcomes, self.conditions, self.do_set)
        vertices = [v.vertex for part in parts for v in part]
        if len(vertices) != len(set(vertices)):
            raise EstimandError(f"vertex repeated within {self}")

    @property
    def symbols(self) -> frozenset[Var]:
        return self.outcomes | self.conditions | self.do_set

    @property
    def vertices(self) -> VertexSet:
        return frozenset(v.vertex for v in self.symbols)

    def __str__(self) -> str:
        return render(self, "text")


@dataclass(frozen=True)
class Sum:
    bound: frozenset[Var]
    body: Estimand


@dataclass(frozen=True)
class Product:
    factors: tuple[Estimand, ...] = ()


@dataclass(frozen=True)
class Quotient:
    numerator: Estimand
    denominator: Estimand


Estimand = Union[ProbTerm, Sum, Product, Quotient]

ONE = Product(())


def P(
    outcomes: Iterable[str | Var] | str,
    given: Iterable[str | Var] | str = (),
    do: Iterable[str | Var] | str = (),
    selected: bool = False,
    domain: str = TARGET,
) -> ProbTerm:
    """Shorthand constructor: P("Y", given=["Z"], do="X")."""
    return ProbTerm(_vars(outcomes), _vars(given), _vars(do), selected, domain)


def summation(bound: Iterable[str | Var] | str, body: Estimand) -> Estimand:
    bound_vars = _vars(bound)
    return Sum(bound_vars, body) if bound_vars else body


def product(*factors: Estimand) -> Estimand:
    return Product(tuple(factors))


# =============================================================================
# Structural helpers
# =============================================================================


def free_vars(e: Estimand) -> frozenset[Var]:
    if isinstance(e, ProbTerm):
        return e.symbols
    if isinstance(e, Sum):
        return free_vars(e.body) - e.bound
    if isinstance(e, Product):
        out: frozenset[Var] = frozenset()
        for f in e.factors:
            out |= free_vars(f)
        return out
    return free_vars(e.numerator) | free_vars(e.denominator)


def all_vars(e: Estimand) -> frozenset[Var]:
    """Every symbol occurring in `e`, bound or free."""
    if isinstance(e, ProbTerm):
        return e.symbols
    if isinstance(e, Sum):
        return all_vars(e.body) | e.bound
    if isinstance(e, Product):
        out: frozenset[Var] = frozenset()
        for f in e.factors:
            out |= all_vars(f)
        return out
    return all_vars(e.numerator) | all_vars(e.denominator)


def bound_vars(e: Estimand) -> frozenset[Var]:
    return all_vars(e) - free_vars(e)


def substitute(e: Estimand, mapping: Mapping[Var, Var]) -> Estimand:
    """Rename symbols everywhere (free and bound alike)."""
    if not mapping:
        return e
    if isinstance(e, ProbTerm):

        def sub(s: frozenset[Var]) -> frozenset[Var]:
            return frozenset(mapping.get(v, v) for v in s)

        return replace(e, outcomes=sub(e.outcomes), conditions=sub(e.conditions), do_set=sub(e.do_set))
    if isinstance(e, Sum):
        return Sum(frozenset(mapping.get(v, v) for v in e.bound), substitute(e.body, mapping))
    if isinstance(e, Product):
        return Product(tuple(substitute(f, mapping) for f in e.factors))
    return Quotient(substitute(e.numerator, mapping), substitute(e.denominator, mapping))


def terms(e: Estimand) -> Iterator[ProbTerm]:
    """All atomic terms, depth first."""
    for _path, t in walk_terms(e):
        yield t


def walk_terms(e: Estimand, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], ProbTerm]]:
    """(path, term) for every atomic term of a canonical estimand.

    A path indexes the factor list of the prenex form; a quotient factor
    continues with 0 (numerator) or 1 (denominator) and a path into that part.
    """
    _bound, factors = split(e)
    for i, f in enumerate(factors):
        if isinstance(f, ProbTerm):
            yield (*prefix, i), f
        elif isinstance(f, Quotient):
            yield from walk_terms(f.numerator, (*prefix, i, 0))
            yield from walk_terms(f.denominator, (*prefix, i, 1))


def split(e: Estimand) -> tuple[frozenset[Var], tuple[Estimand, ...]]:
    """Bound variables and factor list of a prenex expression."""
    bound: frozenset[Var] = frozenset()
    if isinstance(e, Sum):
        bound, e = e.bound, e.body
    if isinstance(e, Product):
        return bound, e.factors
    return bound, (e,)


def join(bound: Iterable[Var], factors: Iterable[Estimand]) -> Estimand:
    """Inverse of split (not canonicalized)."""
    fs = tuple(factors)
    body: Estimand = fs[0] if len(fs) == 1 else Product(fs)
    b = frozenset(bound)
    return Sum(b, body) if b else body


def subterm(e: Estimand, path: tuple[int, ...]) -> Estimand:
    _bound, factors = split(e)
    f = factors[path[0]]
    if len(path) == 1:
        return f
    if not isinstance(f, Quotient):
        raise EstimandError(f"path {list(path)} descends into a non-quotient")
    part = f.numerator if path[1] == 0 else f.denominator
    return subterm(part, path[2:])


def replace_at(e: Estimand, path: tuple[int, ...], new: Estimand) -> Estimand:
    """Swap the factor at `path` for `new`; the result is not canonicalized."""
    bound, factors = split(e)
    i = path[0]
    if i >= len(factors):
        raise EstimandError(f"path {list(path)} out of range")
    if len(path) == 1:
        repl = new
    else:
        q = factors[i]
        if not isinstance(q, Quotient):
            raise EstimandError(f"path {list(path)} descends into a non-quotient")
        if path[1] == 0:
            repl = Quotient(replace_at(q.numerator, path[2:], new), q.denominator)
        else:
            repl = Quotient(q.numerator, replace_at(q.denominator, path[2:], new))
    return join(bound, (*factors[:i], repl, *factors[i + 1 :]))


def size(e: Estimand) -> int:
    """Symbol count used to rank search states."""
    if isinstance(e, ProbTerm):
        return len(e.symbols) + int(e.selected)
    if isinstance(e, Sum):
        return len(e.bound) + size(e.body)
    if isinstance(e, Product):
        return sum(size(f) for f in e.factors)
    return size(e.numerator) + size(e.denominator)


# =============================================================================
# Canonical form
# =============================================================================


def canonicalize(e: Estimand) -> Estimand:
    """Deterministic prenex normal form (idempotent).

    Raises:
        CaptureDetected: if a sum rebinds a variable of an enclosing sum
        EstimandError: if a bound variable never occurs in its body
    """
    return _canonical(e, frozenset())


def _canonical(e: Estimand, reserved: frozenset[Var]) -> Estimand:
    free = free_vars(e)
    taken = set(free) | set(reserved) | set(all_vars(e))
    bound, factors = _prenex(e, frozenset(), taken)
    factors = [f for f in factors if f != ONE]

    # Final names: the lowest primes not used by free or reserved symbols
    avoid = set(free) | set(reserved)
    for f in factors:
        if isinstance(f, Quotient):
            avoid |= bound_vars(f)
    mapping: dict[Var, Var] = {}
    by_vertex: dict[str, list[Var]] = {}
    for b in bound:
        by_vertex.setdefault(b.vertex, []).append(b)
    for vertex in sorted(by_vertex):
        group = by_vertex[vertex]
        if len(group) > 1:
            group.sort(key=lambda b: _occurrence_key(b, factors))
        prime = 0
        for b in group:
            while Var(vertex, prime) in avoid:
                prime += 1
            mapping[b] = Var(vertex, prime)
            avoid.add(Var(vertex, prime))
    final_bound = frozenset(mapping.values())
    factors = [substitute(f, mapping) for f in factors]

    inner_reserved = reserved | final_bound | free
    out: list[Estimand] = []
    for f in factors:
        if isinstance(f, Quotient):
            out.extend(_canonical_quotient(f, inner_reserved))
        else:
            out.append(f)
    out.sort(key=_factor_key)
    if not out:
        body: Estimand = ONE
    elif len(out) == 1:
        body = out[0]
    else:
        body = Product(tuple(out))
    return Sum(final_bound, body) if final_bound else body


def _prenex(
    e: Estimand, enclosing: frozenset[Var], taken: set[Var]
) -> tuple[list[Var], list[Estimand]]:
    if isinstance(e, ProbTerm):
        return [], [e]
    if isinstance(e, Product):
        bound: list[Var] = []
        factors: list[Estimand] = []
        for f in e.factors:
            b, fs = _prenex(f, enclosing, taken)
            bound.extend(b)
            factors.extend(fs)
        return bound, factors
    if isinstance(e, Quotient):
        return [], [e]
    # Sum
    clash = e.bound & enclosing
    if clash:
        raise CaptureDetected(f"nested sums both bind {', '.join(map(str, sorted(clash)))}")
    unused = e.bound - free_vars(e.body)
    if unused:
        raise EstimandError(f"bound variable never used: {', '.join(map(str, sorted(unused)))}")
    # Rename apart so hoisting cannot capture anything
    mapping: dict[Var, Var] = {}
    for b in sorted(e.bound):
        fresh = Var(b.vertex, 100)
        while fresh in taken:
            fresh = Var(b.vertex, fresh.prime + 1)
        mapping[b] = fresh
        taken.add(fresh)
    body = substitute(e.body, mapping)
    inner_bound, factors = _prenex(body, enclosing | e.bound | frozenset(mapping.values()), taken)
    return [mapping[b] for b in sorted(e.bound)] + inner_bound, factors


_MASK = Var("□")


def _occurrence_key(b: Var, factors: list[Estimand]) -> tuple[str, ...]:
    return tuple(
        sorted(render(substitute(f, {b: _MASK}), "text") for f in factors if b in all_vars(f))
    )


def _factor_key(f: Estimand) -> tuple[int, str]:
    # Larger terms first, then by text
    return (-len(all_vars(f)), render(f, "text"))


def _canonical_quotient(q: Quotient, reserved: frozenset[Var]) -> list[Estimand]:
    num = _canonical(q.numerator, reserved)
    den = _canonical(q.denominator, reserved)
    nb, nf = split(num)
    db, df = split(den)
    if not nb and not db:
        # Cancel syntactically identical factors only
        remaining = [f for f in df if f != ONE]
        kept: list[Estimand] = []
        for f in nf:
            if f in remaining:
                remaining.remove(f)
            elif f != ONE:
                kept.append(f)
        if not remaining:
            return kept
        num = join((), kept) if kept else ONE
        den = join((), remaining)
    return [Quotient(num, den)]


# =============================================================================
# Rendering
# =============================================================================


class RenderFormat(Enum):
    TEXT = "text"
    PRETTY = "pretty"
    LATEX = "latex"


def render(e: Estimand, fmt: str | RenderFormat = RenderFormat.TEXT) -> str:
    """Render an estimand.

    `text` is the round-trippable grammar, `pretty` the unicode form used in
    reports, `latex` follows the usual notation (do(·), superscript domain,
    S=1).
    """
    fmt = RenderFormat(fmt)
    if fmt is RenderFormat.TEXT:
        return _Text().expr(e)
    transport = any(t.domain != TARGET for t in terms_any(e))
    if fmt is RenderFormat.PRETTY:
        return _Pretty(transport).expr(e)
    return _Latex(transport).expr(e)


def terms_any(e: Estimand) -> Iterator[ProbTerm]:
    """Atomic terms of any (not necessarily canonical) estimand."""
    if isinstance(e, ProbTerm):
        yield e
    elif isinstance(e, Sum):
        yield from terms_any(e.body)
    elif isinstance(e, Product):
        for f in e.factors:
            yield from terms_any(f)
    else:
        yield from terms_any(e.numerator)
        yield from terms_any(e.denominator)


class _Text:
    def var(self, v: Var) -> str:
        return str(v)

    def vars(self, vs: Iterable[Var]) -> str:
        return ",".join(self.var(v) for v in sorted(vs))

    def term(self, t: ProbTerm) -> str:
        head = "P" if t.domain == TARGET else f"P^{t.domain}"
        given: list[str] = []
        if t.do_set:
            given.append(f"do({self.vars(t.do_set)})")
        given.extend(self.var(v) for v in sorted(t.conditions))
        if t.selected:
            given.append("S=1")
        inner = self.vars(t.outcomes)
        if given:
            inner += "|" + ",".join(given)
        return f"{head}({inner})"

    def expr(self, e: Estimand) -> str:
        if isinstance(e, ProbTerm):
            return self.term(e)
        if isinstance(e, Sum):
            return f"sum_{{{self.vars(e.bound)}}} {self.expr(e.body)}"
        if isinstance(e, Product):
            if not e.factors:
                return "1"
            return " * ".join(self.factor(f) for f in e.factors)
        return f"(({self.expr(e.numerator)}) / ({self.expr(e.denominator)}))"

    def factor(self, f: Estimand) -> str:
        return f"({self.expr(f)})" if isinstance(f, Sum) else self.expr(f)


class _Pretty(_Text):
    def __init__(self, transport: bool):
        self.transport = transport

    def var(self, v: Var) -> str:
        return v.vertex.lower() + "'" * v.prime

    def head(self, t: ProbTerm) -> str:
        if t.domain == TARGET:
            return "P*" if self.transport else "P"
        if t.domain == DEFAULT_SOURCE:
            return "P"
        return f"P^{{({t.domain})}}"

    def term(self, t: ProbTerm) -> str:
        given = [f"do({self.var(v)})" for v in sorted(t.do_set)]
        given.extend(self.var(v) for v in sorted(t.conditions))
        if t.selected:
            given.append("S=1")
        inner = self.vars(t.outcomes)
        if given:
            inner += "|" + ",".join(given)
        return f"{self.head(t)}({inner})"

    def expr(self, e: Estimand) -> str:
        if isinstance(e, Sum):
            names = self.vars(e.bound)
            sub = names if len(e.bound) == 1 else f"{{{names}}}"
            return f"Σ_{sub} {self.expr(e.body)}"
        if isinstance(e, Product):
            if not e.factors:
                return "1"
            return " ".join(self.factor(f) for f in e.factors)
        if isinstance(e, Quotient):
            return f"[{self.expr(e.numerator)}] / [{self.expr(e.denominator)}]"
        return self.term(e)

    def factor(self, f: Estimand) -> str:
        if isinstance(f, Sum):
            return f"[{self.expr(f)}]"
        return self.expr(f)


class _Latex(_Pretty):
    def var(self, v: Var) -> str:
        name = v.vertex.lower()
        stem = name.rstrip("0123456789")
        digits = name[len(stem) :]
        text = f"{stem}_{{{digits}}}" if digits and stem else name
        return text + "'" * v.prime

    def vars(self, vs: Iterable[Var]) -> str:
        return ", ".join(self.var(v) for v in sorted(vs))

    def head(self, t: ProbTerm) -> str:
        if t.domain == TARGET:
            return "P^{*}" if self.transport else "P"
        if t.domain == DEFAULT_SOURCE:
            return "P"
        return f"P^{{({t.domain})}}"

    def term(self, t: ProbTerm) -> str:
        given = [f"do({self.var(v)})" for v in sorted(t.do_set)]
        given.extend(self.var(v) for v in sorted(t.conditions))
        if t.selected:
            given.append("S=1")
        inner = self.vars(t.outcomes)
        if given:
            inner += " \\mid " + ", ".join(given)
        return f"{self.head(t)}({inner})"

    def expr(self, e: Estimand) -> str:
        if isinstance(e, Sum):
            return f"\\sum_{{{self.vars(e.bound)}}} {self.expr(e.body)}"
        if isinstance(e, Quotient):
            return f"\\frac{{{self.expr(e.numerator)}}}{{{self.expr(e.denominator)}}}"
        if isinstance(e, Product):
            if not e.factors:
                return "1"
            return " ".join(self.factor(f) for f in e.factors)
        return self.term(e)

    def factor(self, f: Estimand) -> str:
        if isinstance(f, Sum):
            return f"\\left[{self.expr(f)}\\right]"
        return self.expr(f)


# =============================================================================
# Sources and estimability
# =============================================================================


class SourceKind(Enum):
    OBSERVATIONAL = "observational"
    EXPERIMENTAL = "experimental"


@dataclass(frozen=True)
class Source:
    """One estimable distribution family.

    An experimental source on Z supplies P(v∖z'|do(z')) for every z' ⊆ Z.
    `measured=None` means every endogenous vertex is measured.
    """

    domain: str = TARGET
    intervened: frozenset[str] = frozenset()
    selected: bool = False
    measured: frozenset[str] | None = None

    @property
    def kind(self) -> SourceKind:
        return SourceKind.EXPERIMENTAL if self.intervened else SourceKind.OBSERVATIONAL

    def supplies(self, t: ProbTerm) -> bool:
        if t.domain != self.domain or t.selected != self.selected:
            return False
        do_vertices = frozenset(v.vertex for v in t.do_set)
        if not do_vertices <= self.intervened:
            return False
        return self.measured is None or t.vertices <= self.measured

    def __str__(self) -> str:
        parts = ["exp " + ",".join(sorted(self.intervened))] if self.intervened else ["obs"]
        if self.selected:
            parts.append("selected")
        if self.domain != TARGET:
            parts.append(f"domain={self.domain}")
        if self.measured is not None:
            parts.append("measured=" + ",".join(sorted(self.measured)))
        return " ".join(parts)


@dataclass(frozen=True)
class SourceCatalog:
    """The distributions an analyst can estimate."""

    sources: tuple[Source, ...]

    def __post_init__(self) -> None:
        if not self.sources:
            raise EstimandError("a source catalogue needs at least one source")

    @classmethod
    def of(cls, *sources: Source) -> SourceCatalog:
        return cls(tuple(sources))

    def adding(self, source: Source) -> SourceCatalog:
        if source in self.sources:
            return self
        return SourceCatalog((*self.sources, source))

    def check(self, g: Graph) -> None:
        for s in self.sources:
            g.check(s.intervened)
            if s.measured is not None:
                g.check(s.measured)

    @property
    def domains(self) -> frozenset[str]:
        return frozenset(s.domain for s in self.sources)

    def intervened(self, domain: str | None = None) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for s in self.sources:
            if domain is None or s.domain == domain:
                out |= s.intervened
        return out

    @property
    def has_selected(self) -> bool:
        return any(s.selected for s in self.sources)

    def match(self, t: ProbTerm) -> Source | None:
        for s in self.sources:
            if s.supplies(t):
                return s
        return None


@dataclass(frozen=True)
class TermReport:
    path: tuple[int, ...]
    term: ProbTerm
    source: Source | None


@dataclass(frozen=True)
class EstimabilityReport:
    """Per-term outcome of an estimability check."""

    terms: tuple[TermReport, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(r.source is not None for r in self.terms)

    @property
    def missing(self) -> list[TermReport]:
        return [r for r in self.terms if r.source is None]

    def __bool__(self) -> bool:
        return self.ok


def estimable(e: Estimand, cat: SourceCatalog) -> EstimabilityReport:
    """Check every atomic term of a canonical estimand against the catalogue."""
    return EstimabilityReport(
        tuple(TermReport(path, t, cat.match(t)) for path, t in walk_terms(e))
    )


def unestimable_count(e: Estimand, cat: SourceCatalog) -> int:
    return sum(1 for _path, t in walk_terms(e) if cat.match(t) is None)


# =============================================================================
# Queries
# =============================================================================


@dataclass(frozen=True)
class Query:
    """A target-domain probability over a graph."""

    term: ProbTerm
    graph: Graph

    def __post_init__(self) -> None:
        if self.term.domain != TARGET:
            raise InvalidQuery("queries must refer to the target domain")
        if any(v.prime for v in self.term.symbols):
            raise InvalidQuery("query symbols cannot be primed")
        unknown = self.term.vertices - self.graph.endogenous
        if unknown:
            raise InvalidQuery(f"not endogenous vertices: {', '.join(sorted(unknown))}")

    @property
    def x(self) -> VertexSet:
        return frozenset(v.vertex for v in self.term.do_set)

    @property
    def y(self) -> VertexSet:
        return frozenset(v.vertex for v in self.term.outcomes)

    @property
    def given(self) -> VertexSet:
        return frozenset(v.vertex for v in self.term.conditions)
