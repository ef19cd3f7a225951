"""Rewrite rules over canonical estimands.

Every rule knows how to rewrite the term at a focus path and which
d-separation premise (if any) licenses the rewrite. `bindings` enumerates the
instances worth trying during search; `apply_move` is shared by the search and
by the verifier so a replayed step is computed exactly as it was found.
"""

from __future__ import annotations

import itertools
import logging
from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, ClassVar

from .estimand import (
    ONE,
    TARGET,
    Estimand,
    EstimandError,
    Product,
    ProbTerm,
    Quotient,
    SourceCatalog,
    Sum,
    Var,
    all_vars,
    canonicalize,
    free_vars,
    join,
    replace_at,
    split,
    subterm,
    walk_terms,
)
from .graph import Graph, VertexKind, VertexSet, ancestors, mutilate
from .separation import d_separated

logger = logging.getLogger(__name__)


class RuleName(str, Enum):
    RULE1 = "Rule1"
    RULE2 = "Rule2"
    RULE3 = "Rule3"
    CONDITION = "Condition"
    MARGINALIZE = "Marginalize"
    CHAIN_SPLIT = "ChainSplit"
    CANCEL_QUOTIENT = "CancelQuotient"
    DOMAIN_EXCHANGE = "DomainExchange"
    SELECTION_ATTACH = "SelectionAttach"


PREMISED = frozenset(
    {
        RuleName.RULE1,
        RuleName.RULE2,
        RuleName.RULE3,
        RuleName.DOMAIN_EXCHANGE,
        RuleName.SELECTION_ATTACH,
    }
)


class InapplicableStep(EstimandError):
    """A move that does not fit the expression it is applied to."""

    pass


@dataclass(frozen=True)
class Premise:
    """(x ⫫ y | z) in the graph with `removed` deleted and the cuts applied."""

    x: VertexSet
    y: VertexSet
    z: VertexSet
    cut_incoming: VertexSet = frozenset()
    cut_outgoing: VertexSet = frozenset()
    removed: VertexSet = frozenset()

    def graph(self, g: Graph) -> Graph:
        return mutilate(g.without(self.removed), self.cut_incoming, self.cut_outgoing)

    def holds(self, g: Graph) -> bool:
        return d_separated(self.graph(g), self.x, self.y, self.z)

    @property
    def mutilation(self) -> tuple[VertexSet, VertexSet, VertexSet]:
        return (self.cut_incoming, self.cut_outgoing, self.removed)

    def to_json(self) -> dict[str, Any]:
        return {
            "x": sorted(self.x),
            "y": sorted(self.y),
            "z": sorted(self.z),
            "mutilation": {
                "cut_incoming": sorted(self.cut_incoming),
                "cut_outgoing": sorted(self.cut_outgoing),
                "removed": sorted(self.removed),
            },
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Premise:
        m = data.get("mutilation", {})
        return cls(
            x=frozenset(data["x"]),
            y=frozenset(data["y"]),
            z=frozenset(data.get("z", ())),
            cut_incoming=frozenset(m.get("cut_incoming", ())),
            cut_outgoing=frozenset(m.get("cut_outgoing", ())),
            removed=frozenset(m.get("removed", ())),
        )

    def __str__(self) -> str:
        def fmt(s: VertexSet) -> str:
            return ",".join(sorted(s)) or "∅"

        text = f"({fmt(self.x)} ⫫ {fmt(self.y)}"
        if self.z:
            text += f" | {fmt(self.z)}"
        text += ")"
        tags = []
        if self.cut_incoming:
            tags.append(f"in={fmt(self.cut_incoming)}")
        if self.cut_outgoing:
            tags.append(f"out={fmt(self.cut_outgoing)}")
        if self.removed:
            tags.append(f"without={fmt(self.removed)}")
        return text + (f" in G[{'; '.join(tags)}]" if tags else " in G")


ArgValue = str | tuple[str, ...] | int


@dataclass(frozen=True)
class Move:
    """A rule instance: which rule, where, and with which arguments."""

    rule: RuleName
    focus: tuple[int, ...]
    args: tuple[tuple[str, ArgValue], ...] = ()

    @classmethod
    def make(cls, rule: RuleName, focus: tuple[int, ...] | list[int], **kwargs: Any) -> Move:
        args = []
        for key in sorted(kwargs):
            value = kwargs[key]
            if isinstance(value, (list, tuple, set, frozenset)):
                value = tuple(sorted(str(v) for v in value))
            args.append((key, value))
        return cls(RuleName(rule), tuple(focus), tuple(args))

    def arg(self, key: str, default: Any = None) -> Any:
        for k, v in self.args:
            if k == key:
                return v
        if default is None:
            raise InapplicableStep(f"{self.rule.value} needs argument {key!r}")
        return default

    def vars(self, key: str = "vars") -> frozenset[Var]:
        value = self.arg(key)
        items = (value,) if isinstance(value, str) else value
        out = frozenset(Var.of(v) for v in items)
        if not out:
            raise InapplicableStep(f"{self.rule.value} needs at least one variable")
        return out

    def args_json(self) -> dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.args}


@dataclass(frozen=True)
class RewriteStep:
    """One applied move with its premise and the expressions around it."""

    move: Move
    premise: Premise | None
    before: Estimand
    after: Estimand

    @property
    def rule(self) -> RuleName:
        return self.move.rule

    @property
    def focus(self) -> tuple[int, ...]:
        return self.move.focus


@dataclass(frozen=True)
class RewriteContext:
    """What move generation needs to know beyond the expression itself."""

    graph: Graph
    catalog: SourceCatalog
    query_do: VertexSet = frozenset()
    max_term_width: int = 8
    max_condition_size: int = 3
    neighbourhood: int = 2
    experimental: VertexSet = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "experimental", self.catalog.intervened())

    def estimable(self, t: ProbTerm) -> bool:
        return self.catalog.match(t) is not None


# =============================================================================
# Shared helpers
# =============================================================================


def _vertices(vs: frozenset[Var]) -> VertexSet:
    return frozenset(v.vertex for v in vs)


def _term_at(e: Estimand, focus: tuple[int, ...]) -> ProbTerm:
    try:
        t = subterm(e, focus)
    except (IndexError, EstimandError) as err:
        raise InapplicableStep(f"no subterm at {list(focus)}") from err
    if not isinstance(t, ProbTerm):
        raise InapplicableStep(f"subterm at {list(focus)} is not a probability term")
    return t


def _parts(g: Graph, t: ProbTerm) -> tuple[VertexSet, VertexSet, VertexSet, VertexSet]:
    """Outcome, do, condition and selection vertex sets of a term."""
    selection = g.selection if t.selected else frozenset()
    return _vertices(t.outcomes), _vertices(t.do_set), _vertices(t.conditions), selection


def _require_endogenous(g: Graph, names: VertexSet) -> None:
    for n in names:
        if n not in g.names or g.kind(n) is not VertexKind.ENDOGENOUS:
            raise InapplicableStep(f"{n} is not an endogenous vertex")


def _insertion_symbol(e: Estimand, vertex: str) -> Var | None:
    """Symbol a new observation or action on `vertex` should use.

    A free symbol of the vertex is reused; a vertex absent from the expression
    gets its plain symbol. Vertices only present as bound symbols are skipped.
    """
    free = [v for v in free_vars(e) if v.vertex == vertex]
    if free:
        return min(free)
    if any(v.vertex == vertex for v in all_vars(e)):
        return None
    return Var(vertex)


def _fresh(e: Estimand, vertex: str) -> Var:
    used = all_vars(e)
    prime = 0
    while Var(vertex, prime) in used:
        prime += 1
    return Var(vertex, prime)


class Rule(ABC):
    """A rewrite of one focus subterm."""

    name: ClassVar[RuleName]

    @abstractmethod
    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        """Return the (uncanonicalized) rewritten expression and its premise."""

    @abstractmethod
    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        """Candidate moves; premises are checked by the caller."""


# =============================================================================
# do-calculus
# =============================================================================


class ObservationRule(Rule):
    """Insert or delete observations: (Y ⫫ V | D, C∖V) in G with D cut from above."""

    name = RuleName.RULE1

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        v = move.vars()
        action = move.arg("action")
        y, d, c, s = _parts(g, t)
        vv = _vertices(v)
        if action == "delete":
            if not v <= t.conditions:
                raise InapplicableStep("deleted observations must be conditions of the term")
            new = replace(t, conditions=t.conditions - v)
            rest = c - vv
        elif action == "insert":
            if vv & t.vertices:
                raise InapplicableStep("inserted observations must be new to the term")
            _require_endogenous(g, vv)
            new = replace(t, conditions=t.conditions | v)
            rest = c
        else:
            raise InapplicableStep(f"unknown action {action!r}")
        premise = Premise(
            x=vv, y=y, z=d | rest | s, cut_incoming=d, removed=g.discrepancy
        )
        return replace_at(e, move.focus, new), premise

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        g = ctx.graph
        for path, t in walk_terms(e):
            if ctx.estimable(t):
                continue
            for c in sorted(t.conditions):
                yield Move.make(self.name, path, action="delete", vars=[c])
            if len(t.symbols) >= ctx.max_term_width:
                continue
            near = g.neighbourhood(t.vertices, ctx.neighbourhood) & g.endogenous
            for vertex in sorted(near - t.vertices):
                sym = _insertion_symbol(e, vertex)
                if sym is not None:
                    yield Move.make(self.name, path, action="insert", vars=[sym])


class ExchangeRule(Rule):
    """Exchange actions and observations.

    demote: do(V) becomes an observation when (Y ⫫ V | D∖V, C) holds with D∖V
    cut from above and V cut from below; promote is the converse.
    """

    name = RuleName.RULE2

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        v = move.vars()
        vv = _vertices(v)
        action = move.arg("action")
        y, d, c, s = _parts(g, t)
        if action == "demote":
            if not v <= t.do_set:
                raise InapplicableStep("demoted actions must be in the do-set")
            new = replace(t, do_set=t.do_set - v, conditions=t.conditions | v)
            others, rest = d - vv, c
        elif action == "promote":
            if not v <= t.conditions:
                raise InapplicableStep("promoted observations must be conditions")
            new = replace(t, do_set=t.do_set | v, conditions=t.conditions - v)
            others, rest = d, c - vv
        else:
            raise InapplicableStep(f"unknown action {action!r}")
        premise = Premise(
            x=vv,
            y=y,
            z=others | rest | s,
            cut_incoming=others,
            cut_outgoing=vv,
            removed=g.discrepancy,
        )
        return replace_at(e, move.focus, new), premise

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        for path, t in walk_terms(e):
            if ctx.estimable(t):
                continue
            for v in sorted(t.do_set):
                yield Move.make(self.name, path, action="demote", vars=[v])
            for v in sorted(t.conditions):
                if v.vertex in ctx.experimental:
                    yield Move.make(self.name, path, action="promote", vars=[v])


class ActionRule(Rule):
    """Insert or delete actions: (Y ⫫ V | D∖V, C) with D∖V and V(W) cut from above.

    V(W) holds the members of V that are not ancestors of the observed
    vertices W (conditions plus selection) once D∖V is cut from above.
    """

    name = RuleName.RULE3

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        v = move.vars()
        vv = _vertices(v)
        action = move.arg("action")
        y, d, c, s = _parts(g, t)
        if action == "delete":
            if not v <= t.do_set:
                raise InapplicableStep("deleted actions must be in the do-set")
            new = replace(t, do_set=t.do_set - v)
            others = d - vv
        elif action == "insert":
            if vv & t.vertices:
                raise InapplicableStep("inserted actions must be new to the term")
            _require_endogenous(g, vv)
            new = replace(t, do_set=t.do_set | v)
            others = d
        else:
            raise InapplicableStep(f"unknown action {action!r}")
        observed = c | s
        base = mutilate(g.without(g.discrepancy), others)
        not_ancestors = vv - ancestors(base, observed) if observed else vv
        premise = Premise(
            x=vv,
            y=y,
            z=others | c | s,
            cut_incoming=others | not_ancestors,
            removed=g.discrepancy,
        )
        return replace_at(e, move.focus, new), premise

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        g = ctx.graph
        for path, t in walk_terms(e):
            if ctx.estimable(t):
                continue
            for v in sorted(t.do_set):
                yield Move.make(self.name, path, action="delete", vars=[v])
            # At most one action from the experiments beyond the query's own
            nested = _vertices(t.do_set) - ctx.query_do
            if nested & ctx.experimental or len(t.symbols) >= ctx.max_term_width:
                continue
            for vertex in sorted((ctx.experimental & g.endogenous) - t.vertices):
                sym = _insertion_symbol(e, vertex)
                if sym is not None:
                    yield Move.make(self.name, path, action="insert", vars=[sym])


# =============================================================================
# Probability axioms
# =============================================================================


class ConditionRule(Rule):
    """P(Y|D,C) = Σ_U P(Y|D,C,U) P(U|D,C) for fresh bound U."""

    name = RuleName.CONDITION

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        u = move.vars()
        if _vertices(u) & t.vertices:
            raise InapplicableStep("conditioning variables must be new to the term")
        if u & all_vars(e):
            raise InapplicableStep("conditioning variables must be fresh symbols")
        _require_endogenous(g, _vertices(u))
        if len(_vertices(u)) != len(u):
            raise InapplicableStep("one symbol per conditioning vertex")
        outcome = replace(t, conditions=t.conditions | u)
        weight = replace(t, outcomes=u)
        return replace_at(e, move.focus, Sum(u, Product((outcome, weight)))), None

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        g = ctx.graph
        bound_vertices = _vertices(all_vars(e) - free_vars(e))
        for path, t in walk_terms(e):
            if ctx.estimable(t):
                continue
            near = g.neighbourhood(t.vertices, ctx.neighbourhood) & g.endogenous
            pool = sorted(near - t.vertices - bound_vertices)
            room = ctx.max_term_width - len(t.symbols)
            for size in range(1, min(ctx.max_condition_size, room, len(pool)) + 1):
                for combo in itertools.combinations(pool, size):
                    fresh = [_fresh(e, vertex) for vertex in combo]
                    yield Move.make(self.name, path, vars=fresh)


class MarginalizeRule(Rule):
    """Sum a bound variable out of the single factor it appears in."""

    name = RuleName.MARGINALIZE

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        (u,) = tuple(move.vars("var"))
        bound, factors = split(e)
        if len(move.focus) != 1 or u not in bound:
            raise InapplicableStep(f"{u} is not bound at the top level")
        i = move.focus[0]
        t = _term_at(e, move.focus)
        holders = [j for j, f in enumerate(factors) if u in all_vars(f)]
        if holders != [i] or u not in t.outcomes:
            raise InapplicableStep(f"{u} must appear only as an outcome of factor {i}")
        rest = list(factors)
        if t.outcomes == frozenset({u}):
            del rest[i]
        else:
            rest[i] = replace(t, outcomes=t.outcomes - {u})
        return (join(bound - {u}, rest) if rest else ONE), None

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        bound, factors = split(e)
        for u in sorted(bound):
            holders = [j for j, f in enumerate(factors) if u in all_vars(f)]
            if len(holders) != 1:
                continue
            f = factors[holders[0]]
            if isinstance(f, ProbTerm) and u in f.outcomes:
                yield Move.make(self.name, [holders[0]], var=str(u))


class ChainRule(Rule):
    """Chain rule: P(A,B|C) = P(A|B,C) P(B|C), in either direction."""

    name = RuleName.CHAIN_SPLIT

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        action = move.arg("action")
        t = _term_at(e, move.focus)
        if action == "split":
            a = move.vars()
            if not a < t.outcomes:
                raise InapplicableStep("split needs a proper subset of the outcomes")
            rest = t.outcomes - a
            head = replace(t, outcomes=a, conditions=t.conditions | rest)
            tail = replace(t, outcomes=rest)
            return replace_at(e, move.focus, Product((head, tail))), None
        if action == "merge":
            if len(move.focus) != 1:
                raise InapplicableStep("merge works on top-level factors")
            bound, factors = split(e)
            j = int(move.arg("with"))
            i = move.focus[0]
            if j == i or j >= len(factors):
                raise InapplicableStep("merge needs two distinct factors")
            other = factors[j]
            if not isinstance(other, ProbTerm) or not _mergeable(t, other):
                raise InapplicableStep("factors do not form a chain")
            merged = replace(other, outcomes=other.outcomes | t.outcomes)
            rest = [f for k, f in enumerate(factors) if k not in (i, j)]
            return join(bound, [merged, *rest]), None
        raise InapplicableStep(f"unknown action {action!r}")

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        for path, t in walk_terms(e):
            if ctx.estimable(t) or len(t.outcomes) < 2:
                continue
            for a in sorted(t.outcomes):
                yield Move.make(self.name, path, action="split", vars=[a])
        _bound, factors = split(e)
        for i, f in enumerate(factors):
            if not isinstance(f, ProbTerm):
                continue
            for j, other in enumerate(factors):
                if j != i and isinstance(other, ProbTerm) and _mergeable(f, other):
                    yield Move.make(self.name, [i], action="merge", **{"with": j})


def _mergeable(head: ProbTerm, tail: ProbTerm) -> bool:
    return (
        head.do_set == tail.do_set
        and head.selected == tail.selected
        and head.domain == tail.domain
        and head.conditions == tail.outcomes | tail.conditions
        and not head.outcomes & tail.symbols
    )


class QuotientRule(Rule):
    """P(A,B|C) / P(B|C) = P(A|B,C); `expand` goes the other way."""

    name = RuleName.CANCEL_QUOTIENT

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        action = move.arg("action")
        if action == "cancel":
            q = subterm(e, move.focus)
            if not isinstance(q, Quotient):
                raise InapplicableStep(f"no quotient at {list(move.focus)}")
            num, den = q.numerator, q.denominator
            if not (isinstance(num, ProbTerm) and isinstance(den, ProbTerm)):
                raise InapplicableStep("only single-term quotients cancel")
            if not _cancellable(num, den):
                raise InapplicableStep("denominator is not a marginal of the numerator")
            new = replace(
                num, outcomes=num.outcomes - den.outcomes, conditions=num.conditions | den.outcomes
            )
            return replace_at(e, move.focus, new), None
        if action == "expand":
            t = _term_at(e, move.focus)
            b = move.vars()
            if not b <= t.conditions:
                raise InapplicableStep("expanded variables must be conditions")
            num = replace(t, outcomes=t.outcomes | b, conditions=t.conditions - b)
            den = replace(t, outcomes=b, conditions=t.conditions - b)
            return replace_at(e, move.focus, Quotient(num, den)), None
        raise InapplicableStep(f"unknown action {action!r}")

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        _bound, factors = split(e)
        for i, f in enumerate(factors):
            if (
                isinstance(f, Quotient)
                and isinstance(f.numerator, ProbTerm)
                and isinstance(f.denominator, ProbTerm)
                and _cancellable(f.numerator, f.denominator)
            ):
                yield Move.make(self.name, [i], action="cancel")


def _cancellable(num: ProbTerm, den: ProbTerm) -> bool:
    return (
        num.do_set == den.do_set
        and num.selected == den.selected
        and num.domain == den.domain
        and num.conditions == den.conditions
        and den.outcomes < num.outcomes
    )


# =============================================================================
# Selection and transport
# =============================================================================


class DomainRule(Rule):
    """Move a term between the target and a source domain.

    Licensed when the discrepancy vertices of that source are separated from
    the outcomes given the term's actions and observations, with the actions
    cut from above and the other domains' discrepancy vertices removed.
    """

    name = RuleName.DOMAIN_EXCHANGE

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        domain = str(move.arg("domain"))
        if domain == t.domain:
            raise InapplicableStep("term is already in that domain")
        if TARGET not in (domain, t.domain):
            raise InapplicableStep("exchange goes through the target domain")
        source = t.domain if domain == TARGET else domain
        y, d, c, s = _parts(g, t)
        marks = g.discrepancy_for(source)
        premise = Premise(
            x=marks,
            y=y,
            z=d | c | s,
            cut_incoming=d,
            removed=g.discrepancy - marks,
        )
        return replace_at(e, move.focus, replace(t, domain=domain)), premise

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        sources = sorted(ctx.catalog.domains - {TARGET})
        for path, t in walk_terms(e):
            if t.domain != TARGET or ctx.estimable(t):
                continue
            for domain in sources:
                yield Move.make(self.name, path, domain=domain)


class SelectionRule(Rule):
    """Attach (or detach) S=1: (S ⫫ Y | D, C) with D cut from above."""

    name = RuleName.SELECTION_ATTACH

    def rewrite(self, g: Graph, e: Estimand, move: Move) -> tuple[Estimand, Premise | None]:
        t = _term_at(e, move.focus)
        action = move.arg("action", "attach")
        if not g.selection:
            raise InapplicableStep("graph has no selection vertex")
        if action == "attach":
            if t.selected:
                raise InapplicableStep("term is already selected")
            new = replace(t, selected=True)
        elif action == "detach":
            if not t.selected:
                raise InapplicableStep("term is not selected")
            new = replace(t, selected=False)
        else:
            raise InapplicableStep(f"unknown action {action!r}")
        y, d, c, _s = _parts(g, t)
        premise = Premise(
            x=g.selection, y=y, z=d | c, cut_incoming=d, removed=g.discrepancy
        )
        return replace_at(e, move.focus, new), premise

    def bindings(self, ctx: RewriteContext, e: Estimand) -> Iterator[Move]:
        if not ctx.graph.selection or not ctx.catalog.has_selected:
            return
        for path, t in walk_terms(e):
            if not t.selected and not ctx.estimable(t):
                yield Move.make(self.name, path, action="attach")


RULES: dict[RuleName, Rule] = {
    rule.name: rule
    for rule in (
        ObservationRule(),
        ExchangeRule(),
        ActionRule(),
        ConditionRule(),
        MarginalizeRule(),
        ChainRule(),
        QuotientRule(),
        DomainRule(),
        SelectionRule(),
    )
}


def apply_move(g: Graph, e: Estimand, move: Move) -> RewriteStep:
    """Apply `move` to canonical `e`; the premise is computed, not checked.

    Raises:
        InapplicableStep: if the move does not fit `e`
    """
    try:
        rewritten, premise = RULES[move.rule].rewrite(g, e, move)
        after = canonicalize(rewritten)
    except InapplicableStep:
        raise
    except EstimandError as err:
        raise InapplicableStep(str(err)) from err
    return RewriteStep(move, premise, e, after)


def successors(ctx: RewriteContext, e: Estimand) -> Iterator[RewriteStep]:
    """Every licensed single-step rewrite of `e`, in a deterministic order."""
    g = ctx.graph
    for rule in RULES.values():
        for move in rule.bindings(ctx, e):
            try:
                step = apply_move(g, e, move)
            except InapplicableStep as err:
                logger.debug("Skipping %s: %s", move, err)
                continue
            if step.premise is not None and not step.premise.holds(g):
                continue
            yield step


# =============================================================================
# Single-term premise checks
# =============================================================================


def _symbols_for(t: ProbTerm, names: VertexSet) -> list[Var]:
    """Symbols of the term for `names`, plain symbols for vertices it lacks."""
    out = [v for v in t.symbols if v.vertex in names]
    present = _vertices(frozenset(out))
    return out + [Var(n) for n in sorted(names - present)]


def _licensed(g: Graph, t: ProbTerm, rule: RuleName, action: str, names: VertexSet) -> bool:
    move = Move.make(rule, (0,), action=action, vars=_symbols_for(t, names))
    try:
        _after, premise = RULES[rule].rewrite(g, t, move)
    except EstimandError:
        return False
    return premise is not None and premise.holds(g)


def applicable_rule1(t: ProbTerm, g: Graph, z: Iterable[str]) -> bool:
    """Whether observations z may be added to or removed from the conditions of t.

    Selection vertices are allowed in z: the premise is the same.
    """
    zs = frozenset(z)
    y, d, c, s = _parts(g, t)
    if not zs or zs & (y | d):
        return False
    premise = Premise(
        x=zs, y=y, z=d | ((c | s) - zs), cut_incoming=d, removed=g.discrepancy - zs
    )
    return premise.holds(g)


def applicable_rule2(t: ProbTerm, g: Graph, z: Iterable[str]) -> bool:
    """Whether do(z) may become an observation (or the reverse when z are conditions)."""
    zs = frozenset(z)
    _y, d, c, _s = _parts(g, t)
    if zs and zs <= d:
        return _licensed(g, t, RuleName.RULE2, "demote", zs)
    if zs and zs <= c:
        return _licensed(g, t, RuleName.RULE2, "promote", zs)
    return False


def applicable_rule3(t: ProbTerm, g: Graph, z: Iterable[str]) -> bool:
    """Whether do(z) may be deleted from t (or inserted when z is new to t)."""
    zs = frozenset(z)
    _y, d, _c, _s = _parts(g, t)
    if zs and zs <= d:
        return _licensed(g, t, RuleName.RULE3, "delete", zs)
    if zs and not zs & t.vertices:
        return _licensed(g, t, RuleName.RULE3, "insert", zs)
    return False
