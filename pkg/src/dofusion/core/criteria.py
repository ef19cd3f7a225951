"""Graphical shortcut criteria.

Each criterion answers a yes/no admissibility question and, when it holds,
hands back a ready-made estimand together with the do-calculus steps that
produce it. A negative answer only means the shortcut does not apply.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .estimand import (
    DEFAULT_SOURCE,
    Estimand,
    ProbTerm,
    Var,
    canonicalize,
    product,
    summation,
    walk_terms,
)
from .graph import Graph, VertexSet, ancestors, descendants, mutilate
from .rules import InapplicableStep, Move, RewriteStep, RuleName, apply_move
from .separation import _require_disjoint, d_separated, subsets

if TYPE_CHECKING:
    from .engine import Derivation

logger = logging.getLogger(__name__)


class CriterionError(Exception):
    """Base class for criterion failures."""

    pass


class NotAdmissible(CriterionError):
    """An estimand was requested for a set that fails the criterion."""

    pass


class NoSelectionVertex(CriterionError):
    pass


class NoDiscrepancyVertex(CriterionError):
    pass


class Criterion(str, Enum):
    BACKDOOR = "backdoor"
    FRONTDOOR = "frontdoor"
    S_BACKDOOR = "s_backdoor"
    S_ADMISSIBLE = "s_admissible"


@dataclass(frozen=True)
class AdjustmentReport:
    """Admissible sets in enumeration order and their minimal members."""

    criterion: Criterion
    admissible_sets: list[VertexSet] = field(default_factory=list)
    minimal_sets: list[VertexSet] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.admissible_sets)


def _sets(g: Graph, *groups: Iterable[str]) -> tuple[VertexSet, ...]:
    out = tuple(g.check(s) for s in groups)
    _require_disjoint(*out)
    return out


def _symbols(names: Iterable[str], prime: int = 0) -> list[Var]:
    return [Var(n, prime) for n in sorted(names)]


# =============================================================================
# Backdoor
# =============================================================================


def backdoor_admissible(g: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str]) -> bool:
    """Z has no descendant of X and blocks every X-Y path in G with X cut below."""
    xs, ys, zs = _sets(g, x, y, z)
    if zs & descendants(g, xs):
        return False
    return d_separated(mutilate(g, cut_outgoing=xs), xs, ys, zs)


def enumerate_backdoor_sets(
    g: Graph, x: Iterable[str], y: Iterable[str], universe: Iterable[str]
) -> AdjustmentReport:
    """Every admissible subset of `universe`.

    Subsets are visited in binary-counting order over the sorted universe
    (the first vertex is the lowest bit).
    """
    xs, ys, us = _sets(g, x, y, universe)
    pool = sorted(us)
    admissible: list[VertexSet] = []
    for mask in range(1 << len(pool)):
        z = frozenset(v for i, v in enumerate(pool) if mask >> i & 1)
        if backdoor_admissible(g, xs, ys, z):
            admissible.append(z)
    minimal = [s for s in admissible if not any(t < s for t in admissible)]
    logger.debug(
        "Backdoor sets for %s -> %s: %d admissible, %d minimal",
        sorted(xs),
        sorted(ys),
        len(admissible),
        len(minimal),
    )
    return AdjustmentReport(Criterion.BACKDOOR, admissible, minimal)


def pretreatment(g: Graph, x: Iterable[str], y: Iterable[str], exclude: Iterable[str] = ()) -> VertexSet:
    """Observed vertices that are not descendants of X, minus Y and `exclude`."""
    xs = g.check(x)
    return g.endogenous - descendants(g, xs) - frozenset(y) - frozenset(exclude)


def first_minimal_backdoor_set(
    g: Graph, x: Iterable[str], y: Iterable[str], exclude: Iterable[str] = ()
) -> VertexSet | None:
    """Smallest admissible set over the pretreatment vertices, ties broken lexicographically."""
    xs, ys = g.check(x), g.check(y)
    pool = pretreatment(g, xs, ys, exclude)
    for z in subsets(pool, len(pool)):
        if backdoor_admissible(g, xs, ys, z):
            return z
    return None


def backdoor_estimand(
    g: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> Estimand:
    """Σ_z P(y|x,z) P(z).

    Raises:
        NotAdmissible: if z fails the backdoor criterion
    """
    xs, ys, zs = _sets(g, x, y, z)
    if not backdoor_admissible(g, xs, ys, zs):
        raise NotAdmissible(f"{sorted(zs)} is not backdoor admissible for {sorted(xs)} -> {sorted(ys)}")
    if not zs:
        return canonicalize(ProbTerm(frozenset(_symbols(ys)), frozenset(_symbols(xs))))
    zv = _symbols(zs)
    return canonicalize(
        summation(
            zv,
            product(
                ProbTerm(frozenset(_symbols(ys)), frozenset(_symbols(xs) + zv)),
                ProbTerm(frozenset(zv)),
            ),
        )
    )


# =============================================================================
# Frontdoor
# =============================================================================


def frontdoor_admissible(
    g: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str], w: Iterable[str] = ()
) -> bool:
    """Conditional frontdoor check for mediators z relative to (x, y, w).

    1. z intercepts every directed path from x to y,
    2. no unblocked backdoor path from x to z given w,
    3. x and w block every backdoor path from z to y.

    w may not contain descendants of x.
    """
    xs, ys, zs, ws = _sets(g, x, y, z, w)
    if not zs:
        return False
    if ws & descendants(g, xs):
        return False
    if descendants(g.without(zs), xs) & ys:
        return False
    if not d_separated(mutilate(g, cut_outgoing=xs), xs, zs, ws):
        return False
    return d_separated(mutilate(g, cut_outgoing=zs), zs, ys, xs | ws)


def frontdoor_estimand(
    g: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str], w: Iterable[str] = ()
) -> Estimand:
    """Σ_{z,w} P(z|w,x) P(w) Σ_{x'} P(y|w,z,x') P(x'|w).

    Raises:
        NotAdmissible: if the frontdoor criterion fails
    """
    xs, ys, zs, ws = _sets(g, x, y, z, w)
    if not frontdoor_admissible(g, xs, ys, zs, ws):
        raise NotAdmissible(f"{sorted(zs)} is not frontdoor admissible given {sorted(ws)}")
    xv, yv, zv, wv = _symbols(xs), _symbols(ys), _symbols(zs), _symbols(ws)
    xp = _symbols(xs, prime=1)
    factors: list[Estimand] = [ProbTerm(frozenset(zv), frozenset(wv + xv))]
    if wv:
        factors.append(ProbTerm(frozenset(wv)))
    inner = summation(
        xp,
        product(
            ProbTerm(frozenset(yv), frozenset(wv + zv + xp)),
            ProbTerm(frozenset(xp), frozenset(wv)),
        ),
    )
    return canonicalize(summation(zv + wv, product(*factors, inner)))


def frontdoor_candidates(g: Graph, x: Iterable[str], y: Iterable[str]) -> VertexSet:
    """Mediators: descendants of x that are ancestors of y."""
    xs, ys = g.check(x), g.check(y)
    return (descendants(g, xs) & ancestors(g, ys) & g.endogenous) - xs - ys


def find_frontdoor(
    g: Graph, x: Iterable[str], y: Iterable[str], exclude: Iterable[str] = ()
) -> tuple[VertexSet, VertexSet] | None:
    """(mediators, w) for the first covariate set that makes the mediators admissible.

    w is tried in the order ∅, every pretreatment covariate, then the remaining
    subsets by size and name.
    """
    xs, ys = g.check(x), g.check(y)
    mediators = frontdoor_candidates(g, xs, ys) - frozenset(exclude)
    if not mediators:
        return None
    pool = pretreatment(g, xs, ys, exclude) - mediators
    tried: set[VertexSet] = set()
    for w in itertools.chain([frozenset(), pool], subsets(pool, len(pool))):
        if w in tried:
            continue
        tried.add(w)
        if frontdoor_admissible(g, xs, ys, mediators, w):
            return mediators, w
    return None


# =============================================================================
# Selection bias
# =============================================================================


def _selection_vertex(g: Graph) -> str:
    if not g.selection:
        raise NoSelectionVertex("graph has no selection vertex")
    if len(g.selection) > 1:
        raise NoSelectionVertex("graph has more than one selection vertex")
    (s,) = g.selection
    return s


def s_backdoor_admissible(
    g_s: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> bool:
    """Selection backdoor check; measurement availability is left to the catalogue.

    With z split into non-descendants z⁺ and descendants z⁻ of x:
    (i) z⁺ blocks the backdoor paths from x to y, (ii) (z⁻ ⫫ y | x, z⁺),
    (iii) (y ⫫ S | x, z).
    """
    s = _selection_vertex(g_s)
    xs, ys, zs = _sets(g_s, x, y, z)
    post = zs & descendants(g_s, xs)
    pre = zs - post
    if not d_separated(mutilate(g_s, cut_outgoing=xs), xs, ys, pre):
        return False
    if post and not d_separated(g_s, post, ys, xs | pre):
        return False
    return d_separated(g_s, ys, {s}, xs | zs)


def s_backdoor_estimand(
    g_s: Graph, x: Iterable[str], y: Iterable[str], z: Iterable[str]
) -> Estimand:
    """Σ_z P(y|x,z,S=1) P(z), with P(z) taken from unbiased data.

    Raises:
        NotAdmissible: if z fails the selection backdoor criterion
    """
    xs, ys, zs = _sets(g_s, x, y, z)
    if not s_backdoor_admissible(g_s, xs, ys, zs):
        raise NotAdmissible(f"{sorted(zs)} is not s-backdoor admissible")
    zv = _symbols(zs)
    head = ProbTerm(frozenset(_symbols(ys)), frozenset(_symbols(xs) + zv), selected=True)
    if not zv:
        return canonicalize(head)
    return canonicalize(summation(zv, product(head, ProbTerm(frozenset(zv)))))


# =============================================================================
# Transportability
# =============================================================================


def s_admissible(
    d: Graph, x: Iterable[str], y: Iterable[str], t: Iterable[str], domain: str | None = None
) -> bool:
    """Discrepancy vertices ⫫ y given t ∪ x once x is cut from above.

    With `domain` only the discrepancy vertices of that source are tested and
    the others are dropped.
    """
    if not d.discrepancy:
        raise NoDiscrepancyVertex("diagram has no discrepancy vertex")
    xs, ys, ts = _sets(d, x, y, t)
    marks = d.discrepancy_for(domain) if domain is not None else d.discrepancy
    base = d.without(d.discrepancy - marks)
    return d_separated(mutilate(base, cut_incoming=xs), marks, ys, ts | xs)


def transport_estimand(
    d: Graph,
    x: Iterable[str],
    y: Iterable[str],
    t: Iterable[str],
    source: str = DEFAULT_SOURCE,
) -> Estimand:
    """Σ_t P(y|do(x),t) P*(t) for a pretreatment s-admissible t.

    Raises:
        NotAdmissible: if t is not s-admissible or holds a descendant of x
    """
    xs, ys, ts = _sets(d, x, y, t)
    if ts & descendants(d, xs):
        raise NotAdmissible("post-treatment covariates need the derivation engine")
    if not s_admissible(d, xs, ys, ts, source):
        raise NotAdmissible(f"{sorted(ts)} is not s-admissible")
    tv = _symbols(ts)
    head = ProbTerm(frozenset(_symbols(ys)), frozenset(tv), frozenset(_symbols(xs)), domain=source)
    if not tv:
        return canonicalize(head)
    return canonicalize(summation(tv, product(head, ProbTerm(frozenset(tv)))))


# =============================================================================
# Derivation scripts
# =============================================================================


class _Script:
    """Applies moves one at a time, locating focus terms by predicate."""

    def __init__(self, g: Graph, start: Estimand):
        self.g = g
        self.current = canonicalize(start)
        self.steps: list[RewriteStep] = []

    def locate(self, match: Callable[[ProbTerm], bool]) -> tuple[int, ...]:
        for path, t in walk_terms(self.current):
            if match(t):
                return path
        raise NotAdmissible(f"no term to rewrite in {self.current}")

    def apply(self, rule: RuleName, match: Callable[[ProbTerm], bool], **args: object) -> None:
        move = Move.make(rule, self.locate(match), **args)
        try:
            step = apply_move(self.g, self.current, move)
        except InapplicableStep as err:
            raise NotAdmissible(str(err)) from err
        if step.premise is not None and not step.premise.holds(self.g):
            raise NotAdmissible(f"{rule.value} premise fails: {step.premise}")
        self.steps.append(step)
        self.current = step.after


def _outcomes(names: VertexSet) -> Callable[[ProbTerm], bool]:
    return lambda t: frozenset(v.vertex for v in t.outcomes) == names


def _query(x: VertexSet, y: VertexSet, context: VertexSet = frozenset()) -> ProbTerm:
    return ProbTerm(frozenset(_symbols(y)), frozenset(), frozenset(_symbols(x | context)))


def backdoor_steps(
    g: Graph, x: VertexSet, y: VertexSet, z: VertexSet, context: VertexSet = frozenset()
) -> list[RewriteStep]:
    """Condition on z, demote do(x) in the outcome term, delete it from P(z|·).

    `context` holds extra actions carried by every term (surrogate experiments).
    """
    script = _Script(g, _query(x, y, context))
    xv = _symbols(x)
    if z:
        script.apply(RuleName.CONDITION, _outcomes(y), vars=_symbols(z))
    script.apply(RuleName.RULE2, _outcomes(y), action="demote", vars=xv)
    if z:
        script.apply(RuleName.RULE3, _outcomes(z), action="delete", vars=xv)
    return script.steps


def frontdoor_steps(
    g: Graph,
    x: VertexSet,
    y: VertexSet,
    z: VertexSet,
    w: VertexSet,
    context: VertexSet = frozenset(),
) -> list[RewriteStep]:
    """Frontdoor derivation: two backdoor adjustments chained through the mediators."""
    script = _Script(g, _query(x, y, context))
    xv, zv = _symbols(x), _symbols(z)
    script.apply(RuleName.CONDITION, _outcomes(y), vars=_symbols(z | w))
    if w:
        script.apply(RuleName.CHAIN_SPLIT, _outcomes(z | w), action="split", vars=zv)
        script.apply(RuleName.RULE3, _outcomes(w), action="delete", vars=xv)
    script.apply(RuleName.RULE2, _outcomes(z), action="demote", vars=xv)
    script.apply(RuleName.RULE2, _outcomes(y), action="promote", vars=zv)
    script.apply(RuleName.RULE3, _outcomes(y), action="delete", vars=xv)
    script.apply(RuleName.CONDITION, _outcomes(y), vars=_symbols(x, prime=1))
    script.apply(RuleName.RULE2, _outcomes(y), action="demote", vars=zv)
    script.apply(RuleName.RULE3, _outcomes(x), action="delete", vars=zv)
    return script.steps


def s_backdoor_steps(g_s: Graph, x: VertexSet, y: VertexSet, z: VertexSet) -> list[RewriteStep]:
    """Backdoor adjustment followed by attaching S=1 to the outcome term."""
    steps = backdoor_steps(g_s, x, y, z)
    script = _Script(g_s, steps[-1].after)
    script.apply(RuleName.SELECTION_ATTACH, _outcomes(y), action="attach")
    return steps + script.steps


def transport_steps(
    d: Graph, x: VertexSet, y: VertexSet, t: VertexSet, source: str = DEFAULT_SOURCE
) -> list[RewriteStep]:
    """Condition on t, move the outcome term to the source, drop do(x) from P*(t|·)."""
    script = _Script(d, _query(x, y))
    xv = _symbols(x)
    if t:
        script.apply(RuleName.CONDITION, _outcomes(y), vars=_symbols(t))
    script.apply(RuleName.DOMAIN_EXCHANGE, _outcomes(y), domain=source)
    if t:
        script.apply(RuleName.RULE3, _outcomes(t), action="delete", vars=xv)
    return script.steps


def surrogate_steps(g: Graph, x: VertexSet, y: VertexSet, z: VertexSet) -> list[RewriteStep]:
    """Insert do(z) into the query term."""
    script = _Script(g, _query(x, y))
    script.apply(RuleName.RULE3, _outcomes(y), action="insert", vars=_symbols(z))
    return script.steps


def shortcut_steps(
    g: Graph, x: VertexSet, y: VertexSet, context: VertexSet = frozenset()
) -> tuple[str, list[RewriteStep]] | None:
    """Backdoor then frontdoor, in G with the context actions cut from above."""
    arena = mutilate(g, cut_incoming=context) if context else g
    z = first_minimal_backdoor_set(arena, x, y, exclude=context | g.selection)
    if z is not None:
        try:
            return "backdoor", backdoor_steps(g, x, y, z, context)
        except NotAdmissible as err:
            logger.debug("Backdoor script failed: %s", err)
    found = find_frontdoor(arena, x, y, exclude=context | g.selection)
    if found is not None:
        mediators, w = found
        try:
            return "frontdoor", frontdoor_steps(g, x, y, mediators, w, context)
        except NotAdmissible as err:
            logger.debug("Frontdoor script failed: %s", err)
    return None


def _surrogate_subsets(z_exp: VertexSet) -> Iterator[VertexSet]:
    for s in subsets(z_exp, len(z_exp)):
        if s:
            yield s


def zid_sufficient(
    g: Graph,
    x: Iterable[str],
    y: Iterable[str],
    z_exp: Iterable[str],
) -> Derivation | None:
    """Identification with surrogate experiments on subsets of z_exp.

    Succeeds when the query is identifiable without experiments, or when for
    some Z' ⊆ z_exp, x intercepts every directed path from Z' to y and the query
    is identifiable once Z' is cut from above. The shortcuts are tried before
    the search engine. None means the criterion is silent.
    """
    from .engine import Derivation, derive_with_catalog, observational, surrogate_catalog

    xs, ys, zs = _sets(g, x, y, z_exp)
    query = _query(xs, ys)

    found = shortcut_steps(g, xs, ys)
    if found is not None:
        return Derivation.from_steps(g, query, found[1], path=found[0])

    candidates = [
        s for s in _surrogate_subsets(zs) if not descendants(g.without(xs), s) & ys
    ]
    for zp in candidates:
        try:
            head = surrogate_steps(g, xs, ys, zp)
        except NotAdmissible:
            continue
        found = shortcut_steps(g, xs, ys, context=zp)
        if found is not None:
            label, steps = found
            return Derivation.from_steps(g, query, head + steps, path=f"zid-{label}")

    result = derive_with_catalog(g, query, observational())
    if result.derivation is not None:
        return result.derivation
    result = derive_with_catalog(g, query, surrogate_catalog(zs))
    return result.derivation


__all__ = [
    "AdjustmentReport",
    "Criterion",
    "CriterionError",
    "NoDiscrepancyVertex",
    "NoSelectionVertex",
    "NotAdmissible",
    "backdoor_admissible",
    "backdoor_estimand",
    "backdoor_steps",
    "enumerate_backdoor_sets",
    "find_frontdoor",
    "first_minimal_backdoor_set",
    "frontdoor_admissible",
    "frontdoor_candidates",
    "frontdoor_estimand",
    "frontdoor_steps",
    "pretreatment",
    "s_admissible",
    "s_backdoor_admissible",
    "s_backdoor_estimand",
    "s_backdoor_steps",
    "shortcut_steps",
    "surrogate_steps",
    "transport_estimand",
    "transport_steps",
    "zid_sufficient",
]
