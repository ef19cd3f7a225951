"""Derivation engine.

Best-first search from a query toward an expression whose every term is
estimable from the source catalogue. Identification, z-identification,
recovery from selection bias and transportability are all the same search run
against different catalogues; the façades try graphical shortcuts first.
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from queue import PriorityQueue
from typing import Any

from .config import get_config
from .criteria import (
    NotAdmissible,
    s_admissible,
    s_backdoor_admissible,
    s_backdoor_steps,
    shortcut_steps,
    transport_steps,
    zid_sufficient,
)
from .estimand import (
    DEFAULT_SOURCE,
    TARGET,
    Estimand,
    InvalidQuery,
    ProbTerm,
    Query,
    Source,
    SourceCatalog,
    canonicalize,
    estimable,
    render,
    size,
    unestimable_count,
    walk_terms,
)
from .grammar import parse_estimand, parse_term
from .graph import Graph, descendants
from .rules import (
    PREMISED,
    InapplicableStep,
    Move,
    Premise,
    RewriteContext,
    RewriteStep,
    RuleName,
    apply_move,
    successors,
)
from .separation import d_separated, subsets

logger = logging.getLogger(__name__)


class DeriveStatus(str, Enum):
    DERIVED = "Derived"
    NOT_DERIVED = "NotDerivedWithinBudget"
    PROVABLY_NOT = "ProvablyNot"


@dataclass(frozen=True)
class SearchBudget:
    """Limits on the derivation search."""

    max_steps: int = 12
    max_term_width: int = 8
    max_states: int = 200_000
    max_condition_size: int = 3
    neighbourhood: int = 2

    def __post_init__(self) -> None:
        for name in ("max_steps", "max_term_width", "max_states", "max_condition_size", "neighbourhood"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_config(cls, **overrides: int | None) -> SearchBudget:
        search = get_config().search
        values = {
            "max_steps": search.max_steps,
            "max_term_width": search.max_term_width,
            "max_states": search.max_states,
            "max_condition_size": search.max_condition_size,
            "neighbourhood": search.neighbourhood,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class Derivation:
    """A query, the steps applied to it and the resulting estimand."""

    query: Query
    steps: list[RewriteStep]
    final: Estimand
    path: str = "search"

    @property
    def initial(self) -> Estimand:
        return canonicalize(self.query.term)

    @classmethod
    def from_steps(
        cls, g: Graph, term: ProbTerm, steps: list[RewriteStep], path: str = "search"
    ) -> Derivation:
        query = Query(term, g)
        final = steps[-1].after if steps else canonicalize(term)
        return cls(query, list(steps), final, path)


@dataclass
class DeriveResult:
    """Outcome of a derivation attempt."""

    status: DeriveStatus
    derivation: Derivation | None = None
    reason: str | None = None
    path: str | None = None
    states_explored: int = 0
    elapsed: float = 0.0

    @property
    def success(self) -> bool:
        return self.status is DeriveStatus.DERIVED

    @property
    def estimand(self) -> Estimand | None:
        return self.derivation.final if self.derivation else None


# =============================================================================
# Catalogues
# =============================================================================


def observational(domain: str = TARGET) -> SourceCatalog:
    return SourceCatalog.of(Source(domain=domain))


def surrogate_catalog(z: Iterable[str]) -> SourceCatalog:
    """Observational data plus experiments on z (every subset of z)."""
    zs = frozenset(z)
    if not zs:
        return observational()
    return SourceCatalog.of(Source(), Source(intervened=zs))


def selection_catalog(unbiased: Iterable[Iterable[str]] = ()) -> SourceCatalog:
    """Selected observational data plus optional unbiased marginals."""
    sources = [Source(selected=True)]
    sources.extend(Source(measured=frozenset(m)) for m in unbiased)
    return SourceCatalog(tuple(sources))


def with_target_observational(cat: SourceCatalog) -> SourceCatalog:
    """Transport mode always has the target domain's observational distribution."""
    return cat.adding(Source(domain=TARGET))


# =============================================================================
# Search
# =============================================================================


@dataclass(order=True)
class _Frontier:
    priority: tuple[int, int, str]
    depth: int = field(compare=False)
    expr: Estimand = field(compare=False)


def _priority(e: Estimand, cat: SourceCatalog) -> tuple[int, int, str]:
    return (unestimable_count(e, cat), size(e), render(e, "text"))


def _provably_not(q: Query, cat: SourceCatalog) -> str | None:
    """Recovery of a do-free query from selected data alone fails iff Y and S are connected given T."""
    g = q.graph
    if q.x or not g.selection:
        return None
    # Unbiased data, even on part of the variables, may still help
    if any(not s.selected and s.domain == TARGET for s in cat.sources):
        return None
    base = g.without(g.discrepancy)
    if d_separated(base, q.y, g.selection, q.given):
        return None
    return (
        f"{','.join(sorted(q.y))} is not separated from the selection vertex "
        f"given {{{','.join(sorted(q.given))}}}"
    )


def derive(
    q: Query,
    cat: SourceCatalog,
    budget: SearchBudget | None = None,
) -> DeriveResult:
    """Search for an estimable rewrite of the query.

    Raises:
        InvalidQuery: if the catalogue names vertices outside the query's graph
    """
    budget = budget or SearchBudget.from_config()
    g = q.graph
    try:
        cat.check(g)
    except Exception as e:
        raise InvalidQuery(str(e)) from e

    start_time = time.time()
    reason = _provably_not(q, cat)
    if reason is not None:
        logger.info("Query %s is provably not recoverable: %s", render(q.term), reason)
        return DeriveResult(DeriveStatus.PROVABLY_NOT, reason=reason, path="selection-iff")

    ctx = RewriteContext(
        graph=g,
        catalog=cat,
        query_do=q.x,
        max_term_width=budget.max_term_width,
        max_condition_size=budget.max_condition_size,
        neighbourhood=budget.neighbourhood,
    )
    start = canonicalize(q.term)
    start_key = render(start, "text")
    parents: dict[str, tuple[str, RewriteStep] | None] = {start_key: None}
    frontier: PriorityQueue[_Frontier] = PriorityQueue()
    frontier.put(_Frontier(_priority(start, cat), 0, start))
    logger.info("Search started for %s (max_states=%d)", start_key, budget.max_states)

    expanded = 0
    while not frontier.empty():
        item = frontier.get()
        key = item.priority[2]
        if estimable(item.expr, cat):
            steps, final = _randomize_conditions(g, _trace(parents, key), item.expr, cat)
            elapsed = time.time() - start_time
            logger.info(
                "Search finished (states=%d, steps=%d, time=%.2fs)",
                len(parents),
                len(steps),
                elapsed,
            )
            return DeriveResult(
                DeriveStatus.DERIVED,
                Derivation(q, steps, final),
                path="search",
                states_explored=len(parents),
                elapsed=elapsed,
            )
        if item.depth >= budget.max_steps:
            continue
        expanded += 1
        logger.debug("Expanding %s (depth=%d, priority=%s)", key, item.depth, item.priority[:2])
        for step in successors(ctx, item.expr):
            after_key = render(step.after, "text")
            if after_key in parents:
                continue
            parents[after_key] = (key, step)
            frontier.put(_Frontier(_priority(step.after, cat), item.depth + 1, step.after))
            if len(parents) >= budget.max_states:
                break
        if len(parents) >= budget.max_states:
            logger.info("Search stopped at the state budget (%d)", budget.max_states)
            break

    elapsed = time.time() - start_time
    logger.info("Search exhausted (states=%d, expanded=%d, time=%.2fs)", len(parents), expanded, elapsed)
    return DeriveResult(
        DeriveStatus.NOT_DERIVED,
        reason=f"no estimable expression within {budget.max_steps} steps and {len(parents)} states",
        path="search",
        states_explored=len(parents),
        elapsed=elapsed,
    )


def _trace(parents: dict[str, tuple[str, RewriteStep] | None], key: str) -> list[RewriteStep]:
    steps: list[RewriteStep] = []
    link = parents[key]
    while link is not None:
        prev, step = link
        steps.append(step)
        link = parents[prev]
    steps.reverse()
    return steps


def _randomize_conditions(
    g: Graph, steps: list[RewriteStep], e: Estimand, cat: SourceCatalog
) -> tuple[list[RewriteStep], Estimand]:
    """Promote observed vertices that a term's source randomized to actions.

    Applies Rule 2 wherever it is licensed and the term stays estimable, so a
    factor read off an experiment names every action that experiment took.
    """
    steps = list(steps)
    promoted = True
    while promoted:
        promoted = False
        for path, t in walk_terms(e):
            randomized = cat.intervened(t.domain)
            for v in sorted(t.conditions):
                if v.vertex not in randomized:
                    continue
                move = Move.make(RuleName.RULE2, path, action="promote", vars=[v])
                try:
                    step = apply_move(g, e, move)
                except InapplicableStep:
                    continue
                if step.premise is None or not step.premise.holds(g) or not estimable(step.after, cat):
                    continue
                logger.debug("Promoting %s to an action in %s", v, render(t))
                steps.append(step)
                e = step.after
                promoted = True
                break
            if promoted:
                break
    return steps, e


def derive_with_catalog(
    g: Graph, term: ProbTerm, cat: SourceCatalog, budget: SearchBudget | None = None
) -> DeriveResult:
    return derive(Query(term, g), cat, budget)


# =============================================================================
# Verification
# =============================================================================


@dataclass
class VerifyReport:
    ok: bool
    failed_step: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify(d: Derivation, g: Graph) -> VerifyReport:
    """Replay every step and recheck every premise against `g`."""
    current = canonicalize(d.query.term)
    for i, step in enumerate(d.steps):
        if render(step.before) != render(current):
            return VerifyReport(False, i, "step does not start from the previous result")
        try:
            replayed = apply_move(g, current, step.move)
        except InapplicableStep as e:
            return VerifyReport(False, i, f"cannot replay: {e}")
        if render(replayed.after) != render(step.after):
            return VerifyReport(False, i, "replay gives a different expression")
        if step.rule in PREMISED:
            if step.premise is None or replayed.premise is None:
                return VerifyReport(False, i, "premise missing")
            if step.premise != replayed.premise:
                return VerifyReport(
                    False, i, f"stored premise {step.premise} differs from {replayed.premise}"
                )
            if not replayed.premise.holds(g):
                return VerifyReport(False, i, f"premise fails: {replayed.premise}")
        elif step.premise is not None:
            return VerifyReport(False, i, "probability-axiom steps carry no premise")
        current = replayed.after
    if render(current) != render(canonicalize(d.final)):
        return VerifyReport(False, len(d.steps), "replay does not reach the final estimand")
    return VerifyReport(True)


# =============================================================================
# Façades
# =============================================================================


def _finish(result: DeriveResult, start_time: float) -> DeriveResult:
    result.elapsed = time.time() - start_time
    return result


def _shortcut(
    q: Query, steps: list[RewriteStep], path: str, cat: SourceCatalog, start_time: float
) -> DeriveResult | None:
    d = Derivation(q, steps, steps[-1].after if steps else canonicalize(q.term), path)
    if not estimable(d.final, cat):
        return None
    logger.info("Shortcut %s succeeded", path)
    return _finish(DeriveResult(DeriveStatus.DERIVED, d, path=path), start_time)


def identify(
    q: Query, cat: SourceCatalog | None = None, budget: SearchBudget | None = None
) -> DeriveResult:
    """Identification from observational data, optionally with surrogate experiments."""
    start_time = time.time()
    cat = cat or observational()
    g = q.graph
    if not q.given and q.x:
        found = shortcut_steps(g, q.x, q.y)
        if found is not None:
            result = _shortcut(q, found[1], found[0], cat, start_time)
            if result is not None:
                return result
        z_exp = cat.intervened(TARGET) - q.x - q.y
        if z_exp:
            d = zid_sufficient(g, q.x, q.y, z_exp)
            if d is not None and estimable(d.final, cat):
                d.query = q
                return _finish(DeriveResult(DeriveStatus.DERIVED, d, path=d.path), start_time)
    return derive(q, cat, budget)


def recover(
    q: Query, cat: SourceCatalog | None = None, budget: SearchBudget | None = None
) -> DeriveResult:
    """Recovery from selection-biased data (plus any unbiased marginals)."""
    start_time = time.time()
    cat = cat or selection_catalog()
    g = q.graph
    if g.selection and q.x and not q.given and len(g.selection) == 1:
        pool = sorted(g.endogenous - q.x - q.y)
        for z in subsets(pool, len(pool)):
            try:
                if not s_backdoor_admissible(g, q.x, q.y, z):
                    continue
                steps = s_backdoor_steps(g, q.x, q.y, z)
            except NotAdmissible:
                continue
            result = _shortcut(q, steps, "s-backdoor", cat, start_time)
            if result is not None:
                return result
    return derive(q, cat, budget)


def transport(
    q: Query, cat: SourceCatalog, budget: SearchBudget | None = None
) -> DeriveResult:
    """Transport from source domains to the target (z- and μ-transport included)."""
    start_time = time.time()
    cat = with_target_observational(cat)
    g = q.graph
    sources = sorted(cat.domains - {TARGET})
    if g.discrepancy and q.x and not q.given and len(sources) == 1:
        (source,) = sources
        experimental = cat.intervened(source)
        if q.x <= experimental:
            pool = sorted(g.endogenous - q.x - q.y - descendants(g, q.x))
            for t in subsets(pool, len(pool)):
                try:
                    if not s_admissible(g, q.x, q.y, t, source):
                        continue
                    steps = transport_steps(g, q.x, q.y, t, source)
                except NotAdmissible:
                    continue
                result = _shortcut(q, steps, "s-admissible", cat, start_time)
                if result is not None:
                    return result
    return derive(q, cat, budget)


def query_from_text(text: str, g: Graph) -> Query:
    """Parse a query term such as 'P(Y|do(X))'."""
    return Query(parse_term(text), g)


# =============================================================================
# Serialization
# =============================================================================


def step_to_json(step: RewriteStep) -> dict[str, Any]:
    return {
        "rule": step.rule.value,
        "focus": list(step.focus),
        "args": step.move.args_json(),
        "premise": step.premise.to_json() if step.premise is not None else None,
        "before": render(step.before),
        "after": render(step.after),
    }


def step_from_json(data: dict[str, Any]) -> RewriteStep:
    try:
        move = Move.make(RuleName(data["rule"]), data["focus"], **data.get("args", {}))
        premise = Premise.from_json(data["premise"]) if data.get("premise") else None
        return RewriteStep(
            move, premise, parse_estimand(data["before"]), parse_estimand(data["after"])
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DerivationFormatError(f"malformed step: {e}") from e


class DerivationFormatError(Exception):
    """A derivation file that cannot be read."""

    pass


def derivation_to_json(d: Derivation) -> dict[str, Any]:
    return {
        "query": render(d.query.term),
        "path": d.path,
        "steps": [step_to_json(s) for s in d.steps],
        "final": render(d.final),
    }


def derivation_from_json(data: dict[str, Any], g: Graph) -> Derivation:
    try:
        query = Query(parse_term(data["query"]), g)
        steps = [step_from_json(s) for s in data["steps"]]
        final = parse_estimand(data["final"])
    except KeyError as e:
        raise DerivationFormatError(f"missing field {e}") from e
    return Derivation(query, steps, final, data.get("path", "search"))


def save_derivation(d: Derivation, path: Path) -> Path:
    with open(path, "w") as f:
        json.dump(derivation_to_json(d), f, indent=2, ensure_ascii=False)
    logger.debug("Derivation saved to %s", path)
    return path


def load_derivation(path: Path, g: Graph) -> Derivation:
    if not path.exists():
        raise DerivationFormatError(f"Derivation file not found: {path}")
    with open(path) as f:
        data = json.load(f)
    return derivation_from_json(data, g)


__all__ = [
    "DEFAULT_SOURCE",
    "Derivation",
    "DerivationFormatError",
    "DeriveResult",
    "DeriveStatus",
    "InvalidQuery",
    "SearchBudget",
    "VerifyReport",
    "derivation_from_json",
    "derivation_to_json",
    "derive",
    "derive_with_catalog",
    "identify",
    "load_derivation",
    "observational",
    "query_from_text",
    "recover",
    "save_derivation",
    "selection_catalog",
    "surrogate_catalog",
    "transport",
    "verify",
    "with_target_observational",
]
