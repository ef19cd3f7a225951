"""d-separation over mixed graphs and the independencies a graph implies."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import lru_cache

from .graph import Graph, VertexSet, ancestors

logger = logging.getLogger(__name__)


class OverlappingSets(ValueError):
    """The sets of a separation query are not pairwise disjoint."""

    pass


@dataclass(frozen=True)
class IndependenceStatement:
    """`left ⫫ right | given`."""

    left: VertexSet
    right: VertexSet
    given: VertexSet = frozenset()

    def __post_init__(self) -> None:
        if not self.left or not self.right:
            raise ValueError("independence statements need nonempty sides")
        _require_disjoint(self.left, self.right, self.given)

    def sort_key(self) -> tuple:
        return (sorted(self.left), sorted(self.right), len(self.given), sorted(self.given))

    def __str__(self) -> str:
        text = f"{','.join(sorted(self.left))} ⫫ {','.join(sorted(self.right))}"
        if self.given:
            text += f" | {','.join(sorted(self.given))}"
        return text


def _require_disjoint(*sets: frozenset[str]) -> None:
    for a, b in itertools.combinations(sets, 2):
        common = a & b
        if common:
            raise OverlappingSets(f"sets overlap on {', '.join(sorted(common))}")


def d_separated(
    g: Graph,
    x: Iterable[str],
    y: Iterable[str],
    z: Iterable[str] = frozenset(),
) -> bool:
    """True iff `z` blocks every path between `x` and `y` in `g`.

    Raises:
        OverlappingSets: if x, y and z are not pairwise disjoint
        UnknownVertex: if any set names an undeclared vertex
    """
    xs, ys, zs = g.check(x), g.check(y), g.check(z)
    _require_disjoint(xs, ys, zs)
    if not xs or not ys:
        return True
    return _d_separated(g, xs, ys, zs)


@lru_cache(maxsize=65536)
def _d_separated(g: Graph, x: VertexSet, y: VertexSet, z: VertexSet) -> bool:
    return not (reachable(g, x, z) & y)


def reachable(g: Graph, sources: VertexSet, z: VertexSet) -> VertexSet:
    """Vertices d-connected to `sources` given `z`.

    Ball passing in the manner of the Koller-Friedman active trail algorithm.
    A visit is (vertex, arrowhead): arrowhead is True when the ball arrived
    through an edge pointing into the vertex (a parent edge or a bidirected
    edge) and False when it came up from a child.
    """
    an_z = ancestors(g, z)
    visited: set[tuple[str, bool]] = set()
    found: set[str] = set()
    stack = [(s, False) for s in sorted(sources)]
    while stack:
        node, arrowhead = stack.pop()
        if (node, arrowhead) in visited:
            continue
        visited.add((node, arrowhead))
        if node not in z:
            found.add(node)

        # Leaving through an arrowhead at `node` makes it a collider when we
        # also arrived through one.
        if node not in z:
            for child in g.children(node):
                stack.append((child, True))
            if not arrowhead:
                for parent in g.parents(node):
                    stack.append((parent, False))
                for spouse in g.spouses(node):
                    stack.append((spouse, True))
        if arrowhead and node in an_z:
            for parent in g.parents(node):
                stack.append((parent, False))
            for spouse in g.spouses(node):
                stack.append((spouse, True))
    return frozenset(found)


def implied_independencies(g: Graph, max_given: int) -> list[IndependenceStatement]:
    """Singleton independencies over endogenous vertices with minimal separators.

    A statement is listed only when no proper subset of its conditioning set
    also separates the pair.
    """
    if max_given < 0:
        raise ValueError("max_given must be nonnegative")
    names = sorted(g.endogenous)
    out: list[IndependenceStatement] = []
    for a, b in itertools.combinations(names, 2):
        others = [n for n in names if n not in (a, b)]
        separators: list[frozenset[str]] = []
        for size in range(min(max_given, len(others)) + 1):
            for combo in itertools.combinations(others, size):
                given = frozenset(combo)
                if any(s < given for s in separators):
                    continue
                if d_separated(g, {a}, {b}, given):
                    separators.append(given)
                    out.append(IndependenceStatement(frozenset({a}), frozenset({b}), given))
    out.sort(key=IndependenceStatement.sort_key)
    logger.debug("Found %d implied independencies (max_given=%d)", len(out), max_given)
    return out


def subsets(candidates: Iterable[str], max_size: int) -> Iterator[frozenset[str]]:
    """Subsets by increasing size, lexicographic within a size."""
    pool = sorted(candidates)
    for size in range(min(max_size, len(pool)) + 1):
        for combo in itertools.combinations(pool, size):
            yield frozenset(combo)


def find_separator(
    g: Graph,
    x: Iterable[str],
    y: Iterable[str],
    candidates: Iterable[str],
    max_size: int,
) -> frozenset[str] | None:
    """Lexicographically first minimum-cardinality separating subset, or None."""
    for s in subsets(candidates, max_size):
        if d_separated(g, x, y, s):
            return s
    return None
