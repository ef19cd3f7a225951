"""Causal diagrams, selection diagrams and their mutilations.

A graph is an immutable value: directed edges, bidirected edges (latent common
causes) and three kinds of vertex. Selection vertices only receive arrows;
discrepancy vertices only emit them and mark where a source domain departs
from the target.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import networkx as nx

logger = logging.getLogger(__name__)

VertexSet = frozenset[str]


class VertexKind(Enum):
    """Role of a vertex in a diagram."""

    ENDOGENOUS = "endogenous"
    SELECTION = "selection"
    DISCREPANCY = "discrepancy"


@dataclass(frozen=True, order=True)
class Vertex:
    """A named vertex.

    `domains` only matters for discrepancy vertices: the source domains the
    vertex applies to (empty means every source).
    """

    name: str
    kind: VertexKind = VertexKind.ENDOGENOUS
    domains: frozenset[str] = frozenset()

    def applies_to(self, domain: str) -> bool:
        return not self.domains or domain in self.domains


class GraphError(Exception):
    """Error in graph handling."""

    pass


class UnknownVertex(GraphError):
    """A vertex name that the graph does not declare."""

    def __init__(self, names: Iterable[str]):
        self.names = sorted(names)
        super().__init__(f"Unknown vertex: {', '.join(self.names)}")


class ViolationKind(Enum):
    """Kinds of graph invariant violations."""

    CYCLE_DETECTED = "CycleDetected"
    BAD_SELECTION_VERTEX = "BadSelectionVertex"
    BAD_DISCREPANCY_VERTEX = "BadDiscrepancyVertex"
    UNKNOWN_ENDPOINT = "UnknownEndpoint"
    SELF_LOOP = "SelfLoop"
    DUPLICATE_EDGE = "DuplicateEdge"
    DUPLICATE_VERTEX = "DuplicateVertex"


@dataclass(frozen=True)
class Violation:
    """One broken invariant, located at the vertices or edge involved."""

    kind: ViolationKind
    location: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{self.kind.value}({','.join(self.location)}): {self.message}"


class GraphValidationError(GraphError):
    """Raised by validate with every violation found."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _undirected(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Graph:
    """Directed acyclic mixed graph.

    Bidirected edges are stored as sorted pairs. Use `validate` to build a graph
    from untrusted input; the constructor trusts its arguments.
    """

    vertices: frozenset[Vertex]
    directed: frozenset[tuple[str, str]] = frozenset()
    bidirected: frozenset[tuple[str, str]] = frozenset()

    @classmethod
    def build(
        cls,
        vertices: Iterable[str | Vertex],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str]] = (),
    ) -> Graph:
        """Build a graph, accepting bare names for endogenous vertices."""
        vs = frozenset(v if isinstance(v, Vertex) else Vertex(v) for v in vertices)
        return cls(
            vertices=vs,
            directed=frozenset(directed),
            bidirected=frozenset(_undirected(a, b) for a, b in bidirected),
        )

    # ------------------------------------------------------------------
    # Lookup
    # ------------------------------------------------------------------

    @cached_property
    def _by_name(self) -> dict[str, Vertex]:
        return {v.name: v for v in self.vertices}

    @cached_property
    def names(self) -> VertexSet:
        return frozenset(self._by_name)

    def vertex(self, name: str) -> Vertex:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVertex([name]) from None

    def kind(self, name: str) -> VertexKind:
        return self.vertex(name).kind

    def of_kind(self, kind: VertexKind) -> VertexSet:
        return frozenset(v.name for v in self.vertices if v.kind is kind)

    @cached_property
    def endogenous(self) -> VertexSet:
        return self.of_kind(VertexKind.ENDOGENOUS)

    @cached_property
    def selection(self) -> VertexSet:
        return self.of_kind(VertexKind.SELECTION)

    @cached_property
    def discrepancy(self) -> VertexSet:
        return self.of_kind(VertexKind.DISCREPANCY)

    def discrepancy_for(self, domain: str) -> VertexSet:
        """Discrepancy vertices marking where `domain` differs from the target."""
        return frozenset(
            v.name
            for v in self.vertices
            if v.kind is VertexKind.DISCREPANCY and v.applies_to(domain)
        )

    def check(self, names: Iterable[str]) -> VertexSet:
        """Return `names` as a VertexSet, raising UnknownVertex for strangers."""
        s = frozenset(names)
        unknown = s - self.names
        if unknown:
            raise UnknownVertex(unknown)
        return s

    # ------------------------------------------------------------------
    # Adjacency
    # ------------------------------------------------------------------

    @cached_property
    def digraph(self) -> nx.DiGraph:
        """Directed part as a networkx graph (do not mutate)."""
        g = nx.DiGraph()
        g.add_nodes_from(sorted(self.names))
        g.add_edges_from(sorted(self.directed))
        return g

    @cached_property
    def _spouses(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.names}
        for a, b in self.bidirected:
            out[a].add(b)
            out[b].add(a)
        return {n: frozenset(s) for n, s in out.items()}

    def parents(self, name: str) -> VertexSet:
        return frozenset(self.digraph.predecessors(name))

    def children(self, name: str) -> VertexSet:
        return frozenset(self.digraph.successors(name))

    def spouses(self, name: str) -> VertexSet:
        return self._spouses[name]

    @cached_property
    def skeleton(self) -> nx.Graph:
        """Undirected skeleton including bidirected edges."""
        g = nx.Graph()
        g.add_nodes_from(self.names)
        g.add_edges_from(self.directed)
        g.add_edges_from(self.bidirected)
        return g

    def neighbourhood(self, names: Iterable[str], radius: int) -> VertexSet:
        """Vertices within `radius` skeleton hops of any of `names`."""
        found: set[str] = set()
        for n in names:
            found.update(nx.single_source_shortest_path_length(self.skeleton, n, cutoff=radius))
        return frozenset(found)

    # ------------------------------------------------------------------
    # Derived graphs
    # ------------------------------------------------------------------

    def without(self, names: Iterable[str]) -> Graph:
        """Subgraph with `names` and their edges removed."""
        drop = frozenset(names)
        if not drop:
            return self
        return Graph(
            vertices=frozenset(v for v in self.vertices if v.name not in drop),
            directed=frozenset(e for e in self.directed if e[0] not in drop and e[1] not in drop),
            bidirected=frozenset(
                e for e in self.bidirected if e[0] not in drop and e[1] not in drop
            ),
        )

    def reverse(self) -> Graph:
        """Graph with every directed edge reversed."""
        return Graph(
            vertices=self.vertices,
            directed=frozenset((b, a) for a, b in self.directed),
            bidirected=self.bidirected,
        )

    def __str__(self) -> str:
        return format_graph(self)


def validate(
    vertices: Iterable[Vertex],
    directed: Iterable[tuple[str, str]] = (),
    bidirected: Iterable[tuple[str, str]] = (),
) -> Graph:
    """Check raw graph data against every invariant and build the Graph.

    Raises:
        GraphValidationError: listing every violation found
    """
    vertex_list = list(vertices)
    directed_list = list(directed)
    bidirected_list = list(bidirected)
    violations = find_violations(vertex_list, directed_list, bidirected_list)
    if violations:
        logger.debug("Graph rejected with %d violation(s)", len(violations))
        raise GraphValidationError(violations)
    return Graph.build(vertex_list, directed_list, bidirected_list)


def find_violations(
    vertices: list[Vertex],
    directed: list[tuple[str, str]],
    bidirected: list[tuple[str, str]],
) -> list[Violation]:
    """Return all invariant violations of raw graph data, in a stable order."""
    violations: list[Violation] = []
    kinds: dict[str, VertexKind] = {}
    for v in vertices:
        if v.name in kinds:
            violations.append(
                Violation(ViolationKind.DUPLICATE_VERTEX, (v.name,), "declared twice")
            )
        kinds[v.name] = v.kind

    seen_directed: set[tuple[str, str]] = set()
    for a, b in directed:
        loc = (a, b)
        unknown = [n for n in (a, b) if n not in kinds]
        if unknown:
            violations.append(
                Violation(ViolationKind.UNKNOWN_ENDPOINT, loc, f"undeclared {', '.join(unknown)}")
            )
            continue
        if a == b:
            violations.append(Violation(ViolationKind.SELF_LOOP, loc, "self-loop"))
            continue
        if (a, b) in seen_directed:
            violations.append(Violation(ViolationKind.DUPLICATE_EDGE, loc, f"{a} -> {b} repeated"))
        seen_directed.add((a, b))
        if kinds[a] is VertexKind.SELECTION:
            violations.append(
                Violation(ViolationKind.BAD_SELECTION_VERTEX, (a,), f"emits {a} -> {b}")
            )
        if kinds[b] is VertexKind.DISCREPANCY:
            violations.append(
                Violation(ViolationKind.BAD_DISCREPANCY_VERTEX, (b,), f"receives {a} -> {b}")
            )

    seen_bidirected: set[tuple[str, str]] = set()
    for a, b in bidirected:
        loc = (a, b)
        unknown = [n for n in (a, b) if n not in kinds]
        if unknown:
            violations.append(
                Violation(ViolationKind.UNKNOWN_ENDPOINT, loc, f"undeclared {', '.join(unknown)}")
            )
            continue
        if a == b:
            violations.append(Violation(ViolationKind.SELF_LOOP, loc, "self-loop"))
            continue
        key = _undirected(a, b)
        if key in seen_bidirected:
            violations.append(
                Violation(ViolationKind.DUPLICATE_EDGE, loc, f"{a} <-> {b} repeated")
            )
        seen_bidirected.add(key)
        for n in (a, b):
            # Selection vertices may share latent causes; only emitted arrows are illegal
            if kinds[n] is VertexKind.DISCREPANCY:
                violations.append(
                    Violation(ViolationKind.BAD_DISCREPANCY_VERTEX, (n,), f"on {a} <-> {b}")
                )

    g = nx.DiGraph()
    g.add_nodes_from(kinds)
    g.add_edges_from(e for e in seen_directed)
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        path = tuple([cycle[0][0], *(edge[1] for edge in cycle)])
        violations.append(
            Violation(ViolationKind.CYCLE_DETECTED, path, " -> ".join(path))
        )
    return violations


def mutilate(
    g: Graph,
    cut_incoming: Iterable[str] = frozenset(),
    cut_outgoing: Iterable[str] = frozenset(),
) -> Graph:
    """Delete arrows into `cut_incoming` and arrows out of `cut_outgoing`.

    Bidirected edges touching `cut_incoming` go too since they carry an
    arrowhead there. The input graph is unchanged.

    Raises:
        UnknownVertex: if either set names an undeclared vertex
    """
    inc = g.check(cut_incoming)
    out = g.check(cut_outgoing)
    if not inc and not out:
        return g
    return Graph(
        vertices=g.vertices,
        directed=frozenset((a, b) for a, b in g.directed if b not in inc and a not in out),
        bidirected=frozenset((a, b) for a, b in g.bidirected if a not in inc and b not in inc),
    )


def ancestors(g: Graph, s: Iterable[str]) -> VertexSet:
    """Reflexive ancestors of `s` along directed edges."""
    found = set(g.check(s))
    for n in list(found):
        found |= nx.ancestors(g.digraph, n)
    return frozenset(found)


def descendants(g: Graph, s: Iterable[str]) -> VertexSet:
    """Reflexive descendants of `s` along directed edges."""
    found = set(g.check(s))
    for n in list(found):
        found |= nx.descendants(g.digraph, n)
    return frozenset(found)


def topological_order(g: Graph) -> list[str]:
    """Topological order with lexicographic tie-breaking."""
    return list(nx.lexicographical_topological_sort(g.digraph))


def format_graph(g: Graph) -> str:
    """Render `g` in the line-oriented diagram grammar read by the CLI."""
    lines: list[str] = []
    endo = sorted(g.endogenous)
    if endo:
        lines.append("var " + " ".join(endo))
    for name in sorted(g.selection):
        lines.append(f"select {name}")
    for name in sorted(g.discrepancy):
        domains = sorted(g.vertex(name).domains)
        lines.append(" ".join(["snode", name, *domains]))
    lines.extend(f"{a} -> {b}" for a, b in sorted(g.directed))
    lines.extend(f"{a} <-> {b}" for a, b in sorted(g.bidirected))
    return "\n".join(lines) + "\n"

