"""Ground-truth discrete structural causal models.

Every distribution is computed exactly: joints by contracting the mechanism
tables with the exogenous tables, counterfactuals by enumerating exogenous
configurations. Bidirected edges are realized as one shared exogenous block
per edge; each vertex also owns a private block.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import string
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Any

import numpy as np

from .config import get_config
from .estimand import (
    TARGET,
    Estimand,
    ProbTerm,
    Product,
    Quotient,
    SourceCatalog,
    Sum,
    estimable,
    render,
)
from .graph import (
    Graph,
    UnknownVertex,
    Vertex,
    VertexKind,
    mutilate,
    topological_order,
)

logger = logging.getLogger(__name__)

SeedLike = int | Sequence[int]


class OracleError(Exception):
    """Error in ground-truth computation."""

    pass


class TooLarge(OracleError):
    """Exact enumeration would exceed the configured table limit."""

    pass


class ValueOutOfDomain(OracleError):
    """A value outside a vertex's domain."""

    pass


class ZeroSelectionMass(OracleError):
    """Conditioning on S=1 where S=1 has probability zero."""

    pass


class NotEstimable(OracleError):
    """A term with no distribution to read it from."""

    pass


class ZeroDenominator(OracleError):
    """A quotient with positive numerator over a zero denominator."""

    pass


# =============================================================================
# Distributions
# =============================================================================


@dataclass(frozen=True, eq=False)
class Dist:
    """A dense table over named discrete variables.

    Conditional tables use the same type; the conditioning variables are
    simply axes whose slices each normalize.
    """

    variables: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        if len(set(self.variables)) != len(self.variables):
            raise OracleError(f"repeated variable in {self.variables}")
        if self.table.ndim != len(self.variables):
            raise OracleError(
                f"table has {self.table.ndim} axes for {len(self.variables)} variables"
            )

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.variables, self.table.shape))

    def total(self) -> float:
        return float(self.table.sum())

    def _axes(self, names: Iterable[str]) -> list[int]:
        try:
            return [self.variables.index(n) for n in names]
        except ValueError:
            missing = sorted(set(names) - set(self.variables))
            raise OracleError(f"no variable {', '.join(missing)} in {self.variables}") from None

    def reorder(self, order: Sequence[str]) -> Dist:
        if sorted(order) != sorted(self.variables):
            raise OracleError(f"cannot reorder {self.variables} as {tuple(order)}")
        return Dist(tuple(order), np.transpose(self.table, self._axes(order)))

    def marginal(self, keep: Sequence[str]) -> Dist:
        """Sum out everything but `keep`, returned in the order given."""
        self._axes(keep)
        drop = tuple(i for i, v in enumerate(self.variables) if v not in keep)
        remaining = tuple(v for v in self.variables if v in keep)
        return Dist(remaining, self.table.sum(axis=drop)).reorder(keep)

    def sum_out(self, names: Iterable[str]) -> Dist:
        gone = set(names)
        return self.marginal([v for v in self.variables if v not in gone])

    def relabel(self, mapping: Mapping[str, str]) -> Dist:
        return Dist(tuple(mapping.get(v, v) for v in self.variables), self.table)

    def fix(self, assignment: Mapping[str, int]) -> Dist:
        """Slice at the given values, dropping those axes."""
        index: list[Any] = [slice(None)] * len(self.variables)
        for name, value in assignment.items():
            (axis,) = self._axes([name])
            if not 0 <= value < self.table.shape[axis]:
                raise ValueOutOfDomain(f"{name}={value}")
            index[axis] = value
        kept = tuple(v for v in self.variables if v not in assignment)
        return Dist(kept, self.table[tuple(index)])

    def conditional(self, outcomes: Sequence[str], given: Sequence[str]) -> Dist:
        """P(outcomes | given) over outcomes + given, with 0/0 taken as 0."""
        joint = self.marginal([*outcomes, *given])
        return divide(joint, joint.marginal(list(given)))

    def __mul__(self, other: Dist) -> Dist:
        union, a, b = _aligned(self, other)
        return Dist(union, a * b)


def _aligned(a: Dist, b: Dist) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    union = a.variables + tuple(v for v in b.variables if v not in a.variables)
    sizes = a.sizes
    for v, n in b.sizes.items():
        if sizes.setdefault(v, n) != n:
            raise OracleError(f"{v} has {sizes[v]} values on one side and {n} on the other")

    def broadcast(d: Dist) -> np.ndarray:
        order = [v for v in union if v in d.variables]
        shape = [sizes[v] if v in d.variables else 1 for v in union]
        return d.reorder(order).table.reshape(shape)

    return union, broadcast(a), broadcast(b)


def divide(num: Dist, den: Dist, tolerance: float = 0.0) -> Dist:
    """Elementwise quotient; 0/0 is 0.

    Raises:
        ZeroDenominator: if a positive numerator meets a zero denominator
    """
    union, n, d = _aligned(num, den)
    n, d = np.broadcast_arrays(n, d)
    zero = d == 0
    if np.any(zero & (n > tolerance)):
        raise ZeroDenominator("positive mass over a zero-probability event")
    out = np.zeros(n.shape)
    np.divide(n, d, out=out, where=~zero)
    return Dist(union, out)


def max_abs_difference(a: Dist, b: Dist) -> float:
    """Largest entrywise gap, broadcasting over variables only one side has."""
    _union, x, y = _aligned(a, b)
    if x.size == 0 and y.size == 0:
        return 0.0
    return float(np.max(np.abs(x - y)))


UNIT = Dist((), np.array(1.0))


# =============================================================================
# Models
# =============================================================================


def _own_block(v: str) -> str:
    return f"U_{v}"


def _shared_block(a: str, b: str) -> str:
    return f"U_{a}_{b}"


@dataclass(frozen=True, eq=False)
class Scm:
    """A discrete structural causal model.

    `latents[v]` lists the exogenous blocks v's mechanism reads, own block
    first. Mechanism axes are `parents[v]` followed by `latents[v]`.
    """

    graph: Graph
    order: tuple[str, ...]
    sizes: Mapping[str, int]
    exogenous: Mapping[str, np.ndarray]
    parents: Mapping[str, tuple[str, ...]]
    latents: Mapping[str, tuple[str, ...]]
    mechanisms: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        for block, p in self.exogenous.items():
            if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-12:
                raise OracleError(f"exogenous table {block} is not a distribution")
        for v in self.order:
            mech = self.mechanisms[v]
            shape = tuple(self.sizes[p] for p in self.parents[v]) + tuple(
                len(self.exogenous[b]) for b in self.latents[v]
            )
            if mech.shape != shape:
                raise OracleError(f"mechanism of {v} has shape {mech.shape}, expected {shape}")
            if mech.size and (mech.min() < 0 or mech.max() >= self.sizes[v]):
                raise OracleError(f"mechanism of {v} leaves its domain")

    @property
    def selection(self) -> tuple[str, ...]:
        return tuple(v for v in self.order if v in self.graph.selection)

    def same_as(self, other: Scm) -> bool:
        """Bit-exact equality of every table."""
        return scm_to_json(self) == scm_to_json(other)


def _surjective_rows(rng: np.random.Generator, rows: int, width: int, size: int) -> np.ndarray:
    """Each row maps `width` exogenous values onto every one of `size` values."""
    out = np.empty((rows, width), dtype=np.int64)
    base = np.arange(size)
    for r in range(rows):
        extra = rng.integers(size, size=width - size)
        out[r] = rng.permutation(np.concatenate([base, extra]))
    return out


def _mechanism(
    rng: np.random.Generator,
    size: int,
    parent_shape: tuple[int, ...],
    latent_shape: tuple[int, ...],
) -> np.ndarray:
    own, shared = latent_shape[0], latent_shape[1:]
    rows = math.prod(parent_shape) * math.prod(shared)
    table = _surjective_rows(rng, rows, own, size)
    table = table.reshape(parent_shape + shared + (own,))
    return np.moveaxis(table, -1, len(parent_shape))


def random_scm(
    g: Graph,
    seed: SeedLike,
    domain_size: int | None = None,
    exogenous_size: int | None = None,
    sizes: Mapping[str, int] | None = None,
) -> Scm:
    """Random model compatible with `g`, deterministic in `seed`.

    Discrepancy vertices are dropped; selection vertices become binary
    variables with a mechanism over their parents.

    Mechanism rows are random surjections from the vertex's own exogenous
    values onto its domain rather than uniform draws per row, so every value
    has positive probability under every parent configuration and the
    conditionals estimands divide by are never zero.

    Raises:
        OracleError: if an exogenous block is too small to reach every value
    """
    defaults = get_config().oracle
    domain_size = domain_size or defaults.domain_size
    exogenous_size = exogenous_size or defaults.exogenous_size
    base = g.without(g.discrepancy)
    order = tuple(topological_order(base))
    vertex_sizes = {
        v: 2 if v in base.selection else (sizes or {}).get(v, domain_size) for v in order
    }
    if max(vertex_sizes.values(), default=0) > exogenous_size:
        raise OracleError("exogenous blocks must have at least as many values as any vertex")

    rng = np.random.default_rng(seed)
    exogenous: dict[str, np.ndarray] = {}
    latents: dict[str, list[str]] = {v: [_own_block(v)] for v in order}
    for v in order:
        exogenous[_own_block(v)] = rng.dirichlet(np.ones(exogenous_size))
    for a, b in sorted(base.bidirected):
        block = _shared_block(a, b)
        exogenous[block] = rng.dirichlet(np.ones(exogenous_size))
        latents[a].append(block)
        latents[b].append(block)

    parents = {v: tuple(sorted(base.parents(v))) for v in order}
    mechanisms = {
        v: _mechanism(
            rng,
            vertex_sizes[v],
            tuple(vertex_sizes[p] for p in parents[v]),
            tuple(len(exogenous[b]) for b in latents[v]),
        )
        for v in order
    }
    logger.debug("Random model over %d vertices (seed=%s)", len(order), seed)
    return Scm(
        graph=base,
        order=order,
        sizes=vertex_sizes,
        exogenous=exogenous,
        parents=parents,
        latents={v: tuple(b) for v, b in latents.items()},
        mechanisms=mechanisms,
    )


def intervene(m: Scm, assignment: Mapping[str, int]) -> Scm:
    """Replace the mechanisms of the assigned vertices by constants.

    Raises:
        UnknownVertex: for names that are not endogenous vertices of the model
        ValueOutOfDomain: for values outside a vertex's domain
    """
    unknown = [v for v in assignment if v not in m.graph.endogenous]
    if unknown:
        raise UnknownVertex(unknown)
    for v, value in assignment.items():
        if not 0 <= value < m.sizes[v]:
            raise ValueOutOfDomain(f"{v}={value} (domain size {m.sizes[v]})")
    fixed = frozenset(assignment)
    return Scm(
        graph=mutilate(m.graph, cut_incoming=fixed),
        order=m.order,
        sizes=m.sizes,
        exogenous=m.exogenous,
        parents={v: () if v in fixed else p for v, p in m.parents.items()},
        latents={v: () if v in fixed else b for v, b in m.latents.items()},
        mechanisms={
            v: np.array(assignment[v], dtype=np.int64) if v in fixed else t
            for v, t in m.mechanisms.items()
        },
    )


def domain_variant(m: Scm, targets: Iterable[str], seed: SeedLike) -> Scm:
    """Resample mechanisms and private exogenous tables at `targets` only."""
    chosen = sorted(frozenset(targets))
    unknown = [v for v in chosen if v not in m.graph.endogenous]
    if unknown:
        raise UnknownVertex(unknown)
    if not chosen:
        return m
    rng = np.random.default_rng(seed)
    exogenous = dict(m.exogenous)
    mechanisms = dict(m.mechanisms)
    for v in chosen:
        own = _own_block(v)
        exogenous[own] = rng.dirichlet(np.ones(len(m.exogenous[own])))
        mechanisms[v] = _mechanism(
            rng,
            m.sizes[v],
            tuple(m.sizes[p] for p in m.parents[v]),
            tuple(len(exogenous[b]) for b in m.latents[v]),
        )
    return Scm(m.graph, m.order, m.sizes, exogenous, m.parents, m.latents, mechanisms)


def model_family(g: Graph, m: Scm, domains: Iterable[str], seed: SeedLike) -> dict[str, Scm]:
    """Target model plus one variant per source domain.

    A source differs from the target at the children of its discrepancy
    vertices.
    """
    base = [seed] if isinstance(seed, int) else list(seed)
    family = {TARGET: m}
    for i, domain in enumerate(sorted(frozenset(domains) - {TARGET})):
        marks = g.discrepancy_for(domain)
        targets = frozenset().union(*(g.children(s) for s in marks)) if marks else frozenset()
        family[domain] = domain_variant(m, targets, [*base, i + 1])
    return family


# =============================================================================
# Exact distributions
# =============================================================================


def _check_size(n: int, what: str, limit: int | None) -> None:
    limit = limit or get_config().oracle.max_table
    if n > limit:
        raise TooLarge(f"{what} needs {n} entries (limit {limit})")


def _contract(m: Scm, drop: frozenset[str] = frozenset(), max_table: int | None = None) -> Dist:
    """Σ_u Π_v [v = f_v(pa, u)] Π_b P(u_b), leaving out the factors of `drop`."""
    _check_size(math.prod(m.sizes.values()), "joint table", max_table)
    blocks = sorted(m.exogenous)
    names = list(m.order) + blocks
    if len(names) > len(string.ascii_letters):
        raise TooLarge(f"{len(names)} variables and blocks exceed the contraction alphabet")
    letter = dict(zip(names, string.ascii_letters))

    operands: list[Any] = []
    for v in m.order:
        if v in drop:
            operands += [np.ones(m.sizes[v]), letter[v]]
            continue
        onehot = np.eye(m.sizes[v])[m.mechanisms[v]]
        axes = [*m.parents[v], *m.latents[v], v]
        operands += [onehot, "".join(letter[a] for a in axes)]
    for b in blocks:
        operands += [m.exogenous[b], letter[b]]

    inputs = ",".join(operands[1::2])
    out = "".join(letter[v] for v in m.order)
    table = np.einsum(f"{inputs}->{out}", *operands[0::2], optimize="greedy")
    logger.debug("Contracted %d factors into a table of %d entries", len(m.order), table.size)
    return Dist(m.order, table)


def joint(m: Scm, max_table: int | None = None) -> Dist:
    """Exact joint distribution over every vertex (selection vertices included).

    Raises:
        TooLarge: if the dense table exceeds the limit
    """
    return _contract(m, max_table=max_table)


def truncated_factorization(m: Scm, x: Iterable[str]) -> Dist:
    """P(v∖x | do(x)) from the product of the surviving factors."""
    xs = frozenset(x)
    unknown = xs - m.graph.endogenous
    if unknown:
        raise UnknownVertex(unknown)
    d = _contract(m, drop=xs)
    rest = [v for v in m.order if v not in xs]
    return d.reorder([*rest, *sorted(xs)])


def post_intervention_dist(m: Scm, x: Iterable[str]) -> Dist:
    """P(v∖x | do(x)) for every value combination of x, one intervention at a time.

    The returned table has the non-intervened vertices first, then x sorted.
    """
    xs = sorted(frozenset(x))
    rest = [v for v in m.order if v not in xs]
    if not xs:
        return joint(m)
    table = np.zeros(tuple(m.sizes[v] for v in rest) + tuple(m.sizes[v] for v in xs))
    for values in itertools.product(*(range(m.sizes[v]) for v in xs)):
        d = joint(intervene(m, dict(zip(xs, values)))).marginal(rest)
        table[(..., *values)] = d.table
    return Dist((*rest, *xs), table)


def selection_view(d: Dist, s: str = "S") -> Dist:
    """Condition a joint on S=1 and drop S.

    Raises:
        ZeroSelectionMass: if P(S=1) is zero
    """
    mass = float(d.marginal([s]).table[1])
    if mass <= 0:
        raise ZeroSelectionMass(f"P({s}=1) = 0")
    sliced = d.fix({s: 1})
    return Dist(sliced.variables, sliced.table / mass)


def average_causal_effect(d: Dist, treatment: str, outcome: str, x0: int, x1: int) -> float:
    """E[Y|do(x1)] - E[Y|do(x0)] over value indices of an interventional table."""
    slice_ = d.marginal([outcome, treatment]).table
    values = np.arange(slice_.shape[0])
    return float(values @ slice_[:, x1] - values @ slice_[:, x0])


# =============================================================================
# Enumeration over exogenous configurations
# =============================================================================


def _exogenous_grid(m: Scm, max_table: int | None) -> tuple[dict[str, np.ndarray], np.ndarray]:
    blocks = sorted(m.exogenous)
    shape = tuple(len(m.exogenous[b]) for b in blocks)
    _check_size(math.prod(shape), "exogenous enumeration", max_table)
    grid = np.indices(shape).reshape(len(blocks), -1)
    u = dict(zip(blocks, grid))
    weight = reduce(np.multiply, (m.exogenous[b][u[b]] for b in blocks), np.ones(grid.shape[1]))
    return u, weight


def _solve(m: Scm, u: Mapping[str, np.ndarray], n: int) -> dict[str, np.ndarray]:
    values: dict[str, np.ndarray] = {}
    for v in m.order:
        index = tuple(values[p] for p in m.parents[v]) + tuple(u[b] for b in m.latents[v])
        mech = m.mechanisms[v]
        values[v] = mech[index] if index else np.full(n, int(mech))
    return values


def counterfactual_joint(
    m: Scm,
    treatment: str,
    x_values: Sequence[int],
    outcome: str,
    covariates: Sequence[str] = (),
    max_table: int | None = None,
) -> Dist:
    """Joint of (Y_x for each x in x_values, X, covariates), each unit shared across worlds.

    Potential-outcome variables are named `Y_x`, e.g. `Y_0`.

    Raises:
        TooLarge: if the exogenous configurations exceed the limit
    """
    u, weight = _exogenous_grid(m, max_table)
    n = len(weight)
    factual = _solve(m, u, n)
    columns = []
    names = []
    for xv in x_values:
        world = _solve(intervene(m, {treatment: xv}), u, n)
        columns.append(world[outcome])
        names.append(f"{outcome}_{xv}")
    for v in (treatment, *covariates):
        columns.append(factual[v])
        names.append(v)
    shape = tuple(m.sizes[outcome] for _ in x_values) + tuple(
        m.sizes[v] for v in (treatment, *covariates)
    )
    table = np.zeros(shape)
    np.add.at(table, tuple(columns), weight)
    return Dist(tuple(names), table)


def counterfactual_independent(
    m: Scm,
    treatment: str,
    outcome: str,
    given: Sequence[str] = (),
    tolerance: float | None = None,
) -> bool:
    """Whether Y_x ⫫ X | given holds for every value x of the treatment."""
    tolerance = tolerance if tolerance is not None else get_config().oracle.tolerance
    for xv in range(m.sizes[treatment]):
        d = counterfactual_joint(m, treatment, [xv], outcome, given)
        potential = f"{outcome}_{xv}"
        with_x = d.conditional([potential], [treatment, *given])
        without_x = d.conditional([potential], list(given))
        if max_abs_difference(with_x, without_x) > tolerance:
            return False
    return True


def sample(m: Scm, n: int, seed: SeedLike) -> Dist:
    """Empirical joint frequencies from `n` simulated units."""
    rng = np.random.default_rng(seed)
    u = {b: rng.choice(len(p), size=n, p=p) for b, p in sorted(m.exogenous.items())}
    values = _solve(m, u, n)
    table = np.zeros(tuple(m.sizes[v] for v in m.order))
    np.add.at(table, tuple(values[v] for v in m.order), 1.0)
    return Dist(m.order, table / n)


# =============================================================================
# Estimand evaluation
# =============================================================================


def _term_dist(t: ProbTerm, sources: Mapping[str, Scm]) -> Dist:
    m = sources.get(t.domain)
    if m is None:
        raise NotEstimable(f"no model for domain {t.domain!r}")
    outcomes = sorted(v.vertex for v in t.outcomes)
    conditions = sorted(v.vertex for v in t.conditions)
    do = sorted(v.vertex for v in t.do_set)
    selection = list(m.selection) if t.selected else []
    if t.selected and not selection:
        raise NotEstimable("selected term over a model without selection vertices")

    family = post_intervention_dist(m, do) if do else joint(m)
    given = [*conditions, *do, *selection]
    if selection:
        mass = family.marginal([*do, *selection]).fix({s: 1 for s in selection})
        if np.any(mass.table <= 0):
            raise ZeroSelectionMass("P(S=1) = 0 under some intervention")
    d = family.conditional(outcomes, given)
    if selection:
        d = d.fix({s: 1 for s in selection})
    return d.relabel({v.vertex: str(v) for v in t.symbols})


def evaluate(
    e: Estimand,
    sources: Mapping[str, Scm],
    catalog: SourceCatalog | None = None,
) -> Dist:
    """Numerical value of an estimand over its free symbols.

    `sources` maps each domain to its model; selected and experimental terms
    are read off the matching model.

    Raises:
        NotEstimable: if a term is not supplied by `catalog` or has no model
        ZeroDenominator: if a quotient divides positive mass by zero
    """
    if catalog is not None:
        report = estimable(e, catalog)
        if not report:
            missing = ", ".join(render(r.term) for r in report.missing)
            raise NotEstimable(f"not estimable: {missing}")
    return _evaluate(e, sources)


def _evaluate(e: Estimand, sources: Mapping[str, Scm]) -> Dist:
    if isinstance(e, ProbTerm):
        return _term_dist(e, sources)
    if isinstance(e, Sum):
        return _evaluate(e.body, sources).sum_out(str(v) for v in e.bound)
    if isinstance(e, Product):
        return reduce(lambda a, b: a * b, (_evaluate(f, sources) for f in e.factors), UNIT)
    if isinstance(e, Quotient):
        return divide(_evaluate(e.numerator, sources), _evaluate(e.denominator, sources))
    raise OracleError(f"cannot evaluate {type(e).__name__}")


def estimand_error(
    query: ProbTerm,
    e: Estimand,
    g: Graph,
    domains: Iterable[str],
    seed: SeedLike,
) -> float:
    """Max gap between the estimand and the query's true value in one random model."""
    m = random_scm(g, seed)
    family = model_family(g, m, domains, seed)
    truth = _term_dist(query, {TARGET: m})
    return max_abs_difference(_evaluate(e, family), truth)


# =============================================================================
# Serialization
# =============================================================================


def _graph_to_json(g: Graph) -> dict[str, Any]:
    return {
        "vertices": [
            {"name": v.name, "kind": v.kind.value, "domains": sorted(v.domains)}
            for v in sorted(g.vertices)
        ],
        "directed": sorted([a, b] for a, b in g.directed),
        "bidirected": sorted([a, b] for a, b in g.bidirected),
    }


def _graph_from_json(data: Mapping[str, Any]) -> Graph:
    vertices = [
        Vertex(v["name"], VertexKind(v["kind"]), frozenset(v.get("domains", ())))
        for v in data["vertices"]
    ]
    return Graph.build(
        vertices,
        [tuple(e) for e in data.get("directed", ())],
        [tuple(e) for e in data.get("bidirected", ())],
    )


def scm_to_json(m: Scm) -> dict[str, Any]:
    """JSON form; floats survive the round trip exactly."""
    return {
        "graph": _graph_to_json(m.graph),
        "order": list(m.order),
        "sizes": {v: m.sizes[v] for v in m.order},
        "exogenous": {b: m.exogenous[b].tolist() for b in sorted(m.exogenous)},
        "parents": {v: list(m.parents[v]) for v in m.order},
        "latents": {v: list(m.latents[v]) for v in m.order},
        "mechanisms": {v: m.mechanisms[v].tolist() for v in m.order},
    }


def scm_from_json(data: Mapping[str, Any]) -> Scm:
    try:
        order = tuple(data["order"])
        return Scm(
            graph=_graph_from_json(data["graph"]),
            order=order,
            sizes={v: int(data["sizes"][v]) for v in order},
            exogenous={b: np.asarray(p, dtype=np.float64) for b, p in data["exogenous"].items()},
            parents={v: tuple(data["parents"][v]) for v in order},
            latents={v: tuple(data["latents"][v]) for v in order},
            mechanisms={v: np.asarray(data["mechanisms"][v], dtype=np.int64) for v in order},
        )
    except (KeyError, TypeError, ValueError) as e:
        raise OracleError(f"malformed model: {e}") from e


def save_scm(m: Scm, path: Path) -> Path:
    with open(path, "w") as f:
        json.dump(scm_to_json(m), f, indent=2)
    logger.debug("Model saved to %s", path)
    return path


def load_scm(path: Path) -> Scm:
    with open(path) as f:
        return scm_from_json(json.load(f))


__all__ = [
    "Dist",
    "NotEstimable",
    "OracleError",
    "Scm",
    "TooLarge",
    "ValueOutOfDomain",
    "ZeroDenominator",
    "ZeroSelectionMass",
    "average_causal_effect",
    "counterfactual_independent",
    "counterfactual_joint",
    "divide",
    "domain_variant",
    "estimand_error",
    "evaluate",
    "intervene",
    "joint",
    "load_scm",
    "max_abs_difference",
    "model_family",
    "post_intervention_dist",
    "random_scm",
    "sample",
    "save_scm",
    "scm_from_json",
    "scm_to_json",
    "selection_view",
    "truncated_factorization",
]
