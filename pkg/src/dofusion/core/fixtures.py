"""Catalogue of reference diagrams with their queries and known answers.

Each entry carries the diagram, the query asked of it, the data sources an
analyst holds and, where one is known, the expected estimand in the text
grammar. The validation suite and the golden tests both read from here.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .engine import DeriveStatus
from .estimand import Source, SourceCatalog
from .graph import Graph, Vertex, VertexKind, validate
from .oracle import Scm


class Task(Enum):
    """What a fixture exercises."""

    CI_LIST = "ci-list"
    ADJUST = "adjust"
    IDENTIFY = "identify"
    RECOVER = "recover"
    TRANSPORT = "transport"
    MUTILATION = "mutilation"


def _graph(
    endogenous: str,
    directed: Iterable[str] = (),
    bidirected: Iterable[str] = (),
    selection: str = "",
    discrepancy: Mapping[str, Iterable[str]] | str = "",
) -> Graph:
    """Build a diagram from compact edge strings such as "X->Y" and "X<->Y"."""
    vertices = [Vertex(n) for n in endogenous.split()]
    vertices += [Vertex(n, VertexKind.SELECTION) for n in selection.split()]
    if isinstance(discrepancy, str):
        vertices += [Vertex(n, VertexKind.DISCREPANCY) for n in discrepancy.split()]
    else:
        vertices += [
            Vertex(n, VertexKind.DISCREPANCY, frozenset(domains))
            for n, domains in discrepancy.items()
        ]
    return validate(
        vertices,
        [tuple(e.split("->")) for e in directed],  # type: ignore[misc]
        [tuple(e.split("<->")) for e in bidirected],  # type: ignore[misc]
    )


@dataclass(frozen=True)
class Fixture:
    """A reference diagram and what is known about it."""

    id: str
    name: str
    task: Task
    graph: Graph
    query: str | None = None
    sources: tuple[Source, ...] = ()
    expected: str | None = None
    expected_status: DeriveStatus = DeriveStatus.DERIVED
    # A plausible estimand that differs from the query in generic models
    biased: str | None = None
    expected_sets: tuple[tuple[str, ...], ...] = ()
    expected_ci: tuple[str, ...] = ()
    cut_incoming: tuple[str, ...] = ()
    cut_outgoing: tuple[str, ...] = ()
    treatment: tuple[str, ...] = ()
    outcome: tuple[str, ...] = ()
    description: str = ""
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def catalog(self) -> SourceCatalog:
        return SourceCatalog(self.sources or (Source(),))

    @property
    def domains(self) -> frozenset[str]:
        return self.catalog.domains


_OBS = (Source(),)
_SELECTED = (Source(selected=True),)

CONFOUNDER = _graph("X Y Z", ["Z->X", "Z->Y", "X->Y"])
WAGE_PREMIUM = _graph(
    "C E H W Y",
    ["C->Y", "C->W", "W->H", "W->Y", "H->Y", "E->C", "E->Y"],
    ["W<->Y", "C<->E"],
)
SURROGATE = _graph(
    "W1 W2 X Y Z",
    ["W1->Z", "Z->X", "X->Y", "W2->X", "W2->Y", "W1->Y"],
    ["Z<->X", "Z<->Y", "W1<->X"],
)
TRANSPORT_COVARIATE = _graph(
    "X Y Z",
    ["S->Z", "Z->X", "Z->Y", "X->Y"],
    ["X<->Z", "X<->Y"],
    discrepancy="S",
)


FIXTURE_CATALOG: dict[str, Fixture] = {
    # =========================================================================
    # Structural models and d-separation
    # =========================================================================
    "confounder": Fixture(
        id="confounder",
        name="Three-equation model",
        task=Task.IDENTIFY,
        graph=CONFOUNDER,
        query="P(Y|do(X))",
        sources=_OBS,
        expected="sum_Z P(Y|X,Z) * P(Z)",
        treatment=("X",),
        outcome=("Y",),
        description="z <- f(u_z), x <- f(z, u_x), y <- f(x, z, u_y)",
    ),
    "collider_chain": Fixture(
        id="collider_chain",
        name="d-separation example",
        task=Task.CI_LIST,
        graph=_graph("A B C D E", ["A->D", "B->C", "B->D", "D->E"]),
        expected_ci=(
            "A ⫫ B",
            "A ⫫ C",
            "A ⫫ E | D",
            "B ⫫ E | D",
            "C ⫫ D | B",
            "C ⫫ E | B",
            "C ⫫ E | D",
        ),
        description="D is a collider between A and B; its descendant E opens the path too",
    ),
    "confounder_cut": Fixture(
        id="confounder_cut",
        name="Post-intervention graph",
        task=Task.MUTILATION,
        graph=CONFOUNDER,
        cut_incoming=("X",),
        description="Arrows into X removed by do(X=x0)",
    ),
    # =========================================================================
    # Confounding
    # =========================================================================
    "wage_premium": Fixture(
        id="wage_premium",
        name="College wage premium",
        task=Task.IDENTIFY,
        graph=WAGE_PREMIUM,
        query="P(Y|do(C))",
        sources=_OBS,
        expected="sum_E P(Y|C,E) * P(E)",
        treatment=("C",),
        outcome=("Y",),
        description="E is backdoor admissible; adjusting for W would open C -> W <-> Y",
    ),
    "wage_premium_cut": Fixture(
        id="wage_premium_cut",
        name="College wage premium, arrows out of C removed",
        task=Task.MUTILATION,
        graph=WAGE_PREMIUM,
        cut_outgoing=("C",),
        description="Graph on which the backdoor criterion is checked",
    ),
    "adjustment_sets": Fixture(
        id="adjustment_sets",
        name="Large adjustment example",
        task=Task.ADJUST,
        graph=_graph(
            "W1 W2 W3 W4 W5 W6 X Y",
            [
                "X->W6",
                "W2->X",
                "W2->W3",
                "W3->W1",
                "W3->W5",
                "W6->Y",
                "W4->W3",
                "W4->Y",
                "W5->W6",
                "W5->Y",
            ],
            ["X<->W1", "W2<->W3", "W1<->Y", "W6<->Y"],
        ),
        treatment=("X",),
        outcome=("Y",),
        expected_sets=(
            ("W2",),
            ("W2", "W3"),
            ("W2", "W4"),
            ("W3", "W4"),
            ("W2", "W3", "W4"),
            ("W2", "W5"),
            ("W2", "W3", "W5"),
            ("W4", "W5"),
            ("W2", "W4", "W5"),
            ("W3", "W4", "W5"),
            ("W2", "W3", "W4", "W5"),
        ),
        description="Eleven admissible adjustment sets; W1 is a collider between X and Y",
    ),
    "conditional_frontdoor": Fixture(
        id="conditional_frontdoor",
        name="Conditional frontdoor",
        task=Task.IDENTIFY,
        graph=_graph(
            "M W1 W2 W3 X Y",
            ["X->M", "M->Y", "W2->X", "W2->M", "W1->X", "W1->Y", "W3->M", "W3->Y"],
            ["X<->Y"],
        ),
        query="P(Y|do(X))",
        sources=_OBS,
        expected=(
            "sum_{M,W1,W2,W3,X'} P(M|X,W1,W2,W3) * P(W1,W2,W3)"
            " * P(Y|M,W1,W2,W3,X') * P(X'|W1,W2,W3)"
        ),
        treatment=("X",),
        outcome=("Y",),
        description="No backdoor set exists; M carries the whole effect",
    ),
    # =========================================================================
    # Surrogate experiments
    # =========================================================================
    "surrogate": Fixture(
        id="surrogate",
        name="Surrogate experiment on Z",
        task=Task.IDENTIFY,
        graph=SURROGATE,
        query="P(Y|do(X))",
        sources=(Source(), Source(intervened=frozenset({"Z"}))),
        expected="sum_{W1,W2} P(Y|X,W1,W2,do(Z)) * P(W1,W2|do(Z))",
        treatment=("X",),
        outcome=("Y",),
        description="X blocks every directed path from Z; {W1,W2} is backdoor admissible once Z is cut",
    ),
    "surrogate_cut": Fixture(
        id="surrogate_cut",
        name="Surrogate experiment graph, arrows into Z removed",
        task=Task.MUTILATION,
        graph=SURROGATE,
        cut_incoming=("Z",),
    ),
    "instrument": Fixture(
        id="instrument",
        name="Instrumental variable",
        task=Task.IDENTIFY,
        graph=_graph("X Y Z", ["Z->X", "X->Y"], ["X<->Y"]),
        query="P(Y|do(X))",
        sources=(Source(), Source(intervened=frozenset({"Z"}))),
        expected_status=DeriveStatus.NOT_DERIVED,
        biased="P(Y|X)",
        treatment=("X",),
        outcome=("Y",),
        description="Not identifiable even with experiments on the instrument",
    ),
    "indirect_surrogate": Fixture(
        id="indirect_surrogate",
        name="Indirect surrogate",
        task=Task.IDENTIFY,
        graph=_graph(
            "W1 W2 W3 X Y Z",
            ["Z->W1", "W1->X", "X->W2", "W2->Y", "W3->X", "W3->Y"],
            ["Z<->X", "X<->Y", "Z<->W2", "Z<->Y", "W1<->X", "W1<->W3"],
        ),
        query="P(Y|do(X))",
        sources=(Source(), Source(intervened=frozenset({"Z"}))),
        expected="sum_{W2,X'} P(W2|X,do(Z)) * P(Y|W2,X',do(Z)) * P(X'|do(Z))",
        treatment=("X",),
        outcome=("Y",),
        description="Frontdoor through W2 in the experimental regime",
    ),
    # =========================================================================
    # Selection bias
    # =========================================================================
    "selection_latent": Fixture(
        id="selection_latent",
        name="Selection on the outcome's latent causes",
        task=Task.RECOVER,
        graph=_graph("X Y Z", ["X->Y", "Z->X", "Z->Y", "Z->S"], ["Y<->S"], selection="S"),
        query="P(Y|do(X))",
        sources=_SELECTED,
        expected_status=DeriveStatus.NOT_DERIVED,
        biased="P(Y|X,S=1)",
        treatment=("X",),
        outcome=("Y",),
        description="Y is adjacent to S, so nothing conditional on Y is recoverable",
    ),
    "selection_treatment": Fixture(
        id="selection_treatment",
        name="Simple selection",
        task=Task.RECOVER,
        graph=_graph("X Y", ["X->Y", "X->S"], selection="S"),
        query="P(Y|do(X))",
        sources=_SELECTED,
        expected="P(Y|X,S=1)",
        treatment=("X",),
        outcome=("Y",),
    ),
    "selection_confounded": Fixture(
        id="selection_confounded",
        name="Selection with confounding",
        task=Task.RECOVER,
        graph=_graph(
            "W1 W2 W3 X Y Z",
            ["X->Y", "Z->W3", "Z->Y", "W1->W2", "W1->W3", "W2->X", "W3->X", "W1->S"],
            ["W1<->W2", "Z<->Y"],
            selection="S",
        ),
        query="P(Y|do(X))",
        sources=_SELECTED,
        expected="sum_Z P(Y|X,Z,S=1) * P(Z|S=1)",
        treatment=("X",),
        outcome=("Y",),
        description="Of the minimal backdoor sets only {Z} is separated from S",
    ),
    "selection_recovery": Fixture(
        id="selection_recovery",
        name="Recovery beyond adjustment",
        task=Task.RECOVER,
        graph=_graph(
            "W X Y Z", ["X->Y", "Z->X", "W->X", "W->Z", "W->S"], ["Z<->Y"], selection="S"
        ),
        query="P(Y|do(X))",
        sources=_SELECTED,
        expected="sum_Z P(Y|X,Z,W,S=1) * P(Z|W,S=1)",
        treatment=("X",),
        outcome=("Y",),
        description="Needs do-calculus on selected terms; the answer does not depend on W",
    ),
    "selection_survey": Fixture(
        id="selection_survey",
        name="Selection with unbiased covariate data",
        task=Task.RECOVER,
        graph=_graph(
            "W X Y Z", ["X->Y", "Z->X", "Z->Y", "W->S", "W->Y", "Z->S"], selection="S"
        ),
        query="P(Y|do(X))",
        sources=(Source(selected=True), Source(measured=frozenset({"W", "Z"}))),
        expected="sum_{W,Z} P(Y|X,Z,W,S=1) * P(Z,W)",
        treatment=("X",),
        outcome=("Y",),
        description="{Z,W} is s-backdoor admissible with P(z,w) from an unbiased survey",
    ),
    # =========================================================================
    # Transportability
    # =========================================================================
    "transport_covariate": Fixture(
        id="transport_covariate",
        name="Transport with a differing covariate",
        task=Task.TRANSPORT,
        graph=TRANSPORT_COVARIATE,
        query="P(Y|do(X))",
        sources=(Source(domain="pi", intervened=frozenset({"X"})),),
        expected="sum_Z P^pi(Y|do(X),Z) * P(Z)",
        treatment=("X",),
        outcome=("Y",),
    ),
    "transport_direct": Fixture(
        id="transport_direct",
        name="Direct transport",
        task=Task.TRANSPORT,
        graph=_graph("X Y", ["S->X", "X->Y"], ["X<->Y"], discrepancy="S"),
        query="P(Y|do(X))",
        sources=(Source(domain="pi", intervened=frozenset({"X"})),),
        expected="P^pi(Y|do(X))",
        treatment=("X",),
        outcome=("Y",),
        description="The difference sits at X and is removed by the intervention",
    ),
    "transport_blocked": Fixture(
        id="transport_blocked",
        name="Non-transportable",
        task=Task.TRANSPORT,
        graph=_graph(
            "X Y Z",
            ["S->Z", "Z->X", "Z->Y", "X->Y"],
            ["X<->Z", "X<->Y", "Z<->Y"],
            discrepancy="S",
        ),
        query="P(Y|do(X))",
        sources=(Source(domain="pi", intervened=frozenset({"X"})),),
        expected_status=DeriveStatus.NOT_DERIVED,
        biased="sum_Z P^pi(Y|do(X),Z) * P(Z)",
        treatment=("X",),
        outcome=("Y",),
    ),
    "transport_mediator": Fixture(
        id="transport_mediator",
        name="Transport through a post-treatment variable",
        task=Task.TRANSPORT,
        graph=_graph("X Y Z", ["X->Z", "Z->Y", "S->Z", "X->Y"], ["X<->Y"], discrepancy="S"),
        query="P(Y|do(X))",
        sources=(Source(domain="pi", intervened=frozenset({"X"})),),
        expected="sum_Z P^pi(Y|do(X),Z) * P(Z|X)",
        treatment=("X",),
        outcome=("Y",),
    ),
    "transport_two_mechanisms": Fixture(
        id="transport_two_mechanisms",
        name="Transport with two differing mechanisms",
        task=Task.TRANSPORT,
        graph=_graph(
            "W1 W2 W3 X Y Z",
            ["Sp->W3", "S->W1", "X->Z", "Z->Y", "W1->X", "W1->W2", "W2->Z", "W3->Z", "W3->Y"],
            ["X<->Y", "X<->W1", "W1<->W2", "X<->Z"],
            discrepancy="S Sp",
        ),
        query="P(Y|do(X))",
        sources=(Source(domain="pi", intervened=frozenset({"X"})),),
        expected="sum_{W2,W3,Z} P^pi(Y|do(X),Z,W2,W3) * P^pi(Z|do(X),W2,W3) * P(W2,W3)",
        treatment=("X",),
        outcome=("Y",),
        notes=(
            "the s-admissible shortcut returns this formula with Z summed out of the source factors",
        ),
    ),
    "transport_two_sources": Fixture(
        id="transport_two_sources",
        name="Combining two source experiments",
        task=Task.TRANSPORT,
        graph=_graph(
            "X Y Z",
            ["X->Z", "Z->Y", "X->Y", "S1->X", "S2->Y", "S3->Z"],
            ["X<->Y", "X<->Z"],
            discrepancy={"S1": ("a", "b"), "S2": ("a",), "S3": ("b",)},
        ),
        query="P(Y|do(X))",
        sources=(
            Source(domain="a", intervened=frozenset({"X"})),
            Source(domain="b", intervened=frozenset({"X", "Z"})),
        ),
        expected="sum_Z P^b(Y|do(X,Z)) * P^a(Z|do(X))",
        treatment=("X",),
        outcome=("Y",),
        description="Y's mechanism differs in a, Z's in b; each source supplies the factor the other cannot",
    ),
}


def get_fixture(fixture_id: str) -> Fixture | None:
    """Get a fixture by ID."""
    return FIXTURE_CATALOG.get(fixture_id)


def get_fixtures_by_task(task: Task) -> list[Fixture]:
    return [f for f in FIXTURE_CATALOG.values() if f.task == task]


def get_query_fixtures() -> list[Fixture]:
    """Fixtures that pose a query to the derivation engine."""
    return [f for f in FIXTURE_CATALOG.values() if f.query is not None]


def get_golden_fixtures() -> list[Fixture]:
    """Query fixtures expected to derive, known estimand or not."""
    return [f for f in get_query_fixtures() if f.expected_status is DeriveStatus.DERIVED]


def structural_example(
    p_z: float = 0.4, p_x: float = 0.3, p_y: float = 0.2
) -> Scm:
    """The three-equation model over Z, X, Y with binary noise.

    z = u_z, x = z xor u_x, y = (x and z) or u_y, where each u is 1 with
    the given probability.
    """
    g = CONFOUNDER
    z = np.array([0, 1])
    x = np.array([[0, 1], [1, 0]])  # [z, u_x]
    y = np.zeros((2, 2, 2), dtype=np.int64)  # [x, z, u_y]
    for xv in range(2):
        for zv in range(2):
            for u in range(2):
                y[xv, zv, u] = int((xv and zv) or u)
    return Scm(
        graph=g,
        order=("Z", "X", "Y"),
        sizes={"X": 2, "Y": 2, "Z": 2},
        exogenous={
            "U_X": np.array([1 - p_x, p_x]),
            "U_Y": np.array([1 - p_y, p_y]),
            "U_Z": np.array([1 - p_z, p_z]),
        },
        parents={"Z": (), "X": ("Z",), "Y": ("X", "Z")},
        latents={"Z": ("U_Z",), "X": ("U_X",), "Y": ("U_Y",)},
        mechanisms={"Z": z, "X": x, "Y": y},
    )


__all__ = [
    "FIXTURE_CATALOG",
    "Fixture",
    "Task",
    "get_fixture",
    "get_fixtures_by_task",
    "get_golden_fixtures",
    "get_query_fixtures",
    "structural_example",
]
