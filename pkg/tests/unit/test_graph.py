"""Unit tests for dofusion.core.graph module."""

import pytest


class TestValidate:
    """Tests for validate and find_violations."""

    def test_accepts_valid_graph(self):
        """A DAG with one bidirected edge should build."""
        from dofusion.core.graph import Vertex, validate

        g = validate([Vertex("X"), Vertex("Y"), Vertex("Z")], [("Z", "X"), ("X", "Y")], [("Z", "Y")])

        assert g.endogenous == {"X", "Y", "Z"}
        assert ("Y", "Z") in g.bidirected

    def test_reports_cycle(self):
        """A two-cycle should be reported as CycleDetected with its path."""
        from dofusion.core.graph import GraphValidationError, Vertex, ViolationKind, validate

        with pytest.raises(GraphValidationError) as exc:
            validate([Vertex("X"), Vertex("Y")], [("X", "Y"), ("Y", "X")])

        (violation,) = exc.value.violations
        assert violation.kind is ViolationKind.CYCLE_DETECTED
        assert violation.location[0] == violation.location[-1]
        assert set(violation.location) == {"X", "Y"}

    def test_selection_vertex_cannot_emit(self):
        """An arrow out of a selection vertex should be flagged at that vertex."""
        from dofusion.core.graph import GraphValidationError, Vertex, VertexKind, ViolationKind, validate

        vertices = [Vertex("X"), Vertex("Y"), Vertex("S", VertexKind.SELECTION)]
        with pytest.raises(GraphValidationError) as exc:
            validate(vertices, [("X", "Y"), ("X", "S"), ("S", "Y")])

        kinds = [v.kind for v in exc.value.violations]
        assert kinds == [ViolationKind.BAD_SELECTION_VERTEX]
        assert exc.value.violations[0].location == ("S",)

    def test_selection_vertex_may_share_latent(self):
        """Bidirected edges at selection vertices are allowed."""
        from dofusion.core.graph import Vertex, VertexKind, validate

        vertices = [Vertex("X"), Vertex("Y"), Vertex("S", VertexKind.SELECTION)]
        g = validate(vertices, [("X", "Y"), ("X", "S")], [("Y", "S")])

        assert g.selection == {"S"}

    def test_discrepancy_vertex_cannot_receive(self):
        """An arrow into a discrepancy vertex should be flagged."""
        from dofusion.core.graph import GraphValidationError, Vertex, VertexKind, ViolationKind, validate

        vertices = [Vertex("X"), Vertex("T", VertexKind.DISCREPANCY)]
        with pytest.raises(GraphValidationError) as exc:
            validate(vertices, [("X", "T")])

        assert exc.value.violations[0].kind is ViolationKind.BAD_DISCREPANCY_VERTEX

    def test_collects_every_violation(self):
        """Unknown endpoints, self-loops and duplicates are all reported together."""
        from dofusion.core.graph import GraphValidationError, Vertex, ViolationKind, validate

        with pytest.raises(GraphValidationError) as exc:
            validate(
                [Vertex("X"), Vertex("Y"), Vertex("X")],
                [("X", "Y"), ("X", "Y"), ("Y", "Y"), ("Q", "X")],
            )

        kinds = {v.kind for v in exc.value.violations}
        assert kinds == {
            ViolationKind.DUPLICATE_VERTEX,
            ViolationKind.DUPLICATE_EDGE,
            ViolationKind.SELF_LOOP,
            ViolationKind.UNKNOWN_ENDPOINT,
        }


class TestMutilate:
    """Tests for mutilate."""

    def test_cut_incoming(self, confounder):
        """Arrows into X should disappear, everything else stays."""
        from dofusion.core.graph import mutilate

        g = mutilate(confounder, cut_incoming={"X"})

        assert g.directed == {("Z", "Y"), ("X", "Y")}
        assert g.names == confounder.names

    def test_cut_outgoing(self, wage_premium):
        """Arrows out of C should disappear; the bidirected edge stays."""
        from dofusion.core.graph import mutilate

        g = mutilate(wage_premium, cut_outgoing={"C"})

        assert not any(a == "C" for a, _b in g.directed)
        assert ("C", "E") in g.bidirected
        assert ("E", "C") in g.directed

    def test_cut_incoming_drops_bidirected(self, wage_premium):
        """Bidirected edges carry an arrowhead at both ends."""
        from dofusion.core.graph import mutilate

        g = mutilate(wage_premium, cut_incoming={"C"})

        assert ("C", "E") not in g.bidirected
        assert ("W", "Y") in g.bidirected

    def test_input_unchanged(self, confounder):
        """Mutilation returns a new graph."""
        from dofusion.core.graph import mutilate

        before = set(confounder.directed)
        mutilate(confounder, cut_incoming={"X"}, cut_outgoing={"Z"})

        assert set(confounder.directed) == before

    def test_unknown_vertex(self, confounder):
        """Cutting an undeclared vertex should raise UnknownVertex."""
        from dofusion.core.graph import UnknownVertex, mutilate

        with pytest.raises(UnknownVertex, match="Q"):
            mutilate(confounder, cut_incoming={"Q"})

    def test_discrepancy_vertex_may_end_isolated(self, transport_covariate):
        """Cutting below a discrepancy vertex leaves a valid graph."""
        from dofusion.core.graph import mutilate

        g = mutilate(transport_covariate, cut_outgoing={"S"})

        assert g.children("S") == frozenset()


class TestAncestry:
    """Tests for ancestors, descendants and topological_order."""

    def test_reflexive(self, confounder):
        """Both closures include the starting set."""
        from dofusion.core.graph import ancestors, descendants

        assert ancestors(confounder, {"Y"}) == {"X", "Y", "Z"}
        assert descendants(confounder, {"Z"}) == {"X", "Y", "Z"}
        assert descendants(confounder, {"Y"}) == {"Y"}

    def test_bidirected_edges_ignored(self, wage_premium):
        """Only directed edges count for ancestry."""
        from dofusion.core.graph import ancestors

        assert ancestors(wage_premium, {"W"}) == {"W", "C", "E"}

    def test_topological_order_is_lexicographic(self, collider_chain):
        """Ties are broken by name."""
        from dofusion.core.graph import topological_order

        assert topological_order(collider_chain) == ["A", "B", "C", "D", "E"]


class TestGraphLookup:
    """Tests for Graph accessors."""

    def test_kinds(self, selection_treatment, transport_covariate):
        """Vertices are partitioned by kind."""
        assert selection_treatment.selection == {"S"}
        assert selection_treatment.endogenous == {"X", "Y"}
        assert transport_covariate.discrepancy == {"S"}

    def test_discrepancy_for_domain(self):
        """Labelled discrepancy vertices apply only to their domains."""
        from dofusion.core.fixtures import get_fixture

        g = get_fixture("transport_two_sources").graph

        assert g.discrepancy_for("a") == {"S1", "S2"}
        assert g.discrepancy_for("b") == {"S1", "S3"}

    def test_check_unknown(self, confounder):
        """check raises for names the graph does not declare."""
        from dofusion.core.graph import UnknownVertex

        with pytest.raises(UnknownVertex):
            confounder.check({"X", "W"})

    def test_without(self, wage_premium):
        """Removing a vertex drops its edges too."""
        g = wage_premium.without({"W"})

        assert "W" not in g.names
        assert not any("W" in e for e in g.directed | g.bidirected)

    def test_neighbourhood(self, collider_chain):
        """Neighbourhood counts skeleton hops."""
        assert collider_chain.neighbourhood({"A"}, 1) == {"A", "D"}
        assert collider_chain.neighbourhood({"A"}, 2) == {"A", "B", "D", "E"}


class TestFormatGraph:
    """Tests for format_graph."""

    def test_lists_declarations_then_edges(self, selection_treatment):
        """Declarations come first, edges sorted."""
        from dofusion.core.graph import format_graph

        assert format_graph(selection_treatment) == "var X Y\nselect S\nX -> S\nX -> Y\n"

    def test_domains_follow_snode(self):
        """Discrepancy vertices list their domains."""
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.graph import format_graph

        text = format_graph(get_fixture("transport_two_sources").graph)

        assert "snode S1 a b\n" in text
        assert "snode S3 b\n" in text
