"""Unit tests for dofusion.core.separation module."""

import pytest


class TestDSeparated:
    """Tests for d_separated."""

    def test_chain_blocked_by_middle(self, collider_chain):
        """Conditioning on the middle of a chain blocks it."""
        from dofusion.core.separation import d_separated

        assert not d_separated(collider_chain, {"A"}, {"E"})
        assert d_separated(collider_chain, {"A"}, {"E"}, {"D"})

    def test_collider_opened_by_descendant(self, collider_chain):
        """Conditioning on a collider's descendant opens the collider."""
        from dofusion.core.separation import d_separated

        assert d_separated(collider_chain, {"A"}, {"B"})
        assert not d_separated(collider_chain, {"A"}, {"B"}, {"D"})
        assert not d_separated(collider_chain, {"A"}, {"B"}, {"E"})

    def test_fork(self, collider_chain):
        """A common cause connects its children until conditioned on."""
        from dofusion.core.separation import d_separated

        assert not d_separated(collider_chain, {"C"}, {"D"})
        assert d_separated(collider_chain, {"C"}, {"D"}, {"B"})

    def test_bidirected_edge_connects(self, instrument):
        """X <-> Y is an open path; Z reaches Y only through the collider at X."""
        from dofusion.core.separation import d_separated

        assert not d_separated(instrument, {"X"}, {"Y"})
        assert d_separated(instrument, {"Z"}, {"Y"}, {"X"}) is False
        assert not d_separated(instrument, {"Z"}, {"Y"})

    def test_empty_side_is_separated(self, collider_chain):
        """An empty set is trivially separated from anything."""
        from dofusion.core.separation import d_separated

        assert d_separated(collider_chain, set(), {"A"})

    def test_overlapping_sets_rejected(self, collider_chain):
        """x, y and z must be pairwise disjoint."""
        from dofusion.core.separation import OverlappingSets, d_separated

        with pytest.raises(OverlappingSets):
            d_separated(collider_chain, {"A"}, {"E"}, {"A"})

    def test_unknown_vertex(self, collider_chain):
        """Undeclared names raise UnknownVertex."""
        from dofusion.core.graph import UnknownVertex
        from dofusion.core.separation import d_separated

        with pytest.raises(UnknownVertex):
            d_separated(collider_chain, {"A"}, {"Q"})

    def test_symmetric(self, wage_premium):
        """Separation does not depend on argument order."""
        from dofusion.core.separation import d_separated

        names = sorted(wage_premium.endogenous)
        for a in names:
            for b in names:
                if a != b:
                    assert d_separated(wage_premium, {a}, {b}, set()) == d_separated(wage_premium, {b}, {a}, set())


class TestImpliedIndependencies:
    """Tests for implied_independencies."""

    def test_collider_example(self, collider_chain):
        """The five-vertex example lists exactly seven statements."""
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.separation import implied_independencies

        statements = [str(s) for s in implied_independencies(collider_chain, 1)]

        assert statements == list(get_fixture("collider_chain").expected_ci)

    def test_max_given_zero(self, collider_chain):
        """Only marginal independencies are listed without conditioning."""
        from dofusion.core.separation import implied_independencies

        statements = [str(s) for s in implied_independencies(collider_chain, 0)]

        assert statements == ["A ⫫ B", "A ⫫ C"]

    def test_negative_bound_rejected(self, collider_chain):
        """max_given must be nonnegative."""
        from dofusion.core.separation import implied_independencies

        with pytest.raises(ValueError):
            implied_independencies(collider_chain, -1)


class TestFindSeparator:
    """Tests for find_separator and subsets."""

    def test_smallest_first(self, wage_premium):
        """{E} is the first separator of C and Y once C's arrows out are cut."""
        from dofusion.core.graph import mutilate
        from dofusion.core.separation import find_separator

        g = mutilate(wage_premium, cut_outgoing={"C"})

        assert find_separator(g, {"C"}, {"Y"}, {"E", "H", "W"}, 3) == {"E"}

    def test_none_when_impossible(self, instrument):
        """X and Y share a latent cause; nothing separates them."""
        from dofusion.core.separation import find_separator

        assert find_separator(instrument, {"X"}, {"Y"}, {"Z"}, 1) is None

    def test_subsets_order(self):
        """Subsets come by size, then lexicographically."""
        from dofusion.core.separation import subsets

        assert list(subsets(["B", "A"], 2)) == [
            frozenset(),
            frozenset({"A"}),
            frozenset({"B"}),
            frozenset({"A", "B"}),
        ]
