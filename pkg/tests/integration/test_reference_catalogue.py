"""Integration tests over the reference catalogue.

These tests run every reference query through the engine and check the
answers against the known estimands and against random structural models.
"""

import pytest

from dofusion.core.fixtures import Task, get_fixtures_by_task, get_golden_fixtures, get_query_fixtures

GOLDEN_IDS = [f.id for f in get_golden_fixtures()]
NEGATIVE_IDS = [f.id for f in get_query_fixtures() if f.id not in GOLDEN_IDS]
MUTILATION_IDS = [f.id for f in get_fixtures_by_task(Task.MUTILATION)]


def _solve(fixture, budget=None):
    from dofusion.core.engine import identify, query_from_text, recover, transport

    q = query_from_text(fixture.query, fixture.graph)
    if fixture.task is Task.RECOVER:
        return recover(q, fixture.catalog, budget)
    if fixture.task is Task.TRANSPORT:
        return transport(q, fixture.catalog, budget)
    return identify(q, fixture.catalog, budget)


class TestKnownEstimands:
    """Shortcut answers reproduce the reference estimands exactly."""

    @pytest.mark.parametrize(
        "fixture_id",
        [
            "confounder",
            "wage_premium",
            "conditional_frontdoor",
            "selection_treatment",
            "transport_covariate",
            "transport_two_sources",
        ],
    )
    def test_exact(self, fixture_id):
        """The canonical estimand equals the reference one."""
        from dofusion.core.estimand import canonicalize
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand

        fixture = get_fixture(fixture_id)
        result = _solve(fixture)

        assert result.success
        assert result.estimand == canonicalize(parse_estimand(fixture.expected))

    def test_three_factor_form_sums_to_shortcut(self):
        """Merging the two source factors and summing out Z gives the shortcut answer."""
        from dofusion.core.estimand import canonicalize, split
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand
        from dofusion.core.rules import Move, RuleName, apply_move

        fixture = get_fixture("transport_two_mechanisms")
        g = fixture.graph
        result = _solve(fixture)
        e = canonicalize(parse_estimand(fixture.expected))

        def factor_with(expr, outcome):
            _bound, factors = split(expr)
            return next(i for i, f in enumerate(factors) if outcome in {v.vertex for v in f.outcomes})

        merge = Move.make(
            RuleName.CHAIN_SPLIT, [factor_with(e, "Y")], action="merge", **{"with": factor_with(e, "Z")}
        )
        merged = apply_move(g, e, merge).after
        i = factor_with(merged, "Z")
        (z,) = [v for v in split(merged)[1][i].outcomes if v.vertex == "Z"]
        summed = apply_move(g, merged, Move.make(RuleName.MARGINALIZE, [i], var=str(z))).after

        assert result.path == "s-admissible"
        assert summed == result.estimand

    def test_adjustment_sets(self):
        """The large adjustment example has exactly its eleven sets."""
        from dofusion.core.criteria import enumerate_backdoor_sets
        from dofusion.core.fixtures import get_fixture

        fixture = get_fixture("adjustment_sets")
        g = fixture.graph
        x, y = frozenset(fixture.treatment), frozenset(fixture.outcome)
        report = enumerate_backdoor_sets(g, x, y, g.endogenous - x - y)

        assert set(report.admissible_sets) == {frozenset(s) for s in fixture.expected_sets}

    def test_independencies(self):
        """The implied independencies match the reference list."""
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.separation import implied_independencies

        fixture = get_fixture("collider_chain")

        assert [str(s) for s in implied_independencies(fixture.graph, 3)] == list(fixture.expected_ci)

    @pytest.mark.parametrize("fixture_id", MUTILATION_IDS)
    def test_mutilation(self, fixture_id):
        """Cut graphs keep their vertices and lose only the named arrows."""
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.graph import mutilate

        fixture = get_fixture(fixture_id)
        g = fixture.graph
        cut = mutilate(g, fixture.cut_incoming, fixture.cut_outgoing)

        assert cut.vertices == g.vertices
        for v in fixture.cut_incoming:
            assert not cut.parents(v)
            assert not cut.spouses(v)
        for v in fixture.cut_outgoing:
            assert not cut.children(v)


class TestNegativeCases:
    """Queries the catalogue marks as not derivable."""

    @pytest.mark.parametrize("fixture_id", NEGATIVE_IDS)
    def test_not_derived(self, fixture_id):
        """No estimand is reported."""
        from dofusion.core.engine import SearchBudget
        from dofusion.core.fixtures import get_fixture

        result = _solve(get_fixture(fixture_id), SearchBudget(max_steps=4, max_states=5000))

        assert not result.success
        assert result.estimand is None
        assert result.reason


@pytest.mark.slow
class TestOracleAgreement:
    """Numerical checks against the configured number of random models."""

    @pytest.mark.parametrize("fixture_id", GOLDEN_IDS)
    def test_reference_estimands(self, fixture_id):
        """Every reference estimand equals its query in every model."""
        from dofusion.core.config import get_config
        from dofusion.core.engine import query_from_text
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand
        from dofusion.core.queue import ValidationQueue, estimand_check

        fixture = get_fixture(fixture_id)
        q = query_from_text(fixture.query, fixture.graph)
        check = estimand_check(q.term, parse_estimand(fixture.expected), fixture.graph, fixture.domains)

        summary = ValidationQueue().run({fixture_id: check}, get_config().oracle.seeds)

        assert summary.seeds == 100
        assert summary.success, summary.failures

    def test_backdoor_as_counterfactual_independence(self):
        """Y_c ⫫ C holds given the admissible E in models of the wage diagram."""
        from dofusion.core.config import get_config
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.oracle import counterfactual_independent, random_scm
        from dofusion.core.queue import ValidationQueue

        g = get_fixture("wage_premium").graph

        def check(seed):
            return 0.0 if counterfactual_independent(random_scm(g, seed), "C", "Y", ["E"]) else 1.0

        summary = ValidationQueue().run({"independence": check}, get_config().oracle.seeds)

        assert summary.seeds == 100
        assert summary.success, summary.failures


@pytest.mark.slow
class TestGenericGaps:
    """Plausible but wrong estimands miss the query in almost every model."""

    def _gaps(self, label, query, e, g, domains):
        from dofusion.core.config import get_config
        from dofusion.core.queue import ValidationQueue, estimand_check

        return ValidationQueue().run(
            {}, get_config().oracle.seeds, gap_checks={label: estimand_check(query, e, g, domains)}
        )

    @pytest.mark.parametrize("fixture_id", ["instrument", "selection_latent", "transport_blocked"])
    def test_biased_estimand(self, fixture_id):
        """Confounding, selection on the outcome and blocked transport all leave a gap."""
        from dofusion.core.engine import query_from_text
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand

        fixture = get_fixture(fixture_id)
        q = query_from_text(fixture.query, fixture.graph)

        summary = self._gaps(fixture_id, q.term, parse_estimand(fixture.biased), fixture.graph, fixture.domains)

        assert summary.gapped[fixture_id] >= 95
        assert summary.success, summary.failures

    def test_inadmissible_set_is_biased(self, wage_premium):
        """Adjusting for W in the wage diagram gives the wrong answer."""
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.grammar import parse_estimand

        e = parse_estimand("sum_W P(Y|C,W) * P(W)")

        assert self._gaps("W", P("Y", do="C"), e, wage_premium, {TARGET}).success

    def test_transport_needs_the_target_covariate(self, transport_covariate):
        """Reweighting by the source's P(Z) instead of the target's is biased."""
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.grammar import parse_estimand

        e = parse_estimand("sum_Z P^pi(Y|do(X),Z) * P^pi(Z)")

        assert self._gaps("Z", P("Y", do="X"), e, transport_covariate, {TARGET, "pi"}).success


@pytest.mark.slow
class TestFullCatalogue:
    """Derive every golden query and check each step numerically."""

    @pytest.mark.parametrize("fixture_id", GOLDEN_IDS)
    def test_derivation_is_sound(self, fixture_id):
        """The result verifies, and it and every step hold in every model."""
        from dofusion.core.config import get_config
        from dofusion.core.engine import query_from_text, verify
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.queue import ValidationQueue, estimand_check, step_check

        fixture = get_fixture(fixture_id)
        result = _solve(fixture)

        assert result.success, result.reason
        assert verify(result.derivation, fixture.graph)

        q = query_from_text(fixture.query, fixture.graph)
        checks = {"result": estimand_check(q.term, result.estimand, fixture.graph, fixture.domains)}
        for i, step in enumerate(result.derivation.steps, start=1):
            checks[f"step{i:02d}"] = step_check(step.before, step.after, fixture.graph, fixture.domains)

        summary = ValidationQueue(workers=4).run(checks, get_config().oracle.seeds)

        assert summary.seeds == 100
        assert summary.success, summary.failures
