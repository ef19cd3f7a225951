"""Unit tests for dofusion.core.engine module."""

from dataclasses import replace
from unittest.mock import patch

import pytest


def _small_budget():
    from dofusion.core.engine import SearchBudget

    return SearchBudget(max_steps=4, max_states=2000)


class TestSearchBudget:
    """Tests for SearchBudget."""

    def test_from_config_defaults(self):
        """Defaults come from the search section."""
        from dofusion.core.engine import SearchBudget

        budget = SearchBudget.from_config()

        assert budget.max_steps == 12
        assert budget.max_states == 200_000

    def test_overrides(self, default_config):
        """Explicit values win; None keeps the configured one."""
        from dofusion.core.engine import SearchBudget

        default_config.search.max_term_width = 6
        budget = SearchBudget.from_config(max_steps=5, max_states=None)

        assert budget.max_steps == 5
        assert budget.max_term_width == 6
        assert budget.max_states == 200_000

    def test_rejects_nonpositive(self):
        """Every limit must be positive."""
        from dofusion.core.engine import SearchBudget

        with pytest.raises(ValueError, match="max_steps"):
            SearchBudget(max_steps=0)


class TestCatalogs:
    """Tests for the catalogue helpers."""

    def test_surrogate(self):
        """Experiments on Z come with observational data."""
        from dofusion.core.engine import surrogate_catalog
        from dofusion.core.estimand import Source

        cat = surrogate_catalog({"Z"})

        assert cat.sources == (Source(), Source(intervened=frozenset({"Z"})))
        assert surrogate_catalog(()).sources == (Source(),)

    def test_selection(self):
        """Selected data plus unbiased marginals."""
        from dofusion.core.engine import selection_catalog

        cat = selection_catalog([{"W", "Z"}])

        assert cat.has_selected
        assert cat.sources[1].measured == {"W", "Z"}

    def test_transport_adds_target(self):
        """The target's observational distribution is always available."""
        from dofusion.core.engine import with_target_observational
        from dofusion.core.estimand import TARGET, Source, SourceCatalog

        cat = with_target_observational(SourceCatalog.of(Source(domain="pi")))

        assert cat.domains == {"pi", TARGET}


class TestIdentify:
    """Tests for identify."""

    def test_backdoor_shortcut(self, confounder):
        """The confounded pair is solved by adjustment."""
        from dofusion.core.engine import DeriveStatus, identify, query_from_text
        from dofusion.core.grammar import parse_estimand

        result = identify(query_from_text("P(Y|do(X))", confounder))

        assert result.status is DeriveStatus.DERIVED
        assert result.success
        assert result.path == "backdoor"
        assert result.estimand == parse_estimand("sum_Z P(Y|X,Z) * P(Z)")

    def test_search_when_shortcuts_fail(self, confounder):
        """Without the shortcuts the search still finds an estimable expression."""
        from dofusion.core.engine import identify, observational, query_from_text, verify
        from dofusion.core.estimand import estimable

        with patch("dofusion.core.engine.shortcut_steps", return_value=None):
            result = identify(query_from_text("P(Y|do(X))", confounder))

        assert result.success
        assert result.path == "search"
        assert result.states_explored > 0
        assert estimable(result.estimand, observational())
        assert verify(result.derivation, confounder)

    def test_instrument_not_derived(self, instrument):
        """An instrument alone does not identify the effect."""
        from dofusion.core.engine import DeriveStatus, identify, query_from_text

        result = identify(query_from_text("P(Y|do(X))", instrument), budget=_small_budget())

        assert result.status is DeriveStatus.NOT_DERIVED
        assert result.estimand is None
        assert "within 4 steps" in result.reason

    def test_already_estimable(self, confounder):
        """A do-free query needs no steps."""
        from dofusion.core.engine import derive, observational, query_from_text

        result = derive(query_from_text("P(Y|X)", confounder), observational())

        assert result.success
        assert result.derivation.steps == []

    def test_catalog_outside_graph(self, confounder):
        """Sources must name vertices of the graph."""
        from dofusion.core.engine import derive, query_from_text
        from dofusion.core.estimand import InvalidQuery, Source, SourceCatalog

        cat = SourceCatalog.of(Source(intervened=frozenset({"Q"})))

        with pytest.raises(InvalidQuery):
            derive(query_from_text("P(Y|do(X))", confounder), cat)


class TestRecover:
    """Tests for recover."""

    def test_s_backdoor_shortcut(self, selection_treatment):
        """Selection on the treatment is recoverable from selected data."""
        from dofusion.core.engine import query_from_text, recover
        from dofusion.core.grammar import parse_estimand

        result = recover(query_from_text("P(Y|do(X))", selection_treatment))

        assert result.path == "s-backdoor"
        assert result.estimand == parse_estimand("P(Y|X,S=1)")

    def test_provably_not(self):
        """Y shares a latent cause with S, so P(Y|X) cannot be recovered."""
        from dofusion.core.engine import DeriveStatus, query_from_text, recover
        from dofusion.core.fixtures import get_fixture

        g = get_fixture("selection_latent").graph
        result = recover(query_from_text("P(Y|X)", g))

        assert result.status is DeriveStatus.PROVABLY_NOT
        assert result.path == "selection-iff"
        assert "not separated" in result.reason

    def test_unbiased_data_lifts_the_verdict(self):
        """With unbiased data the negative shortcut does not apply."""
        from dofusion.core.engine import DeriveStatus, query_from_text, recover, selection_catalog
        from dofusion.core.fixtures import get_fixture

        g = get_fixture("selection_latent").graph
        cat = selection_catalog([{"X", "Y"}])
        result = recover(query_from_text("P(Y|X)", g), cat, budget=_small_budget())

        assert result.status is DeriveStatus.DERIVED
        assert result.derivation.steps == []


class TestTransport:
    """Tests for transport."""

    def test_s_admissible_shortcut(self, transport_covariate):
        """The source experiment is reweighted by P*(Z)."""
        from dofusion.core.engine import query_from_text, transport
        from dofusion.core.estimand import Source, SourceCatalog
        from dofusion.core.grammar import parse_estimand

        cat = SourceCatalog.of(Source(domain="pi", intervened=frozenset({"X"})))
        result = transport(query_from_text("P(Y|do(X))", transport_covariate), cat)

        assert result.path == "s-admissible"
        assert result.estimand == parse_estimand("sum_Z P^pi(Y|do(X),Z) * P(Z)")

    def test_randomized_condition_becomes_action(self):
        """Z observed in a source that randomized Z is promoted by Rule 2."""
        from dofusion.core.engine import _randomize_conditions, with_target_observational
        from dofusion.core.estimand import canonicalize
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand
        from dofusion.core.rules import RuleName

        fixture = get_fixture("transport_two_sources")
        cat = with_target_observational(fixture.catalog)
        found = canonicalize(parse_estimand("sum_Z P^b(Y|do(X),Z) * P^a(Z|do(X))"))

        steps, final = _randomize_conditions(fixture.graph, [], found, cat)

        assert [s.rule for s in steps] == [RuleName.RULE2]
        assert steps[0].premise.holds(fixture.graph)
        assert final == canonicalize(parse_estimand(fixture.expected))

    def test_unrandomized_condition_stays(self, transport_covariate):
        """Covariates the source did not randomize are left as observations."""
        from dofusion.core.engine import _randomize_conditions
        from dofusion.core.estimand import TARGET, Source, SourceCatalog, canonicalize
        from dofusion.core.grammar import parse_estimand

        cat = SourceCatalog.of(Source(domain=TARGET), Source(domain="pi", intervened=frozenset({"X"})))
        e = canonicalize(parse_estimand("sum_Z P^pi(Y|do(X),Z) * P(Z)"))

        assert _randomize_conditions(transport_covariate, [], e, cat) == ([], e)

    def test_two_sources_name_both_actions(self):
        """The search result reads Y off the experiment on X and Z."""
        from dofusion.core.engine import query_from_text, transport, verify
        from dofusion.core.estimand import canonicalize
        from dofusion.core.fixtures import get_fixture
        from dofusion.core.grammar import parse_estimand

        fixture = get_fixture("transport_two_sources")
        result = transport(query_from_text(fixture.query, fixture.graph), fixture.catalog)

        assert result.success
        assert result.estimand == canonicalize(parse_estimand(fixture.expected))
        assert verify(result.derivation, fixture.graph)


class TestVerify:
    """Tests for verify."""

    def _derivation(self, g):
        from dofusion.core.engine import identify, query_from_text

        return identify(query_from_text("P(Y|do(X))", g)).derivation

    def test_accepts_engine_output(self, confounder):
        """A fresh derivation replays cleanly."""
        from dofusion.core.engine import verify

        report = verify(self._derivation(confounder), confounder)

        assert report.ok
        assert report.failed_step is None

    def test_rejects_altered_premise(self, confounder):
        """A stored premise that differs from the replayed one fails its step."""
        from dofusion.core.engine import verify
        from dofusion.core.rules import Premise

        d = self._derivation(confounder)
        d.steps[1] = replace(d.steps[1], premise=Premise(frozenset({"X"}), frozenset({"Y"}), frozenset()))
        report = verify(d, confounder)

        assert not report.ok
        assert report.failed_step == 1
        assert "differs" in report.reason

    def test_rejects_other_graph(self, confounder):
        """Adding a latent confounder breaks the demotion of do(X)."""
        from dofusion.core.engine import verify
        from dofusion.core.graph import validate

        d = self._derivation(confounder)
        confounded = validate(confounder.vertices, confounder.directed, [("X", "Y")])
        report = verify(d, confounded)

        assert not report.ok
        assert report.failed_step == 1
        assert "premise fails" in report.reason

    def test_rejects_wrong_final(self, confounder):
        """The final estimand must be where the replay ends."""
        from dofusion.core.engine import verify
        from dofusion.core.estimand import P

        d = self._derivation(confounder)
        d.final = P("Y", given="X")
        report = verify(d, confounder)

        assert not report.ok
        assert report.failed_step == len(d.steps)


class TestSerialization:
    """Tests for derivation JSON files."""

    def test_save_and_load(self, confounder, tmp_path):
        """A saved derivation loads and still verifies."""
        from dofusion.core.engine import identify, load_derivation, query_from_text, save_derivation, verify

        d = identify(query_from_text("P(Y|do(X))", confounder)).derivation
        path = save_derivation(d, tmp_path / "d.json")
        loaded = load_derivation(path, confounder)

        assert loaded.path == "backdoor"
        assert [s.move for s in loaded.steps] == [s.move for s in d.steps]
        assert verify(loaded, confounder)

    def test_json_shape(self, confounder):
        """Steps carry the rule, focus, arguments and premise."""
        from dofusion.core.engine import derivation_to_json, identify, query_from_text

        data = derivation_to_json(identify(query_from_text("P(Y|do(X))", confounder)).derivation)

        assert data["query"] == "P(Y|do(X))"
        assert data["final"] == "sum_{Z} P(Y|X,Z) * P(Z)"
        assert data["steps"][0]["rule"] == "Condition"
        assert data["steps"][0]["premise"] is None
        assert data["steps"][1]["args"] == {"action": "demote", "vars": ["X"]}
        assert data["steps"][1]["premise"]["mutilation"]["cut_outgoing"] == ["X"]

    def test_missing_file(self, confounder, tmp_path):
        """Loading a missing file raises DerivationFormatError."""
        from dofusion.core.engine import DerivationFormatError, load_derivation

        with pytest.raises(DerivationFormatError, match="not found"):
            load_derivation(tmp_path / "missing.json", confounder)

    def test_malformed_step(self, confounder):
        """Unknown rule names are format errors."""
        from dofusion.core.engine import DerivationFormatError, derivation_from_json

        data = {
            "query": "P(Y|do(X))",
            "steps": [{"rule": "Rule9", "focus": [0], "before": "P(Y|do(X))", "after": "P(Y)"}],
            "final": "P(Y)",
        }

        with pytest.raises(DerivationFormatError):
            derivation_from_json(data, confounder)
