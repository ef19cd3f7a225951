"""Unit tests for dofusion.core.oracle module."""

import numpy as np
import pytest


@pytest.fixture
def example():
    """The three-equation model with binary noise."""
    from dofusion.core.fixtures import structural_example

    return structural_example()


class TestDist:
    """Tests for Dist and divide."""

    def test_marginal_and_conditional(self):
        """Conditionals normalize within each slice."""
        from dofusion.core.oracle import Dist

        d = Dist(("A", "B"), np.array([[0.1, 0.3], [0.2, 0.4]]))

        assert np.allclose(d.marginal(["B"]).table, [0.3, 0.7])
        assert np.allclose(d.conditional(["A"], ["B"]).table, [[1 / 3, 3 / 7], [2 / 3, 4 / 7]])

    def test_marginal_order(self):
        """Variables come back in the order asked for."""
        from dofusion.core.oracle import Dist

        d = Dist(("A", "B"), np.array([[0.1, 0.3], [0.2, 0.4]]))

        assert d.marginal(["B", "A"]).variables == ("B", "A")
        assert d.marginal(["B", "A"]).table[1, 0] == pytest.approx(0.3)

    def test_zero_over_zero(self):
        """0/0 is taken as 0."""
        from dofusion.core.oracle import Dist, divide

        out = divide(Dist(("A",), np.array([0.0, 0.5])), Dist(("A",), np.array([0.0, 1.0])))

        assert np.allclose(out.table, [0.0, 0.5])

    def test_positive_over_zero(self):
        """Positive mass over zero raises."""
        from dofusion.core.oracle import Dist, ZeroDenominator, divide

        with pytest.raises(ZeroDenominator):
            divide(Dist(("A",), np.array([0.1, 0.5])), Dist(("A",), np.array([0.0, 1.0])))

    def test_product_broadcasts(self):
        """Products align variables by name."""
        from dofusion.core.oracle import Dist

        a = Dist(("A",), np.array([0.5, 0.5]))
        b = Dist(("B",), np.array([0.2, 0.8]))

        assert (a * b).variables == ("A", "B")
        assert (a * b).total() == pytest.approx(1.0)

    def test_fix_out_of_domain(self):
        """Slicing outside the domain raises ValueOutOfDomain."""
        from dofusion.core.oracle import Dist, ValueOutOfDomain

        with pytest.raises(ValueOutOfDomain):
            Dist(("A",), np.array([0.5, 0.5])).fix({"A": 2})

    def test_repeated_variable(self):
        """A variable names one axis."""
        from dofusion.core.oracle import Dist, OracleError

        with pytest.raises(OracleError):
            Dist(("A", "A"), np.zeros((2, 2)))


class TestStructuralExample:
    """Tests on the hand-built three-equation model."""

    def test_joint_is_distribution(self, example):
        """The joint sums to one and P(Z=1) is the noise probability."""
        from dofusion.core.oracle import joint

        d = joint(example)

        assert d.total() == pytest.approx(1.0)
        assert d.marginal(["Z"]).table[1] == pytest.approx(0.4)

    def test_average_causal_effect(self, example):
        """E[Y|do(1)] - E[Y|do(0)] = 0.52 - 0.2."""
        from dofusion.core.oracle import average_causal_effect, post_intervention_dist

        d = post_intervention_dist(example, ["X"])

        assert average_causal_effect(d, "X", "Y", 0, 1) == pytest.approx(0.32)

    def test_truncated_factorization_matches_surgery(self, example):
        """Dropping X's factor equals intervening value by value."""
        from dofusion.core.oracle import max_abs_difference, post_intervention_dist, truncated_factorization

        a = truncated_factorization(example, ["X"])
        b = post_intervention_dist(example, ["X"])

        assert a.variables == b.variables
        assert max_abs_difference(a, b) < 1e-12

    def test_counterfactual_independence(self, example):
        """Y_x ⫫ X holds given Z but not marginally."""
        from dofusion.core.oracle import counterfactual_independent

        assert counterfactual_independent(example, "X", "Y", ["Z"])
        assert not counterfactual_independent(example, "X", "Y")

    def test_counterfactual_joint_names(self, example):
        """Potential outcomes are named Y_x."""
        from dofusion.core.oracle import counterfactual_joint

        d = counterfactual_joint(example, "X", [0, 1], "Y", ["Z"])

        assert d.variables == ("Y_0", "Y_1", "X", "Z")
        assert d.total() == pytest.approx(1.0)

    def test_intervene_checks(self, example):
        """Unknown vertices and values outside the domain are rejected."""
        from dofusion.core.graph import UnknownVertex
        from dofusion.core.oracle import ValueOutOfDomain, intervene

        with pytest.raises(UnknownVertex):
            intervene(example, {"Q": 0})
        with pytest.raises(ValueOutOfDomain):
            intervene(example, {"X": 2})

    def test_too_large(self, example):
        """The table limit guards exact enumeration."""
        from dofusion.core.oracle import TooLarge, joint

        with pytest.raises(TooLarge):
            joint(example, max_table=4)

    def test_sample_converges(self, example):
        """Empirical frequencies approach the exact joint."""
        from dofusion.core.oracle import joint, max_abs_difference, sample

        assert max_abs_difference(sample(example, 20_000, seed=0), joint(example)) < 0.02


class TestRandomScm:
    """Tests for random_scm and its variants."""

    def test_deterministic(self, confounder):
        """The same seed gives the same model."""
        from dofusion.core.oracle import random_scm

        assert random_scm(confounder, 3).same_as(random_scm(confounder, 3))
        assert not random_scm(confounder, 3).same_as(random_scm(confounder, 4))

    def test_shared_blocks(self, wage_premium):
        """Each bidirected edge gets one shared exogenous block."""
        from dofusion.core.oracle import random_scm

        m = random_scm(wage_premium, 0)

        assert "U_C_E" in m.latents["C"]
        assert "U_C_E" in m.latents["E"]
        assert "U_W_Y" in m.exogenous

    def test_rows_reach_every_value(self, wage_premium):
        """Each mechanism row maps the own exogenous values onto the whole domain."""
        from dofusion.core.oracle import joint, random_scm

        m = random_scm(wage_premium, 7)

        for v in m.order:
            table = np.moveaxis(m.mechanisms[v], len(m.parents[v]), -1)
            rows = table.reshape(-1, table.shape[-1])
            assert all(set(row) == set(range(m.sizes[v])) for row in rows.tolist())
        assert np.all(joint(m).table > 0)

    def test_domain_size_limit(self, confounder):
        """Exogenous blocks must reach every value."""
        from dofusion.core.oracle import OracleError, random_scm

        with pytest.raises(OracleError):
            random_scm(confounder, 0, domain_size=5, exogenous_size=4)

    def test_selection_view(self, selection_treatment):
        """Conditioning on S=1 drops S and renormalizes."""
        from dofusion.core.oracle import joint, random_scm, selection_view

        d = selection_view(joint(random_scm(selection_treatment, 0)))

        assert "S" not in d.variables
        assert d.total() == pytest.approx(1.0)

    def test_zero_selection_mass(self):
        """S=1 with probability zero cannot be conditioned on."""
        from dofusion.core.oracle import Dist, ZeroSelectionMass, selection_view

        with pytest.raises(ZeroSelectionMass):
            selection_view(Dist(("X", "S"), np.array([[0.5, 0.0], [0.5, 0.0]])))

    def test_model_family(self, transport_covariate):
        """A source differs from the target at the children of its discrepancy vertex."""
        from dofusion.core.estimand import TARGET
        from dofusion.core.oracle import model_family, random_scm

        m = random_scm(transport_covariate, 0)
        family = model_family(transport_covariate, m, {TARGET, "pi"}, 0)
        source = family["pi"]

        assert family[TARGET] is m
        assert np.array_equal(source.mechanisms["X"], m.mechanisms["X"])
        assert np.array_equal(source.mechanisms["Y"], m.mechanisms["Y"])
        assert not np.array_equal(source.exogenous["U_Z"], m.exogenous["U_Z"])

    def test_json_round_trip(self, wage_premium, tmp_path):
        """Saved models load bit for bit."""
        from dofusion.core.oracle import load_scm, random_scm, save_scm

        m = random_scm(wage_premium, 7)

        assert load_scm(save_scm(m, tmp_path / "m.json")).same_as(m)

    def test_malformed_json(self):
        """Missing fields raise OracleError."""
        from dofusion.core.oracle import OracleError, scm_from_json

        with pytest.raises(OracleError):
            scm_from_json({"order": ["X"]})


class TestEvaluate:
    """Tests for evaluate and estimand_error."""

    def test_adjustment_is_exact(self, confounder):
        """The adjustment formula equals the interventional distribution."""
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.grammar import parse_estimand
        from dofusion.core.oracle import estimand_error

        e = parse_estimand("sum_Z P(Y|X,Z) * P(Z)")

        for seed in range(5):
            assert estimand_error(P("Y", do="X"), e, confounder, {TARGET}, seed) < 1e-9

    def test_naive_conditional_is_biased(self, confounder):
        """P(Y|X) differs from P(Y|do(X)) in generic models."""
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.oracle import estimand_error

        gaps = [estimand_error(P("Y", do="X"), P("Y", given="X"), confounder, {TARGET}, s) for s in range(5)]

        assert max(gaps) > 1e-6

    def test_catalog_check(self, confounder):
        """Terms the catalogue does not supply are refused."""
        from dofusion.core.engine import observational
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.oracle import NotEstimable, evaluate, random_scm

        m = random_scm(confounder, 0)

        with pytest.raises(NotEstimable):
            evaluate(P("Y", do="X"), {TARGET: m}, observational())

    def test_missing_domain(self, confounder):
        """A term from a domain without a model is refused."""
        from dofusion.core.estimand import TARGET, P
        from dofusion.core.oracle import NotEstimable, evaluate, random_scm

        with pytest.raises(NotEstimable, match="pi"):
            evaluate(P("Y", domain="pi"), {TARGET: random_scm(confounder, 0)})
