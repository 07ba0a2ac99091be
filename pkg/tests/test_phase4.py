"""
Phase 4 Tests: Certificates

Block and Gibbs drift constants, the two minorization constants, the
density-infimum helpers and the drift conversion.
"""
import pytest
import os
import sys
import math

import numpy as np

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.certificates import (
    block_minorization,
    quadratic_ratio_holds,
    convert_drift,
    derive_block_drift,
    derive_block_drift_balanced,
    derive_gibbs_drift,
    gamma_inf_threshold,
    gibbs_epsilon_by_quadrature,
    gibbs_minorization,
    normal_inf_value,
)
from src.core_model import Hyperparameters
from src.errors import (
    AlphaNotGreaterThanOne,
    AssumptionViolated,
    DomainViolation,
    DriftPreconditionViolated,
    EmptySmallSet,
    NonpositiveRadius,
    NotBalanced,
)


class TestBlockDrift:
    """Tests for the block Gibbs drift certificates."""

    def test_setting2_balanced_b(self, five_groups, settings):
        """Test b for setting 2 at phi = 0.5385, gamma = 0.2596."""
        cert = derive_block_drift_balanced(five_groups, settings[2], 0.5385, 0.2596)
        assert cert.b == pytest.approx(0.872922, rel=1e-5)
        assert cert.delta == pytest.approx(0.125)
        assert cert.delta5 == pytest.approx(0.10)
        assert cert.precondition_slack == pytest.approx(0.2596 - 0.17885, abs=1e-4)
        assert cert.spec.phi2 == pytest.approx(0.1)

    def test_setting1_balanced_b(self, five_groups, settings):
        """Test that m0 = 0 inflates b through the spread term."""
        cert = derive_block_drift_balanced(five_groups, settings[1], 0.9423, 0.2596)
        assert cert.b == pytest.approx(5.436991, rel=1e-5)

    def test_gamma_below_floor(self, five_groups, settings):
        """Test that gamma below phi*delta5 + delta is refused with its slack."""
        with pytest.raises(DriftPreconditionViolated) as exc:
            derive_block_drift_balanced(five_groups, settings[2], 0.5385, 0.15)
        assert exc.value.slack < 0

    def test_balanced_needs_equal_sizes(self, unbalanced, settings):
        """Test that the balanced formula rejects unequal groups."""
        with pytest.raises(NotBalanced):
            derive_block_drift_balanced(unbalanced, settings[2], 0.5, 0.9)

    def test_unbalanced_certificate(self, unbalanced, settings):
        """Test the unbalanced precondition and a positive b."""
        cert = derive_block_drift(unbalanced, settings[2], 0.3, 0.2, 0.9)
        assert cert.b > 0
        assert not cert.balanced
        assert cert.precondition_slack > 0
        with pytest.raises(DriftPreconditionViolated):
            derive_block_drift(unbalanced, settings[2], 3.0, 0.05, 0.9)

    def test_to_dict_carries_constants(self, five_groups, settings):
        """Test that the serialized certificate lists the derived constants."""
        out = derive_block_drift_balanced(five_groups, settings[2], 0.5385, 0.2596).to_dict()
        for key in ("delta1", "delta2", "delta", "c1", "c2", "b", "Delta", "precondition_slack"):
            assert key in out


class TestGibbsDrift:
    """Tests for the Gibbs drift certificate."""

    def test_informative_constants(self, three_groups, informative):
        """Test delta6, delta7, the rho1 limit and b in the informative setting."""
        cert = derive_gibbs_drift(three_groups, informative, 2.6667, 0.41528)
        assert cert.delta1 == pytest.approx(1.0 / 11.0)
        assert cert.delta6 == pytest.approx(39.0 / 199.0)
        assert cert.delta7 == pytest.approx(0.125)
        assert cert.rho1_limit == pytest.approx(0.41525811, abs=1e-7)
        assert cert.rho1 == pytest.approx(0.41527, abs=1e-5)
        assert cert.b == pytest.approx(7.551703, rel=1e-5)
        assert cert.b == pytest.approx(7.55, rel=1e-2)

    def test_small_a1(self, three_groups, informative):
        """Test that a1 <= 3/2 is refused."""
        hyper = Hyperparameters(a1=1.4, b1=20.0, a2=2.0, b2=20.0, m0=0.0, s0=4.0)
        with pytest.raises(AssumptionViolated) as exc:
            derive_gibbs_drift(three_groups, hyper, 2.0, 0.9)
        assert exc.value.inequality == "a1 > 3/2"

    def test_c3_range(self, three_groups, informative):
        """Test that c3 >= min(b1, b2) is refused."""
        with pytest.raises(AssumptionViolated):
            derive_gibbs_drift(three_groups, informative, 20.0, 0.9)

    def test_gamma_range(self, three_groups, informative):
        """Test that gamma at or below rho1 is refused."""
        with pytest.raises(AssumptionViolated):
            derive_gibbs_drift(three_groups, informative, 2.6667, 0.41)

    def test_balance_ratio(self, informative):
        """Test that 5 m' > m'' is required."""
        from src.core_model import dataset_from_summaries
        ds = dataset_from_summaries([2, 2, 10], [0.0, 1.0, 2.0], 4.0)
        with pytest.raises(AssumptionViolated):
            derive_gibbs_drift(ds, informative, 2.0, 0.9)

    def test_legacy_conditions_reported(self, three_groups, informative):
        """Test that the older sufficient conditions are flagged."""
        cert = derive_gibbs_drift(three_groups, informative, 2.6667, 0.41528)
        assert cert.legacy_conditions["a1 >= (3K-2)/(2K-2)"] is True
        assert "legacy_conditions" in cert.to_dict()


class TestGammaInfimum:
    """Tests for the gamma-density crossing point."""

    def test_hand_value(self):
        """Test x* = 2 log 2 for alpha = 2, b = 1, c = 2."""
        assert gamma_inf_threshold(2.0, 1.0, 2.0) == pytest.approx(2.0 * math.log(2.0), rel=1e-14)

    def test_small_c_limit(self):
        """Test that x* tends to alpha / b as c shrinks."""
        assert gamma_inf_threshold(3.0, 1.5, 1e-9) == pytest.approx(2.0, rel=1e-8)

    def test_block_threshold_example(self):
        """Test the lambda_theta split point of the setting 2 certificate."""
        assert gamma_inf_threshold(5.0, 1.0, 3.0079 / 0.5385) == pytest.approx(2.3867, abs=1e-3)

    def test_alpha_must_exceed_one(self):
        """Test that alpha <= 1 is refused."""
        with pytest.raises(AlphaNotGreaterThanOne):
            gamma_inf_threshold(1.0, 1.0, 1.0)

    def test_pointwise_infimum(self):
        """Test that the two-piece form is the minimum over the rate interval."""
        alpha, b, c = 3.3, 0.7, 2.9
        x_star = gamma_inf_threshold(alpha, b, c)
        rates = np.linspace(b, b + c / 2.0, 400)
        for x in np.geomspace(x_star / 10, x_star * 10, 40):
            log_dens = alpha * np.log(rates) - rates * x
            chosen = b if x <= x_star else b + c / 2.0
            assert alpha * np.log(chosen) - chosen * x <= log_dens.min() + 1e-12


class TestBlockMinorization:
    """Tests for the block minorization constant."""

    def test_setting2_epsilon(self, five_groups, settings):
        """Test epsilon at phi = 0.5385, d = 3.0079."""
        mino = block_minorization(five_groups, settings[2], 0.5385, 0.1, 3.0079)
        assert mino.epsilon == pytest.approx(0.0170792, rel=1e-4)
        assert mino.epsilon == pytest.approx(0.0171, rel=0.10)
        assert mino.lambda_theta_star == pytest.approx(2.3867, abs=1e-3)

    def test_setting4_epsilon(self, five_groups, settings):
        """Test epsilon at phi = 0.2965, d = 2.8039 under the most diffuse prior."""
        mino = block_minorization(five_groups, settings[4], 0.2965, 0.1, 2.8039)
        assert mino.epsilon == pytest.approx(8.1e-6, rel=0.25)
        assert mino.epsilon == pytest.approx(8.08321e-6, rel=1e-3)

    def test_setting1_epsilon(self, five_groups, settings):
        """Test epsilon at phi = 0.9423, d = 15.997 with the prior mean at zero."""
        mino = block_minorization(five_groups, settings[1], 0.9423, 0.1, 15.997)
        assert mino.epsilon == pytest.approx(3.1e-7, rel=0.25)

    def test_setting3_epsilon(self, five_groups, settings):
        """Test epsilon at phi = 0.3059, d = 2.8351 under the diffuse prior."""
        mino = block_minorization(five_groups, settings[3], 0.3059, 0.1, 2.8351)
        assert mino.epsilon == pytest.approx(6.8e-4, rel=0.25)

    def test_small_d_limit(self, five_groups, settings):
        """Test that epsilon tends to one as d shrinks."""
        mino = block_minorization(five_groups, settings[2], 0.5, 0.1, 1e-10)
        assert mino.epsilon == pytest.approx(1.0, abs=1e-6)

    def test_decreasing_in_d(self, five_groups, settings):
        """Test that epsilon falls strictly as d grows."""
        values = [block_minorization(five_groups, settings[2], 0.5, 0.1, d).epsilon for d in (0.5, 1, 2, 4, 8, 16)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(0 < v <= 1 for v in values)

    def test_nonpositive_radius(self, five_groups, settings):
        """Test that d <= 0 is refused."""
        with pytest.raises(NonpositiveRadius):
            block_minorization(five_groups, settings[2], 0.5, 0.1, 0.0)

    def test_informative_block_epsilon(self, three_groups, informative):
        """Test epsilon for the three-group data at phi = 0.3589, d = 28.328."""
        mino = block_minorization(three_groups, informative, 0.3589, 0.25, 28.328)
        assert mino.epsilon == pytest.approx(0.0246, rel=0.05)

    def test_minorant_integrates_to_epsilon(self, five_groups, settings):
        """Test that the product of the minorant masses equals epsilon."""
        from src.numerics import quadrature_1d
        mino = block_minorization(five_groups, settings[2], 0.5385, 0.1, 3.0079)
        f1 = lambda x: float(np.exp(mino.log_h1(x)))
        f2 = lambda x: float(np.exp(mino.log_h2(x)))
        i1 = quadrature_1d(f1, 0.0, mino.lambda_theta_star) + quadrature_1d(f1, mino.lambda_theta_star, np.inf)
        i2 = quadrature_1d(f2, 0.0, mino.lambda_e_star) + quadrature_1d(f2, mino.lambda_e_star, np.inf)
        assert i1 * i2 == pytest.approx(mino.epsilon, rel=1e-6)


class TestGibbsMinorization:
    """Tests for the closed-form Gibbs minorization constant."""

    def test_informative_epsilon_tiny_but_finite(self, three_groups, informative):
        """Test that epsilon is positive, finite and evaluated in logs."""
        mino = gibbs_minorization(three_groups, informative, 2.6667, 26.010)
        assert np.isfinite(mino.log_epsilon)
        assert 1e-52 < mino.epsilon < 1e-47
        assert mino.c4 == pytest.approx((11.0 / 24.0) / 26.010)

    def test_closed_form_matches_quadrature(self, three_groups, informative):
        """Test the closed form against the one-dimensional mu integral."""
        for d, tol in ((26.010, 1e-6), (52.0, 1e-5), (104.0, 1e-5)):
            closed = gibbs_minorization(three_groups, informative, 2.6667, d).log_epsilon
            numeric = gibbs_epsilon_by_quadrature(three_groups, informative, 2.6667, d)
            assert abs(math.expm1(numeric - closed)) <= tol

    def test_set_bounds(self, three_groups, informative):
        """Test the mean interval and precision bounds of the small set."""
        mino = gibbs_minorization(three_groups, informative, 2.6667, 26.010)
        half = math.sqrt((0.0 - three_groups.ybar_grand) ** 2 + 26.010)
        assert mino.c_l == pytest.approx(three_groups.ybar_grand - half)
        assert mino.c_u == pytest.approx(three_groups.ybar_grand + half)
        assert mino.upper_precision == pytest.approx(math.log(26.010) / 2.6667)

    def test_empty_small_set(self, three_groups, informative):
        """Test that d log d below the threshold is refused."""
        with pytest.raises(EmptySmallSet):
            gibbs_minorization(three_groups, informative, 2.6667, 1.0)


class TestScalarLemmas:
    """Tests for the normal infimum, the quadratic ratio and the drift conversion."""

    def test_normal_inf_degenerate(self):
        """Test that a = b gives the single density value."""
        value = normal_inf_value(1.0, 1.0, 2.0, 0.3)
        assert value == pytest.approx(math.exp(-0.49 / 4.0) / math.sqrt(4.0 * math.pi))

    def test_normal_inf_far_endpoint(self):
        """Test that x = 3 on [0, 2] picks the mean 0."""
        assert normal_inf_value(0.0, 2.0, 1.0, 3.0) == pytest.approx(0.0044318, abs=1e-7)

    def test_normal_inf_midpoint(self):
        """Test continuity at the midpoint."""
        left = normal_inf_value(0.0, 2.0, 1.0, 1.0 - 1e-12)
        right = normal_inf_value(0.0, 2.0, 1.0, 1.0 + 1e-12)
        assert left == pytest.approx(right, rel=1e-9)

    def test_normal_inf_invalid_interval(self):
        """Test that a > b is refused."""
        with pytest.raises(DomainViolation):
            normal_inf_value(2.0, 1.0, 1.0, 0.0)

    def test_quadratic_ratio_examples(self):
        """Test hand-checked tuples and a hypothesis failure."""
        assert quadratic_ratio_holds(1.0, 1.0, 1.0, 1.0)
        assert quadratic_ratio_holds(4.0, 1.0, 1.0, 1.0)
        assert not quadratic_ratio_holds(6.0, 1.0, 1.0, 1.0)
        assert not quadratic_ratio_holds(1.0, 2.0, 1.0, 1.0)

    def test_quadratic_ratio_random_tuples(self):
        """Test that random tuples inside the hypotheses always satisfy the conclusion."""
        rng = np.random.default_rng(8)
        for _ in range(5000):
            b = float(np.exp(rng.uniform(-3, 3)))
            a = b * rng.uniform(1.0, 5.0)
            x, y = np.exp(rng.uniform(-5, 5, 2))
            assert quadratic_ratio_holds(a, b, float(x), float(y))

    def test_conversion_hand_values(self):
        """Test rho = 0.75, L = 1.5, d_C = 12 for gamma = 0.5, b = 1, a = 1."""
        geo = convert_drift(0.5, 1.0, 1.0)
        assert geo.rho == pytest.approx(0.75)
        assert geo.L == pytest.approx(1.5)
        assert geo.d_C == pytest.approx(12.0)

    def test_conversion_default_a(self):
        """Test that a = 1 gives rho = (1 + gamma) / 2."""
        for gamma in (0.1, 0.5, 0.93):
            assert convert_drift(gamma, 2.0).rho == pytest.approx((1 + gamma) / 2)

    def test_conversion_dominates(self):
        """Test the converted drift inequality on a dense grid of V."""
        for gamma, b, a in ((0.2596, 0.8729, 1.0), (0.9, 20.0, 0.5), (0.05, 0.01, 3.0)):
            geo = convert_drift(gamma, b, a)
            v = np.linspace(0.0, 5.0 * geo.d_C, 20_000)
            assert geo.dominates(v).all()

    def test_conversion_domain(self):
        """Test that gamma outside (0, 1) is refused."""
        with pytest.raises(DomainViolation):
            convert_drift(1.0, 1.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
