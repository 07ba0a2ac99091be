"""
Phase 2 Tests: Core Model

Dataset summaries, prior constants, drift functions, the unnormalized
posterior and the optimal starting values.
"""
import pytest
import os
import sys
import math

import numpy as np

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.core_model import (
    BlockDriftSpec,
    BlockDriftFunction,
    ChainState,
    Dataset,
    GibbsDriftSpec,
    Hyperparameters,
    StateBatch,
    build_dataset,
    dataset_from_summaries,
    eval_block_drift,
    eval_gibbs_drift,
    gibbs_inverse_coefficient,
    log_unnormalized_posterior,
    optimal_start_block,
    optimal_start_gibbs,
    v1_values,
    v2_values,
)
from src.errors import DomainViolation, NonpositivePrecision, TooFewGroups
from src.numerics import log_gamma_density


class TestDataset:
    """Tests for the Dataset summaries."""

    def test_toy_summaries(self, toy):
        """Test hand-computed summaries of the toy data."""
        assert toy.K == 3
        assert toy.M == 6
        assert toy.ybar == (2.0, 3.0, 1.0)
        assert toy.sse == pytest.approx(6.0)
        assert toy.ybar_grand == pytest.approx(2.0)
        assert toy.s2 == pytest.approx(2.0)

    def test_constant_data(self):
        """Test that identical observations give SSE = 0 and s2 = 0."""
        ds = build_dataset([[1.5, 1.5], [1.5, 1.5, 1.5], [1.5, 1.5]])
        assert ds.sse == 0.0
        assert ds.s2 == 0.0
        assert set(ds.ybar) == {1.5}
        assert ds.delta(1.5) == 0.0

    def test_reference_summaries(self, five_groups):
        """Test the five-group summaries loaded directly."""
        assert five_groups.K == 5
        assert five_groups.M == 50
        assert five_groups.balanced
        assert five_groups.ybar_grand == -0.92973
        assert five_groups.sse == 32.990
        assert five_groups.s2 == pytest.approx(0.129984, abs=1e-6)

    def test_grand_mean_weighted_by_counts(self, unbalanced):
        """Test that the default grand mean weights groups by size."""
        expected = (2 * 0.1 + 3 * -0.4 + 5 * 0.9) / 10
        assert unbalanced.ybar_grand == pytest.approx(expected)
        assert not unbalanced.balanced
        assert unbalanced.min_m == 2 and unbalanced.max_m == 5
        assert unbalanced.sum_inv_m == pytest.approx(1 / 2 + 1 / 3 + 1 / 5)

    def test_hull_includes_prior_mean(self, toy):
        """Test the convex hull length of the group means and m0."""
        assert toy.delta(2.0) == pytest.approx(2.0)
        assert toy.delta(-1.0) == pytest.approx(4.0)

    def test_too_few_groups(self):
        """Test that K < 3 is rejected."""
        with pytest.raises(TooFewGroups):
            dataset_from_summaries([4, 4], [0.0, 1.0], 1.0)

    def test_to_dict(self, five_groups):
        """Test that the summary dict carries every reference field."""
        out = five_groups.to_dict()
        for key in ("K", "M", "m", "ybar", "SSE", "ybar_grand", "s2", "balanced"):
            assert key in out


class TestHyperparameters:
    """Tests for prior constants and chain states."""

    def test_nonpositive_rejected(self):
        """Test that a zero shape is rejected."""
        with pytest.raises(DomainViolation):
            Hyperparameters(a1=0.0, b1=1.0, a2=1.0, b2=1.0, m0=0.0, s0=1.0)

    def test_negative_prior_mean_allowed(self):
        """Test that m0 may be negative."""
        hyper = Hyperparameters(a1=1.0, b1=1.0, a2=1.0, b2=1.0, m0=-3.0, s0=1.0)
        assert hyper.to_dict()["m0"] == -3.0

    def test_state_precision_check(self, toy):
        """Test that nonpositive precisions fail validation."""
        state = ChainState(theta=[0.0, 0.0, 0.0], mu=0.0, lambda_theta=0.0, lambda_e=1.0)
        with pytest.raises(NonpositivePrecision):
            state.validate(toy)

    def test_state_shape_check(self, toy):
        """Test that theta must have one entry per group."""
        state = ChainState(theta=[0.0, 0.0], mu=0.0, lambda_theta=1.0, lambda_e=1.0)
        with pytest.raises(DomainViolation):
            state.validate(toy)


class TestDriftFunctions:
    """Tests for V1 and V3."""

    def test_block_drift_zero_at_data(self):
        """Test that V1 vanishes when theta, mu and the means coincide."""
        ds = Dataset(m=(3, 3, 3), ybar=(0.7, 0.7, 0.7), sse=1.0, ybar_grand=0.7)
        state = ChainState(theta=[0.7, 0.7, 0.7], mu=0.7, lambda_theta=1.0, lambda_e=1.0)
        assert eval_block_drift(state, BlockDriftSpec(0.4, 0.2, 0.5), ds) == 0.0

    def test_block_drift_hand_value(self):
        """Test v1 = 2, v2 = 28, V1 = 30 on a hand-checked state."""
        ds = Dataset(m=(2, 2, 2), ybar=(0.0, 0.0, 0.0), sse=1.0, ybar_grand=0.0)
        theta = np.array([1.0, 2.0, 3.0])
        assert float(v1_values(theta, 2.0)) == pytest.approx(2.0)
        assert float(v2_values(theta, ds)) == pytest.approx(28.0)
        state = ChainState(theta=theta, mu=2.0, lambda_theta=1.0, lambda_e=1.0)
        assert eval_block_drift(state, BlockDriftSpec(1.0, 1.0, 0.5), ds) == pytest.approx(30.0)

    def test_block_drift_vectorized_matches_scalar(self, unbalanced):
        """Test that the batch path agrees with single-state evaluation."""
        rng = np.random.default_rng(3)
        spec = BlockDriftSpec(0.6, 0.3, 0.8)
        batch = StateBatch(
            theta=rng.standard_normal((7, 3)), mu=rng.standard_normal(7),
            lambda_theta=np.ones(7), lambda_e=np.ones(7),
        )
        drift = BlockDriftFunction(spec, unbalanced)
        values = drift.values(batch)
        for i in range(len(batch)):
            assert values[i] == pytest.approx(drift(batch.state(i)), rel=1e-14)

    def test_gibbs_drift_hand_value(self):
        """Test 2e + 1 with c3 = 1, unit precisions, unit inverse coefficient and theta-bar = ybar."""
        ds = Dataset(m=(2, 2, 2), ybar=(0.5, 1.0, 1.5), sse=1.0, ybar_grand=1.0)
        hyper = Hyperparameters(a1=1.75, b1=2.0, a2=1.0, b2=2.0, m0=0.0, s0=1.0)
        assert gibbs_inverse_coefficient(hyper, ds.K) == pytest.approx(1.0)
        state = ChainState(theta=[0.0, 1.0, 2.0], mu=5.0, lambda_theta=1.0, lambda_e=1.0)
        value = eval_gibbs_drift(state, GibbsDriftSpec(c3=1.0, gamma=0.9), hyper, ds)
        assert value == pytest.approx(2.0 * math.e + 1.0, rel=1e-12)

    def test_gibbs_inverse_coefficient_informative(self, informative):
        """Test delta7/(K delta1) = 11/24 for a1 = 5 and K = 3."""
        assert gibbs_inverse_coefficient(informative, 3) == pytest.approx(11.0 / 24.0)

    def test_gibbs_drift_needs_positive_lambda(self, three_groups, informative):
        """Test that lambda_theta <= 0 is rejected."""
        state = ChainState(theta=[0.0, 0.0, 0.0], mu=0.0, lambda_theta=0.0, lambda_e=1.0)
        with pytest.raises(NonpositivePrecision):
            eval_gibbs_drift(state, GibbsDriftSpec(c3=1.0, gamma=0.9), informative, three_groups)


class TestPosterior:
    """Tests for the unnormalized log posterior."""

    def test_full_conditional_consistency(self, five_groups, settings):
        """Test that a lambda_theta change matches the gamma full conditional ratio."""
        hyper = settings[2]
        theta = np.array(five_groups.ybar) + 0.1
        a = ChainState(theta=theta, mu=-0.8, lambda_theta=0.7, lambda_e=2.0)
        b = ChainState(theta=theta, mu=-0.8, lambda_theta=1.9, lambda_e=2.0)
        shape = five_groups.K / 2.0 + hyper.a1
        rate = float(v1_values(theta, -0.8)) / 2.0 + hyper.b1
        expected = log_gamma_density(shape, rate, 1.9) - log_gamma_density(shape, rate, 0.7)
        diff = log_unnormalized_posterior(b, five_groups, hyper) - log_unnormalized_posterior(a, five_groups, hyper)
        assert diff == pytest.approx(expected, rel=1e-10)

    def test_support_violation(self, toy, settings):
        """Test that lambda_theta <= 0 is outside the support."""
        state = ChainState(theta=[2.0, 3.0, 1.0], mu=2.0, lambda_theta=-1.0, lambda_e=1.0)
        with pytest.raises(NonpositivePrecision):
            log_unnormalized_posterior(state, toy, settings[2])


class TestOptimalStarts:
    """Tests for the starting values that minimize the drift functions."""

    def test_constant_means(self):
        """Test that equal group means give theta-hat = mu-hat = that mean."""
        ds = Dataset(m=(2, 4, 3), ybar=(1.2, 1.2, 1.2), sse=1.0, ybar_grand=1.2)
        theta_hat, mu_hat = optimal_start_block(BlockDriftSpec(0.5, 0.3, 0.9), ds)
        assert np.allclose(theta_hat, 1.2)
        assert mu_hat == pytest.approx(1.2)

    def test_balanced_start_value(self):
        """Test V1 at the balanced start equals phi/(1+phi) times the spread of the means."""
        ds = build_dataset([[0.1, 0.5], [1.0, 2.2], [-0.3, 0.1], [0.8, 0.9]])
        phi = 0.5385
        spec = BlockDriftSpec(phi, 1.0 / 2, 0.5)
        theta_hat, mu_hat = optimal_start_block(spec, ds)
        center = float(np.mean(ds.ybar))
        assert theta_hat == pytest.approx((phi * center + np.array(ds.ybar)) / (1 + phi))
        state = ChainState(theta=theta_hat, mu=mu_hat, lambda_theta=1.0, lambda_e=1.0)
        assert eval_block_drift(state, spec, ds) == pytest.approx(phi / (1 + phi) * ds.s2, rel=1e-12)

    def test_unbalanced_start_is_stationary(self, unbalanced):
        """Test that the finite-difference gradient of V1 vanishes at the start."""
        spec = BlockDriftSpec(0.7, 0.2, 0.9)
        theta_hat, mu_hat = optimal_start_block(spec, unbalanced)
        point = np.append(theta_hat, mu_hat)

        def V(p):
            return float(0.7 * v1_values(p[:-1], p[-1]) + 0.2 * v2_values(p[:-1], unbalanced))

        h = 1e-5
        grad = []
        for j in range(point.size):
            step = np.zeros_like(point)
            step[j] = h
            grad.append((V(point + step) - V(point - step)) / (2 * h))
        assert max(abs(g) for g in grad) < 1e-6 * (1.0 + V(point))

    def test_gibbs_start_informative(self, three_groups, informative):
        """Test lambda_theta near 0.2839 and the first-order condition."""
        spec = GibbsDriftSpec(c3=2.6667, gamma=0.41528)
        state = optimal_start_gibbs(spec, three_groups, informative)
        assert state.lambda_theta == pytest.approx(0.2839, abs=1e-3)
        q = gibbs_inverse_coefficient(informative, three_groups.K)
        lhs = 2.6667 * math.exp(2.6667 * state.lambda_theta)
        rhs = q / state.lambda_theta ** 2
        assert lhs == pytest.approx(rhs, rel=1e-5)
        assert state.lambda_e == 1e-6
        assert float(np.mean(state.theta)) == three_groups.ybar_grand

    def test_gibbs_start_value(self, three_groups, informative):
        """Test V3 at the start against the three surviving terms."""
        spec = GibbsDriftSpec(c3=2.6667, gamma=0.41528)
        state = optimal_start_gibbs(spec, three_groups, informative)
        lt = state.lambda_theta
        expected = math.exp(2.6667 * lt) + math.exp(2.6667e-6) + (11.0 / 24.0) / lt
        assert eval_gibbs_drift(state, spec, informative, three_groups) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(4.746454, rel=1e-4)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
