"""
Phase 3 Tests: Samplers

Closed-form moments of the (theta, mu) block, the two kernels, chain
running, trace export and one-step Monte Carlo expectations.
"""
import pytest
import os
import sys

import numpy as np
from scipy import stats

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.config import SamplerKind
from src.core_model import ChainState, Dataset, Hyperparameters, v1_values
from src.errors import DomainViolation, NonpositivePrecision
from src.samplers import (
    RngStream,
    block_gibbs_step,
    gibbs_step,
    mc_one_step_expectation,
    one_step_batch,
    posterior_normal_params,
    run_chain,
    sample_xi_given_lambda,
    trace_to_dataframe,
)


def _start(dataset):
    return ChainState(theta=np.array(dataset.ybar), mu=dataset.ybar_grand, lambda_theta=1.0, lambda_e=1.0)


class TestPosteriorNormalParams:
    """Tests for the closed-form (theta, mu) moments."""

    def test_hand_values(self):
        """Test t = 1.5 and Var(mu) = 0.4 for three singleton groups with unit precisions."""
        ds = Dataset(m=(1, 1, 1), ybar=(0.0, 0.0, 0.0), sse=0.0, ybar_grand=0.0)
        hyper = Hyperparameters(a1=1.0, b1=1.0, a2=1.0, b2=1.0, m0=0.0, s0=1.0)
        params = posterior_normal_params(1.0, 1.0, ds, hyper)
        assert params.t == pytest.approx(1.5)
        assert params.var_mu == pytest.approx(0.4)

    def test_common_value(self):
        """Test that equal means and prior mean give equal posterior means."""
        ds = Dataset(m=(2, 5, 3), ybar=(0.8, 0.8, 0.8), sse=1.0, ybar_grand=0.8)
        hyper = Hyperparameters(a1=1.0, b1=1.0, a2=1.0, b2=1.0, m0=0.8, s0=2.0)
        params = posterior_normal_params(0.6, 3.0, ds, hyper)
        assert params.mean_mu == pytest.approx(0.8)
        assert np.allclose(params.mean_theta, 0.8)

    def test_covariance_structure(self, unbalanced, settings):
        """Test the theta-mu covariance and the symmetric theta pair matrix."""
        params = posterior_normal_params(0.9, 1.4, unbalanced, settings[2])
        m = np.array(unbalanced.m, dtype=float)
        expected = 0.9 / ((0.9 + m * 1.4) * (settings[2].s0 + params.t))
        assert params.cov_theta_mu == pytest.approx(expected)
        assert np.allclose(params.cov_theta_pairs, params.cov_theta_pairs.T)
        assert np.allclose(np.diag(params.cov_theta_pairs), params.var_theta)

    def test_nonpositive_precision(self, toy, settings):
        """Test that a zero precision is rejected."""
        with pytest.raises(NonpositivePrecision):
            posterior_normal_params(0.0, 1.0, toy, settings[2])


class TestKernels:
    """Tests for the block Gibbs and Gibbs transitions."""

    def test_block_step_deterministic(self, five_groups, settings):
        """Test that the same seed gives bit-identical steps."""
        a = block_gibbs_step(_start(five_groups), five_groups, settings[2], RngStream(5))
        b = block_gibbs_step(_start(five_groups), five_groups, settings[2], RngStream(5))
        assert np.array_equal(a.theta, b.theta)
        assert (a.mu, a.lambda_theta, a.lambda_e) == (b.mu, b.lambda_theta, b.lambda_e)

    def test_gibbs_step_deterministic(self, five_groups, settings):
        """Test fixed-seed determinism of the Gibbs step."""
        a = gibbs_step(_start(five_groups), five_groups, settings[2], RngStream(9))
        b = gibbs_step(_start(five_groups), five_groups, settings[2], RngStream(9))
        assert np.array_equal(a.theta, b.theta)
        assert a.mu == b.mu

    def test_steps_keep_precisions_positive(self, five_groups, settings):
        """Test that both kernels produce positive precisions."""
        rng = RngStream(1)
        state = _start(five_groups)
        for _ in range(20):
            state = block_gibbs_step(state, five_groups, settings[4], rng)
            assert state.lambda_theta > 0 and state.lambda_e > 0
            state = gibbs_step(state, five_groups, settings[4], rng)
            assert state.lambda_theta > 0 and state.lambda_e > 0

    def test_block_lambda_theta_law(self, five_groups, settings):
        """Test that block lambda_theta draws follow Gamma(K/2 + a1, v1/2 + b1)."""
        hyper = settings[2]
        x = ChainState(theta=np.array(five_groups.ybar) + 0.2, mu=-0.6, lambda_theta=1.0, lambda_e=1.0)
        batch = one_step_batch(x, SamplerKind.BLOCK, 100_000, RngStream(17), five_groups, hyper)
        shape = five_groups.K / 2.0 + hyper.a1
        rate = float(v1_values(x.theta, x.mu)) / 2.0 + hyper.b1
        result = stats.kstest(batch.lambda_theta, stats.gamma(a=shape, scale=1.0 / rate).cdf)
        assert result.pvalue > 1e-3

    def test_gibbs_mu_law(self, five_groups, settings):
        """Test that the Gibbs mu update is normal with the full-conditional moments."""
        hyper = settings[2]
        x = ChainState(theta=np.array(five_groups.ybar) - 0.3, mu=0.0, lambda_theta=1.3, lambda_e=2.0)
        batch = one_step_batch(x, SamplerKind.GIBBS, 100_000, RngStream(23), five_groups, hyper)
        precision = hyper.s0 + five_groups.K * 1.3
        mean = (hyper.s0 * hyper.m0 + five_groups.K * 1.3 * float(np.mean(x.theta))) / precision
        result = stats.kstest(batch.mu, stats.norm(loc=mean, scale=1.0 / np.sqrt(precision)).cdf)
        assert result.pvalue > 1e-3

    def test_xi_stage_covariance(self, five_groups, settings):
        """Test the sample Cov(theta_1, mu) against the closed form within 4 standard errors."""
        hyper = settings[2]
        n = 200_000
        theta, mu = sample_xi_given_lambda(0.8, 1.5, five_groups, hyper, RngStream(31), n)
        params = posterior_normal_params(0.8, 1.5, five_groups, hyper)
        sample = float(np.cov(theta[:, 0], mu)[0, 1])
        se = np.sqrt((params.var_theta[0] * params.var_mu + params.cov_theta_mu[0] ** 2) / n)
        assert abs(sample - params.cov_theta_mu[0]) <= 4 * se


class TestChains:
    """Tests for run_chain and trace export."""

    def test_zero_iterations(self, five_groups, settings):
        """Test that n = 0 returns the start alone."""
        start = _start(five_groups)
        trace = run_chain(SamplerKind.BLOCK, start, 0, 3, five_groups, settings[2])
        assert len(trace) == 1
        assert np.array_equal(trace[0].theta, start.theta)

    def test_same_seed_same_trace(self, five_groups, settings):
        """Test that identical seeds give identical traces."""
        a = run_chain("gibbs", _start(five_groups), 50, 11, five_groups, settings[2])
        b = run_chain("gibbs", _start(five_groups), 50, 11, five_groups, settings[2])
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.lambda_e, b.lambda_e)

    def test_different_seed_differs(self, five_groups, settings):
        """Test that different seeds give different traces."""
        a = run_chain("block", _start(five_groups), 10, 1, five_groups, settings[2])
        b = run_chain("block", _start(five_groups), 10, 2, five_groups, settings[2])
        assert not np.array_equal(a.mu, b.mu)

    def test_negative_iterations(self, five_groups, settings):
        """Test that a negative count is rejected."""
        with pytest.raises(DomainViolation):
            run_chain("block", _start(five_groups), -1, 0, five_groups, settings[2])

    def test_trace_frame_columns(self, five_groups, settings):
        """Test trace columns and row count."""
        trace = run_chain("block", _start(five_groups), 5, 0, five_groups, settings[2])
        frame = trace_to_dataframe(trace)
        assert list(frame.columns) == [
            "iter", "mu", "lambda_theta", "lambda_e", "theta_1", "theta_2", "theta_3", "theta_4", "theta_5",
        ]
        assert len(frame) == 6
        assert frame["iter"].tolist() == list(range(6))


class TestOneStepExpectation:
    """Tests for Monte Carlo one-step expectations."""

    def test_constant_evaluator(self, five_groups, settings):
        """Test that a constant evaluator has estimate 1 and zero standard error."""
        estimate, se = mc_one_step_expectation(lambda s: 1.0, _start(five_groups), "block", 100, 0, five_groups, settings[2])
        assert estimate == 1.0
        assert se == 0.0

    def test_standard_error_scaling(self, five_groups, settings):
        """Test that the standard error shrinks like 1/sqrt(n_rep)."""
        drift = lambda s: float(s.mu) ** 2
        _, se_small = mc_one_step_expectation(drift, _start(five_groups), "gibbs", 100, 1, five_groups, settings[2])
        _, se_large = mc_one_step_expectation(drift, _start(five_groups), "gibbs", 10_000, 2, five_groups, settings[2])
        ratio = se_small / se_large
        assert 10 / 1.5 <= ratio <= 10 * 1.5

    def test_too_few_replicates(self, five_groups, settings):
        """Test that fewer than 100 replicates are rejected."""
        with pytest.raises(DomainViolation):
            mc_one_step_expectation(lambda s: 1.0, _start(five_groups), "block", 10, 0, five_groups, settings[2])


@pytest.mark.slow
class TestSamplerAgreement:
    """Tests that both samplers target the same posterior."""

    @staticmethod
    def _batch_means(values: np.ndarray, batches: int = 100):
        means = values[: len(values) // batches * batches].reshape(batches, -1).mean(axis=1)
        return float(means.mean()), float(means.std(ddof=1) / np.sqrt(batches))

    def test_posterior_means_agree(self, five_groups, settings):
        """Test posterior means of mu and both precisions across 10^6 iterations of each sampler."""
        hyper = settings[2]
        n = 1_000_000
        block = run_chain("block", _start(five_groups), n, 101, five_groups, hyper)
        gibbs = run_chain("gibbs", _start(five_groups), n, 202, five_groups, hyper)
        for name in ("mu", "lambda_theta", "lambda_e"):
            m_block, se_block = self._batch_means(getattr(block, name)[1:])
            m_gibbs, se_gibbs = self._batch_means(getattr(gibbs, name)[1:])
            assert abs(m_block - m_gibbs) <= 4 * np.hypot(se_block, se_gibbs), name


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
