"""
Samplers: the Gibbs and block Gibbs kernels on the random effects posterior,
chain running, and Monte Carlo estimates of one-step drift expectations.

Both kernels are written over batches of states so a single transition and
10^4 independent transitions from one state share one code path.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Tuple, Union

import numpy as np
import pandas as pd

from .config import MIN_MC_REPLICATES, TRACE_FIXED_COLUMNS, SamplerKind
from .core_model import ChainState, Dataset, Hyperparameters, StateBatch, v1_values, v2_values
from .errors import DomainViolation, NonpositivePrecision

logger = logging.getLogger(__name__)


# ============================================================================
# RANDOM STREAMS
# ============================================================================

@dataclass
class RngStream:
    """Seeded numpy Generator; identical seeds give identical draws."""
    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.generator = np.random.default_rng(self.seed)

    def gamma(self, shape: float, rate, size=None):
        """Gamma(shape, rate) variates; shapes below 1 never occur in this model."""
        if shape < 1:
            raise DomainViolation(f"gamma shape must be >= 1, got {shape}")
        return self.generator.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)


# ============================================================================
# POSTERIOR MOMENTS OF THE (theta, mu) BLOCK
# ============================================================================

@dataclass
class PosteriorNormalParams:
    """Moments of (theta, mu) given both precisions."""
    t: float
    mean_mu: float
    var_mu: float
    mean_theta: np.ndarray
    var_theta: np.ndarray
    cov_theta_pairs: np.ndarray  # (K, K), diagonal holds var_theta
    cov_theta_mu: np.ndarray


def posterior_normal_params(
    lambda_theta: float, lambda_e: float, dataset: Dataset, hyper: Hyperparameters
) -> PosteriorNormalParams:
    if not (lambda_theta > 0 and lambda_e > 0):
        raise NonpositivePrecision(
            f"precisions must be positive, got ({lambda_theta}, {lambda_e})"
        )
    m, ybar = dataset.m_arr, dataset.ybar_arr
    w = lambda_theta + m * lambda_e
    precision_i = m * lambda_theta * lambda_e / w
    t = float(precision_i.sum())
    total = hyper.s0 + t

    mean_mu = float((hyper.s0 * hyper.m0 + np.dot(precision_i, ybar)) / total)
    shrink = lambda_theta / w
    mean_theta = (lambda_theta * mean_mu + m * lambda_e * ybar) / w
    var_theta = 1.0 / w + shrink ** 2 / total
    pairs = np.outer(shrink, shrink) / total
    np.fill_diagonal(pairs, var_theta)

    return PosteriorNormalParams(
        t=t,
        mean_mu=mean_mu,
        var_mu=1.0 / total,
        mean_theta=mean_theta,
        var_theta=var_theta,
        cov_theta_pairs=pairs,
        cov_theta_mu=shrink / total,
    )


# ============================================================================
# KERNELS
# ============================================================================

@dataclass(frozen=True)
class _KernelConstants:
    shape_theta: float
    shape_e: float
    b1: float
    b2: float
    s0: float
    m0: float
    sse: float
    K: int
    m: np.ndarray
    ybar: np.ndarray


def _constants(dataset: Dataset, hyper: Hyperparameters) -> _KernelConstants:
    return _KernelConstants(
        shape_theta=dataset.K / 2.0 + hyper.a1,
        shape_e=dataset.M / 2.0 + hyper.a2,
        b1=hyper.b1,
        b2=hyper.b2,
        s0=hyper.s0,
        m0=hyper.m0,
        sse=dataset.sse,
        K=dataset.K,
        m=dataset.m_arr,
        ybar=dataset.ybar_arr,
    )


def _draw_xi(lt, le, c: _KernelConstants, rng: RngStream, dataset: Dataset):
    """(theta, mu) given lambda: mu from its marginal, then independent theta_i."""
    lt = np.asarray(lt, dtype=float)[:, None]
    le = np.asarray(le, dtype=float)[:, None]
    w = lt + c.m * le
    precision_i = c.m * lt * le / w
    total = c.s0 + precision_i.sum(axis=1)
    mean_mu = (c.s0 * c.m0 + (precision_i * c.ybar).sum(axis=1)) / total
    n = lt.shape[0]
    mu = mean_mu + rng.normal(n) / np.sqrt(total)
    theta = (lt * mu[:, None] + c.m * le * c.ybar) / w + rng.normal((n, c.K)) / np.sqrt(w)
    return theta, mu


def _block_transition(theta, mu, c: _KernelConstants, rng: RngStream, dataset: Dataset):
    lt = rng.gamma(c.shape_theta, v1_values(theta, mu) / 2.0 + c.b1)
    le = rng.gamma(c.shape_e, (v2_values(theta, dataset) + c.sse) / 2.0 + c.b2)
    new_theta, new_mu = _draw_xi(lt, le, c, rng, dataset)
    return new_theta, new_mu, lt, le


def _gibbs_transition(theta, lt_prev, le_prev, c: _KernelConstants, rng: RngStream, dataset: Dataset):
    n = theta.shape[0]
    lt_prev = np.asarray(lt_prev, dtype=float)
    le_prev = np.asarray(le_prev, dtype=float)

    mu_precision = c.s0 + c.K * lt_prev
    mu_mean = (c.s0 * c.m0 + c.K * lt_prev * theta.mean(axis=1)) / mu_precision
    mu = mu_mean + rng.normal(n) / np.sqrt(mu_precision)

    w = lt_prev[:, None] + c.m * le_prev[:, None]
    theta_mean = (lt_prev[:, None] * mu[:, None] + c.m * le_prev[:, None] * c.ybar) / w
    new_theta = theta_mean + rng.normal((n, c.K)) / np.sqrt(w)

    lt = rng.gamma(c.shape_theta, v1_values(new_theta, mu) / 2.0 + c.b1)
    le = rng.gamma(c.shape_e, (v2_values(new_theta, dataset) + c.sse) / 2.0 + c.b2)
    return new_theta, mu, lt, le


def _as_batch(state: ChainState, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    return (
        np.tile(state.theta, (n, 1)),
        np.full(n, float(state.mu)),
        np.full(n, float(state.lambda_theta)),
        np.full(n, float(state.lambda_e)),
    )


def _transition(kernel: SamplerKind, batch, c: _KernelConstants, rng: RngStream, dataset: Dataset):
    theta, mu, lt, le = batch
    if kernel is SamplerKind.BLOCK:
        return _block_transition(theta, mu, c, rng, dataset)
    return _gibbs_transition(theta, lt, le, c, rng, dataset)


def _single_step(kernel: SamplerKind, state, dataset, hyper, rng) -> ChainState:
    state.validate(dataset)
    theta, mu, lt, le = _transition(kernel, _as_batch(state, 1), _constants(dataset, hyper), rng, dataset)
    return ChainState(theta=theta[0], mu=float(mu[0]), lambda_theta=float(lt[0]), lambda_e=float(le[0]))


def block_gibbs_step(state: ChainState, dataset: Dataset, hyper: Hyperparameters, rng: RngStream) -> ChainState:
    """lambda given (theta', mu'), then (theta, mu) jointly given lambda."""
    return _single_step(SamplerKind.BLOCK, state, dataset, hyper, rng)


def gibbs_step(state: ChainState, dataset: Dataset, hyper: Hyperparameters, rng: RngStream) -> ChainState:
    """mu, then each theta_i, then lambda_theta and lambda_e."""
    return _single_step(SamplerKind.GIBBS, state, dataset, hyper, rng)


def one_step_batch(
    x: ChainState, kernel: SamplerKind, n: int, rng: RngStream, dataset: Dataset, hyper: Hyperparameters
) -> StateBatch:
    """n independent one-step transitions from the same state."""
    x.validate(dataset)
    theta, mu, lt, le = _transition(kernel, _as_batch(x, n), _constants(dataset, hyper), rng, dataset)
    return StateBatch(theta=theta, mu=mu, lambda_theta=lt, lambda_e=le)


def sample_xi_given_lambda(
    lambda_theta: float,
    lambda_e: float,
    dataset: Dataset,
    hyper: Hyperparameters,
    rng: RngStream,
    size: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """size draws of (theta, mu) from the block kernel's second stage."""
    if not (lambda_theta > 0 and lambda_e > 0):
        raise NonpositivePrecision(f"precisions must be positive, got ({lambda_theta}, {lambda_e})")
    c = _constants(dataset, hyper)
    return _draw_xi(np.full(size, lambda_theta), np.full(size, lambda_e), c, rng, dataset)


# ============================================================================
# CHAINS
# ============================================================================

@dataclass
class Trace:
    """States of one chain, start included, stored column-wise."""
    kernel: SamplerKind
    seed: int
    theta: np.ndarray
    mu: np.ndarray
    lambda_theta: np.ndarray
    lambda_e: np.ndarray

    def __len__(self) -> int:
        return int(self.mu.shape[0])

    def __getitem__(self, i: int) -> ChainState:
        return ChainState(
            theta=self.theta[i].copy(),
            mu=float(self.mu[i]),
            lambda_theta=float(self.lambda_theta[i]),
            lambda_e=float(self.lambda_e[i]),
        )

    @property
    def states(self) -> List[ChainState]:
        return [self[i] for i in range(len(self))]

    def to_dataframe(self) -> pd.DataFrame:
        return trace_to_dataframe(self)


def run_chain(
    kernel: Union[SamplerKind, str],
    start: ChainState,
    n: int,
    seed: int,
    dataset: Dataset,
    hyper: Hyperparameters,
) -> Trace:
    """Apply the chosen kernel n times from start, recording every state."""
    kernel = SamplerKind(kernel)
    if n < 0:
        raise DomainViolation(f"iteration count must be nonnegative, got {n}")
    start.validate(dataset)

    rng = RngStream(seed)
    c = _constants(dataset, hyper)
    thetas = np.empty((n + 1, dataset.K))
    mus = np.empty(n + 1)
    lts = np.empty(n + 1)
    les = np.empty(n + 1)

    batch = _as_batch(start, 1)
    thetas[0], mus[0], lts[0], les[0] = start.theta, start.mu, start.lambda_theta, start.lambda_e
    for i in range(1, n + 1):
        batch = _transition(kernel, batch, c, rng, dataset)
        thetas[i], mus[i], lts[i], les[i] = batch[0][0], batch[1][0], batch[2][0], batch[3][0]

    logger.debug("ran %s chain for %d iterations (seed %d)", kernel.value, n, seed)
    return Trace(kernel=kernel, seed=seed, theta=thetas, mu=mus, lambda_theta=lts, lambda_e=les)


def trace_to_dataframe(trace: Trace) -> pd.DataFrame:
    """Columns iter, mu, lambda_theta, lambda_e, theta_1..theta_K."""
    frame = pd.DataFrame({
        TRACE_FIXED_COLUMNS[0]: np.arange(len(trace)),
        TRACE_FIXED_COLUMNS[1]: trace.mu,
        TRACE_FIXED_COLUMNS[2]: trace.lambda_theta,
        TRACE_FIXED_COLUMNS[3]: trace.lambda_e,
    })
    for k in range(trace.theta.shape[1]):
        frame[f"theta_{k + 1}"] = trace.theta[:, k]
    return frame


# ============================================================================
# ONE-STEP EXPECTATIONS
# ============================================================================

def mc_one_step_expectation(
    drift: Callable[[ChainState], float],
    x: ChainState,
    kernel: Union[SamplerKind, str],
    n_rep: int,
    seed: int,
    dataset: Dataset,
    hyper: Hyperparameters,
) -> Tuple[float, float]:
    """
    Sample mean and standard error of V(X1) over n_rep transitions from x.

    Evaluators exposing values(batch) are evaluated vectorized.
    """
    kernel = SamplerKind(kernel)
    if n_rep < MIN_MC_REPLICATES:
        raise DomainViolation(f"n_rep must be at least {MIN_MC_REPLICATES}, got {n_rep}")

    batch = one_step_batch(x, kernel, n_rep, RngStream(seed), dataset, hyper)
    if hasattr(drift, "values"):
        values = np.asarray(drift.values(batch), dtype=float)
    else:
        values = np.array([drift(batch.state(i)) for i in range(n_rep)], dtype=float)

    estimate = float(values.mean())
    std_error = float(values.std(ddof=1) / np.sqrt(n_rep))
    return estimate, std_error
