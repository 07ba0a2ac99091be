"""
Core model: data summaries, prior, chain states, drift functions and
optimal starting values for the one-way random effects posterior.

Raw observations are reduced to sufficient statistics at ingestion; every
formula downstream reads only the summaries.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .config import LAMBDA_E_START, MIN_GROUP_SIZE, MIN_GROUPS
from .errors import DomainViolation, NonpositivePrecision, TooFewGroups, TooFewObservations
from .numerics import DEFAULT_TOLERANCES, minimize_scalar

logger = logging.getLogger(__name__)


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class Dataset:
    """Sufficient statistics of grouped observations."""
    m: Tuple[int, ...]
    ybar: Tuple[float, ...]
    sse: float
    ybar_grand: float
    m_arr: np.ndarray = field(init=False, repr=False, compare=False)
    ybar_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "m_arr", np.asarray(self.m, dtype=float))
        object.__setattr__(self, "ybar_arr", np.asarray(self.ybar, dtype=float))

    @property
    def K(self) -> int:
        return len(self.m)

    @property
    def M(self) -> int:
        return int(sum(self.m))

    @property
    def s2(self) -> float:
        """Sum of squared deviations of group means from the grand mean."""
        return float(np.sum((self.ybar_arr - self.ybar_grand) ** 2))

    @property
    def ybar_groupmean(self) -> float:
        """Unweighted mean of the group means."""
        return float(np.mean(self.ybar_arr))

    @property
    def balanced(self) -> bool:
        return len(set(self.m)) == 1

    @property
    def min_m(self) -> int:
        return min(self.m)

    @property
    def max_m(self) -> int:
        return max(self.m)

    @property
    def sum_inv_m(self) -> float:
        return float(np.sum(1.0 / self.m_arr))

    def delta(self, m0: float) -> float:
        """Length of the convex hull of the group means and m0."""
        points = np.append(self.ybar_arr, m0)
        return float(points.max() - points.min())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K": self.K,
            "M": self.M,
            "m": list(self.m),
            "ybar": list(self.ybar),
            "SSE": self.sse,
            "ybar_grand": self.ybar_grand,
            "ybar_groupmean": self.ybar_groupmean,
            "s2": self.s2,
            "balanced": self.balanced,
        }


@dataclass(frozen=True)
class Hyperparameters:
    """Prior constants; all but m0 must be positive."""
    a1: float
    b1: float
    a2: float
    b2: float
    m0: float
    s0: float

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2", "s0"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainViolation(f"hyperparameter {name} must be positive, got {value}")

    def to_dict(self) -> Dict[str, float]:
        return {"a1": self.a1, "b1": self.b1, "a2": self.a2, "b2": self.b2, "m0": self.m0, "s0": self.s0}


@dataclass
class ChainState:
    theta: np.ndarray
    mu: float
    lambda_theta: float
    lambda_e: float

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)

    def validate(self, dataset: Optional[Dataset] = None) -> "ChainState":
        if not (self.lambda_theta > 0 and self.lambda_e > 0):
            raise NonpositivePrecision(
                f"precisions must be positive, got lambda_theta={self.lambda_theta}, lambda_e={self.lambda_e}"
            )
        if dataset is not None and self.theta.shape != (dataset.K,):
            raise DomainViolation(f"theta has length {self.theta.size}, dataset has K={dataset.K}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta": [float(t) for t in self.theta],
            "mu": float(self.mu),
            "lambda_theta": float(self.lambda_theta),
            "lambda_e": float(self.lambda_e),
        }


@dataclass(frozen=True)
class BlockDriftSpec:
    """Weights of V1 = phi1 v1 + phi2 v2 and the claimed drift rate."""
    phi1: float
    phi2: float
    gamma: float

    def __post_init__(self):
        if not (self.phi1 > 0 and self.phi2 > 0):
            raise DomainViolation(f"drift weights must be positive, got ({self.phi1}, {self.phi2})")


@dataclass(frozen=True)
class GibbsDriftSpec:
    c3: float
    gamma: float
    rho1_slack: float = 1e-5


# ============================================================================
# DATA INGESTION
# ============================================================================

def _check_shape(m: Sequence[int]) -> None:
    for i, count in enumerate(m, start=1):
        if count < MIN_GROUP_SIZE:
            raise TooFewObservations(
                f"m' >= {MIN_GROUP_SIZE} violated: group {i} has {count} observation(s)",
                {"group": i, "count": int(count)},
            )
    if len(m) < MIN_GROUPS:
        raise TooFewGroups(
            f"K >= {MIN_GROUPS} violated: found {len(m)} group(s)",
            {"K": len(m)},
        )


def build_dataset(raw_groups: Iterable[Iterable[float]]) -> Dataset:
    """Reduce raw grouped observations to sufficient statistics."""
    groups = [np.asarray(list(g), dtype=float) for g in raw_groups]
    m = [int(g.size) for g in groups]
    _check_shape(m)

    ybar = [float(g.mean()) for g in groups]
    sse = float(sum(np.sum((g - g.mean()) ** 2) for g in groups))
    ybar_grand = float(np.concatenate(groups).mean())
    logger.debug("built dataset K=%d M=%d SSE=%.6g", len(m), sum(m), sse)
    return Dataset(m=tuple(m), ybar=tuple(ybar), sse=sse, ybar_grand=ybar_grand)


def dataset_from_summaries(
    m: Sequence[int],
    ybar: Sequence[float],
    sse: float,
    ybar_grand: Optional[float] = None,
) -> Dataset:
    """Build a Dataset from summary statistics; ybar_grand defaults to the weighted mean."""
    m = [int(c) for c in m]
    ybar = [float(y) for y in ybar]
    if len(m) != len(ybar):
        raise DomainViolation("m and ybar must have the same length")
    _check_shape(m)
    if sse < 0:
        raise DomainViolation(f"SSE must be nonnegative, got {sse}")
    if ybar_grand is None:
        ybar_grand = float(np.dot(m, ybar) / sum(m))
    return Dataset(m=tuple(m), ybar=tuple(ybar), sse=float(sse), ybar_grand=float(ybar_grand))


# ============================================================================
# DRIFT FUNCTIONS
# ============================================================================

def v1_values(theta, mu) -> np.ndarray:
    """Sum of (theta_i - mu)^2; theta is (K,) or (n, K)."""
    theta = np.asarray(theta, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return np.sum((theta - mu[..., None]) ** 2, axis=-1)


def v2_values(theta, dataset: Dataset) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.sum(dataset.m_arr * (theta - dataset.ybar_arr) ** 2, axis=-1)


def v3_values(theta, lambda_theta, hyper: Hyperparameters, dataset: Dataset) -> np.ndarray:
    theta_bar = np.mean(np.asarray(theta, dtype=float), axis=-1)
    lt = np.asarray(lambda_theta, dtype=float)
    K = dataset.K
    return K * lt / (hyper.s0 + K * lt) * (theta_bar - dataset.ybar_grand) ** 2


def gibbs_inverse_coefficient(hyper: Hyperparameters, K: int) -> float:
    """delta7 / (K delta1) = (2a1 + K - 2) / (2K(a1 - 1))."""
    if not hyper.a1 > 1:
        raise DomainViolation(f"Gibbs drift needs a1 > 1, got {hyper.a1}")
    return (2.0 * hyper.a1 + K - 2.0) / (2.0 * K * (hyper.a1 - 1.0))


def block_drift_values(theta, mu, spec: BlockDriftSpec, dataset: Dataset) -> np.ndarray:
    return spec.phi1 * v1_values(theta, mu) + spec.phi2 * v2_values(theta, dataset)


def gibbs_drift_values(
    theta, lambda_theta, lambda_e, spec: GibbsDriftSpec, hyper: Hyperparameters, dataset: Dataset
) -> np.ndarray:
    lt = np.asarray(lambda_theta, dtype=float)
    le = np.asarray(lambda_e, dtype=float)
    if np.any(lt <= 0):
        raise NonpositivePrecision("lambda_theta must be positive in the Gibbs drift function")
    q = gibbs_inverse_coefficient(hyper, dataset.K)
    return (
        np.exp(spec.c3 * lt)
        + np.exp(spec.c3 * le)
        + q / lt
        + v3_values(theta, lt, hyper, dataset)
    )


def eval_block_drift(state: ChainState, spec: BlockDriftSpec, dataset: Dataset) -> float:
    """V1(theta, mu) = phi1 v1 + phi2 v2; with (phi, 1/m) this is the balanced V2."""
    return float(block_drift_values(state.theta, state.mu, spec, dataset))


def eval_gibbs_drift(
    state: ChainState, spec: GibbsDriftSpec, hyper: Hyperparameters, dataset: Dataset
) -> float:
    """V3 = e^{c3 lt} + e^{c3 le} + delta7/(K delta1 lt) + v3."""
    return float(
        gibbs_drift_values(state.theta, state.lambda_theta, state.lambda_e, spec, hyper, dataset)
    )


# ============================================================================
# POSTERIOR
# ============================================================================

def log_unnormalized_posterior(state: ChainState, dataset: Dataset, hyper: Hyperparameters) -> float:
    """Log joint density of (theta, mu, lambda) and the data, up to a constant."""
    state.validate(dataset)
    lt, le = state.lambda_theta, state.lambda_e
    theta = state.theta

    log_lik = 0.5 * dataset.M * np.log(le) - 0.5 * le * (dataset.sse + float(v2_values(theta, dataset)))
    log_theta = 0.5 * dataset.K * np.log(lt) - 0.5 * lt * float(v1_values(theta, state.mu))
    log_le = (hyper.a2 - 1.0) * np.log(le) - hyper.b2 * le
    log_mu = -0.5 * hyper.s0 * (state.mu - hyper.m0) ** 2
    log_lt = (hyper.a1 - 1.0) * np.log(lt) - hyper.b1 * lt
    return float(log_lik + log_theta + log_le + log_mu + log_lt)


# ============================================================================
# OPTIMAL STARTING VALUES
# ============================================================================

def optimal_start_block(spec: BlockDriftSpec, dataset: Dataset) -> Tuple[np.ndarray, float]:
    """Global minimizer of V1 over (theta, mu)."""
    phi1, phi2 = spec.phi1, spec.phi2
    m, ybar = dataset.m_arr, dataset.ybar_arr
    denom = phi1 + phi2 * m
    weights = m / denom
    theta_center = float(np.dot(weights, ybar) / weights.sum())
    theta_hat = (phi1 * theta_center + phi2 * m * ybar) / denom
    return theta_hat, float(theta_hat.mean())


def optimal_start_gibbs(
    spec: GibbsDriftSpec,
    dataset: Dataset,
    hyper: Hyperparameters,
    tolerances=DEFAULT_TOLERANCES,
    lambda_e: float = LAMBDA_E_START,
) -> ChainState:
    """
    Start with theta constant at the grand mean and lambda_theta minimizing
    e^{c3 x} + q/x, q = delta7/(K delta1).
    """
    q = gibbs_inverse_coefficient(hyper, dataset.K)
    c3 = spec.c3
    # c3 e^{c3 x} - q/x^2 changes sign inside [lo, hi]
    hi = float(np.sqrt(q / c3))
    lo = 0.5 * float(np.sqrt(q / (c3 * np.exp(c3 * hi))))
    lambda_theta, _ = minimize_scalar(lambda x: np.exp(c3 * x) + q / x, lo, hi, tolerances)

    theta = np.full(dataset.K, dataset.ybar_grand)
    return ChainState(theta=theta, mu=dataset.ybar_grand, lambda_theta=lambda_theta, lambda_e=lambda_e)


def block_start_state(spec: BlockDriftSpec, dataset: Dataset, hyper: Hyperparameters) -> ChainState:
    """Chain state at the V1 minimizer; the block kernel ignores the starting lambda."""
    theta_hat, mu_hat = optimal_start_block(spec, dataset)
    return ChainState(
        theta=theta_hat,
        mu=mu_hat,
        lambda_theta=hyper.a1 / hyper.b1,
        lambda_e=hyper.a2 / hyper.b2,
    )



# ============================================================================
# BATCHES AND DRIFT EVALUATORS
# ============================================================================

@dataclass
class StateBatch:
    """n chain states stored column-wise."""
    theta: np.ndarray  # (n, K)
    mu: np.ndarray
    lambda_theta: np.ndarray
    lambda_e: np.ndarray

    def __len__(self) -> int:
        return int(self.mu.shape[0])

    def state(self, i: int) -> ChainState:
        return ChainState(
            theta=self.theta[i].copy(),
            mu=float(self.mu[i]),
            lambda_theta=float(self.lambda_theta[i]),
            lambda_e=float(self.lambda_e[i]),
        )


class BlockDriftFunction:
    """Callable V1 with a vectorized path over StateBatch."""

    def __init__(self, spec: BlockDriftSpec, dataset: Dataset):
        self.spec = spec
        self.dataset = dataset

    def __call__(self, state: ChainState) -> float:
        return eval_block_drift(state, self.spec, self.dataset)

    def values(self, batch: StateBatch) -> np.ndarray:
        return block_drift_values(batch.theta, batch.mu, self.spec, self.dataset)


class GibbsDriftFunction:
    """Callable V3 with a vectorized path over StateBatch."""

    def __init__(self, spec: GibbsDriftSpec, hyper: Hyperparameters, dataset: Dataset):
        self.spec = spec
        self.hyper = hyper
        self.dataset = dataset

    def __call__(self, state: ChainState) -> float:
        return eval_gibbs_drift(state, self.spec, self.hyper, self.dataset)

    def values(self, batch: StateBatch) -> np.ndarray:
        return gibbs_drift_values(
            batch.theta, batch.lambda_theta, batch.lambda_e, self.spec, self.hyper, self.dataset
        )
