"""
Random Effects Data Generator

Simulates grouped observations from the hierarchical one-way model:
precisions from their gamma priors, mu from its normal prior, group effects
around mu, observations around their group effect.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Union

import numpy as np

from .core_model import Hyperparameters, _check_shape
from .csv_adapter import write_raw_csv
from .samplers import RngStream


@dataclass
class SimulatedData:
    """Raw groups plus the parameter values that produced them."""
    groups: List[List[float]]
    truth: Dict[str, object]

    def write_csv(self, path: str) -> None:
        write_raw_csv(self.groups, path)


def simulate_groups(
    K: int,
    m: Union[int, Sequence[int]],
    hyper: Hyperparameters,
    seed: int = 0,
) -> SimulatedData:
    """
    Draw one dataset from the model.

    Args:
        K: Number of groups
        m: Observations per group, one int for balanced data or a list of K
        hyper: Prior constants
        seed: Random seed for reproducibility

    Returns:
        SimulatedData with the raw groups and the true parameters
    """
    sizes = [int(m)] * K if np.isscalar(m) else [int(c) for c in m]
    if len(sizes) != K:
        raise ValueError(f"expected {K} group sizes, got {len(sizes)}")
    _check_shape(sizes)

    rng = RngStream(seed)
    lambda_theta = float(rng.generator.gamma(hyper.a1, 1.0 / hyper.b1))
    lambda_e = float(rng.generator.gamma(hyper.a2, 1.0 / hyper.b2))
    mu = hyper.m0 + float(rng.normal()) / np.sqrt(hyper.s0)
    theta = mu + rng.normal(K) / np.sqrt(lambda_theta)

    groups = [
        (theta[i] + rng.normal(sizes[i]) / np.sqrt(lambda_e)).tolist()
        for i in range(K)
    ]
    truth = {
        "mu": mu,
        "lambda_theta": lambda_theta,
        "lambda_e": lambda_e,
        "theta": theta.tolist(),
    }
    return SimulatedData(groups=groups, truth=truth)
