"""
Xi moments suite: sample moments of (theta, mu) given both precisions, from
the block kernel's second stage, against the closed-form posterior moments.
Three precision pairs are checked, spread over orders of magnitude.
"""
import time
from typing import Any, Dict, List, Tuple

import numpy as np

from ..config import MOMENT_DRAWS, MOMENT_Z
from ..core_model import Dataset, Hyperparameters
from ..samplers import RngStream, posterior_normal_params, sample_xi_given_lambda
from .base import BaseSuite, SuiteContext, SuiteResult

# multipliers on (lambda_theta, lambda_e) around the central pair
LAMBDA_SCALES = ((1.0, 1.0), (100.0, 0.01), (0.01, 100.0))


def lambda_pairs(dataset: Dataset, hyper: Hyperparameters) -> List[Tuple[float, float]]:
    lambda_theta = hyper.a1 / hyper.b1
    lambda_e = (dataset.M / 2.0 + hyper.a2) / (hyper.b2 + dataset.sse / 2.0)
    return [(lambda_theta * s_theta, lambda_e * s_e) for s_theta, s_e in LAMBDA_SCALES]


def moment_comparisons(
    lambda_theta: float, lambda_e: float, context: SuiteContext, n: int, stream: RngStream
) -> List[Tuple[str, float, float, float]]:
    """(name, sample, exact, standard error) for every first and second moment."""
    ds, hyper = context.dataset, context.hyper
    exact = posterior_normal_params(lambda_theta, lambda_e, ds, hyper)
    theta, mu = sample_xi_given_lambda(lambda_theta, lambda_e, ds, hyper, stream, n)
    sample_cov = np.cov(np.column_stack([theta, mu]), rowvar=False)
    K = ds.K

    out = [
        ("E mu", float(mu.mean()), exact.mean_mu, np.sqrt(exact.var_mu / n)),
        ("Var mu", float(sample_cov[K, K]), exact.var_mu, exact.var_mu * np.sqrt(2.0 / (n - 1))),
    ]
    for i in range(K):
        var_i = float(exact.var_theta[i])
        cov_i = float(exact.cov_theta_mu[i])
        out.append((f"E theta_{i + 1}", float(theta[:, i].mean()), float(exact.mean_theta[i]), np.sqrt(var_i / n)))
        out.append((f"Var theta_{i + 1}", float(sample_cov[i, i]), var_i, var_i * np.sqrt(2.0 / (n - 1))))
        out.append((
            f"Cov theta_{i + 1},mu",
            float(sample_cov[i, K]),
            cov_i,
            np.sqrt((var_i * exact.var_mu + cov_i ** 2) / n),
        ))
    for i in range(K):
        for j in range(i + 1, K):
            cov_ij = float(exact.cov_theta_pairs[i, j])
            var_ij = float(exact.var_theta[i] * exact.var_theta[j])
            out.append((
                f"Cov theta_{i + 1},theta_{j + 1}",
                float(sample_cov[i, j]),
                cov_ij,
                np.sqrt((var_ij + cov_ij ** 2) / n),
            ))
    return out


class XiMomentsSuite(BaseSuite):

    SUITE_ID = "xi_moments"
    SUITE_NAME = "xi_moments"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        n = context.size("moment_draws", MOMENT_DRAWS)
        stream = RngStream(context.seed + 41)

        issues: List[Dict[str, Any]] = []
        rows: List[Dict[str, Any]] = []
        performed = passed = 0
        pairs = lambda_pairs(context.dataset, context.hyper)
        for lambda_theta, lambda_e in pairs:
            for name, sample, target, se in moment_comparisons(lambda_theta, lambda_e, context, n, stream):
                performed += 1
                z = abs(sample - target) / float(se)
                rows.append({
                    "lambda_theta": lambda_theta, "lambda_e": lambda_e,
                    "moment": name, "sample": sample, "exact": target, "z": z,
                })
                if z <= MOMENT_Z:
                    passed += 1
                else:
                    issues.append({
                        "type": "MOMENT_MISMATCH",
                        "code": "XI_MOMENT_OUTSIDE_BAND",
                        "message": (
                            f"{name} at lambda=({lambda_theta:.4g}, {lambda_e:.4g}): "
                            f"sample {sample:.6g} vs exact {target:.6g} ({z:.2f} se)"
                        ),
                        "severity": "critical",
                    })

        return self._create_result(
            status=self._status(performed, passed),
            start_time=start_time,
            checks_performed=performed,
            checks_passed=passed,
            issues=issues,
            details={"draws": n, "lambda_pairs": [list(p) for p in pairs], "moments": rows},
        )
