"""
Drift Monte Carlo suite: E[V(X1) | X0 = x] estimated by one-step simulation
must stay under gamma V(x) + b at random states, up to z standard errors.
"""
import time
from typing import Any, Dict, List, Tuple

import numpy as np

from ..config import DRIFT_MC_REPLICATES, DRIFT_MC_STATES, DRIFT_MC_Z, SamplerKind
from ..core_model import BlockDriftFunction, ChainState, GibbsDriftFunction
from ..errors import BurninError
from ..samplers import mc_one_step_expectation
from .base import BaseSuite, SuiteContext, SuiteResult

MAX_REPORTED_ISSUES = 10


def random_states(context: SuiteContext, n: int, rng: np.random.Generator) -> List[ChainState]:
    """States scattered around the data: theta and mu near the means, log-normal precisions."""
    ds, hyper = context.dataset, context.hyper
    spread = np.sqrt(ds.sse / ds.M) + np.sqrt(ds.s2 / ds.K)
    states = []
    for _ in range(n):
        theta = ds.ybar_arr + 2.0 * spread * rng.standard_normal(ds.K)
        mu = ds.ybar_grand + 2.0 * spread * rng.standard_normal()
        lt = hyper.a1 / hyper.b1 * np.exp(rng.standard_normal())
        le = hyper.a2 / hyper.b2 * np.exp(rng.standard_normal())
        states.append(ChainState(theta=theta, mu=float(mu), lambda_theta=float(lt), lambda_e=float(le)))
    return states


class DriftMonteCarloSuite(BaseSuite):
    """Checks the block drift (both forms on equal group sizes) and, when its assumptions hold, the Gibbs drift."""

    SUITE_ID = "drift_mc"
    SUITE_NAME = "drift_monte_carlo"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        n_states = context.size("drift_mc_states", DRIFT_MC_STATES)
        n_rep = context.size("drift_mc_replicates", DRIFT_MC_REPLICATES)

        issues: List[Dict[str, Any]] = []
        warnings: List[str] = []
        details: Dict[str, Any] = {"states": n_states, "replicates": n_rep, "z": DRIFT_MC_Z}
        checks_performed = 0
        checks_passed = 0

        targets: List[Tuple[str, SamplerKind, Any, Any]] = []
        # CHECK 1: certificates derivable
        checks_performed += 1
        try:
            cert = context.block_certificate()
            targets.append(("block", SamplerKind.BLOCK, cert, BlockDriftFunction(cert.spec, context.dataset)))
            checks_passed += 1
        except BurninError as exc:
            issues.append(exc.to_issue())
        if context.dataset.balanced:
            checks_performed += 1
            try:
                b_cert = context.balanced_block_certificate()
                targets.append((
                    "block_balanced", SamplerKind.BLOCK, b_cert, BlockDriftFunction(b_cert.spec, context.dataset),
                ))
                checks_passed += 1
            except BurninError as exc:
                issues.append(exc.to_issue())
        if context.gibbs is None:
            warnings.append("Gibbs drift skipped: assumptions fail for this prior and data")
        else:
            checks_performed += 1
            try:
                g_cert = context.gibbs_certificate()
                targets.append((
                    "gibbs", SamplerKind.GIBBS, g_cert,
                    GibbsDriftFunction(g_cert.spec, context.hyper, context.dataset),
                ))
                checks_passed += 1
            except BurninError as exc:
                issues.append(exc.to_issue())

        # CHECK 2: one-step expectation under the drift line
        rng = context.rng(1)
        for name, kernel, cert, drift in targets:
            worst = -np.inf
            for i, x in enumerate(random_states(context, n_states, rng)):
                checks_performed += 1
                estimate, std_error = mc_one_step_expectation(
                    drift, x, kernel, n_rep, context.seed + 1000 * i + 7, context.dataset, context.hyper
                )
                bound = cert.gamma * drift(x) + cert.b
                excess = (estimate - bound) / max(std_error, 1e-300)
                worst = max(worst, excess)
                if estimate <= bound + DRIFT_MC_Z * std_error:
                    checks_passed += 1
                elif len(issues) < MAX_REPORTED_ISSUES:
                    issues.append({
                        "type": "DRIFT_VIOLATION",
                        "code": f"{name.upper()}_DRIFT_EXCEEDED",
                        "message": f"{name} drift: E V(X1) = {estimate:.6g} > {bound:.6g} + {DRIFT_MC_Z} se",
                        "severity": "critical",
                    })
            details[name] = {"gamma": cert.gamma, "b": cert.b, "worst_excess_in_se": float(worst)}

        return self._create_result(
            status=self._status(checks_performed, checks_passed),
            start_time=start_time,
            checks_performed=checks_performed,
            checks_passed=checks_passed,
            issues=issues,
            warnings=warnings,
            details=details,
        )
