"""
Minorization domination suite: for states inside the small set, the kernel's
conditional densities must dominate the minorizing densities pointwise.

Block: the gamma conditionals of lambda_theta and lambda_e against h1, h2.
Gibbs: the theta conditional against g1 and the mu conditional against the
scaled g2.
"""
import time
from typing import Any, Dict, List, Tuple

import numpy as np

from ..certificates import block_minorization, gibbs_minorization
from ..config import DOMINATION_GRID_POINTS, DOMINATION_STATES, SuiteStatus
from ..core_model import BlockDriftSpec, optimal_start_block, v1_values, v2_values
from ..errors import BurninError
from ..numerics import log_gamma_density, log_normal_density
from .base import BaseSuite, SuiteContext, SuiteResult

LOG_TOLERANCE = 1e-9
MAX_SAMPLING_ROUNDS = 200


def _dominated(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return lhs >= rhs - LOG_TOLERANCE * np.maximum(1.0, np.abs(rhs))


def block_states_in_set(context: SuiteContext, mino, n: int, rng) -> List[Tuple[np.ndarray, float]]:
    """Rejection-sample (theta, mu) around the V1 minimizer until n lie in C_B."""
    ds = context.dataset
    p = context.block
    theta_hat, mu_hat = optimal_start_block(BlockDriftSpec(p.phi1, p.phi2, p.gamma), ds)
    scale = np.sqrt(p.d / (ds.K * (p.phi1 + p.phi2 * ds.max_m)))
    states: List[Tuple[np.ndarray, float]] = []
    for _ in range(MAX_SAMPLING_ROUNDS):
        theta = theta_hat + scale * rng.standard_normal((n, ds.K))
        mu = mu_hat + scale * rng.standard_normal(n)
        inside = mino.contains(theta, mu, ds)
        states.extend((theta[i], float(mu[i])) for i in np.flatnonzero(inside))
        if len(states) >= n:
            break
    return states[:n]


def gibbs_states_in_set(context: SuiteContext, mino, n: int, rng) -> List[Tuple[np.ndarray, float, float]]:
    """Rejection-sample (theta, lambda_theta, lambda_e) until n lie in C_G."""
    ds = context.dataset
    upper = mino.upper_precision
    states: List[Tuple[np.ndarray, float, float]] = []
    for _ in range(MAX_SAMPLING_ROUNDS):
        lt = rng.uniform(mino.c4, upper, n)
        le = rng.uniform(0.0, upper, n)
        le = np.where(le > 0, le, upper)
        theta = ds.ybar_grand + np.sqrt(mino.d) * rng.standard_normal((n, ds.K))
        inside = mino.in_cg1(lt) & mino.in_cg2(le) & mino.in_cg3(theta, lt)
        states.extend((theta[i], float(lt[i]), float(le[i])) for i in np.flatnonzero(inside))
        if len(states) >= n:
            break
    return states[:n]


class MinorizationDominationSuite(BaseSuite):

    SUITE_ID = "minorization_domination"
    SUITE_NAME = "minorization_domination"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        n_states = context.size("domination_states", DOMINATION_STATES)
        n_points = context.size("domination_grid_points", DOMINATION_GRID_POINTS)
        issues: List[Dict[str, Any]] = []
        warnings: List[str] = []
        details: Dict[str, Any] = {}
        performed = passed = 0

        # CHECK 1: block gamma conditionals dominate h1 and h2
        try:
            p = context.block
            mino = block_minorization(context.dataset, context.hyper, p.phi1, p.phi2, p.d)
            b_performed, b_passed = self._check_block(context, mino, n_states, n_points)
            performed += b_performed
            passed += b_passed
            details["block"] = {"checks": b_performed, "violations": b_performed - b_passed, "epsilon": mino.epsilon}
            if b_passed < b_performed:
                issues.append(self._violation("BLOCK", b_performed - b_passed))
        except BurninError as exc:
            performed += 1
            issues.append(exc.to_issue())

        # CHECK 2: Gibbs normal conditionals dominate g1 and g2
        if context.gibbs is None:
            warnings.append("Gibbs minorization skipped: assumptions fail for this prior and data")
        else:
            try:
                g = context.gibbs
                g_mino = gibbs_minorization(context.dataset, context.hyper, g.c3, g.d)
                g_performed, g_passed = self._check_gibbs(context, g_mino, n_states, n_points)
                performed += g_performed
                passed += g_passed
                details["gibbs"] = {
                    "checks": g_performed, "violations": g_performed - g_passed, "log_epsilon": g_mino.log_epsilon,
                }
                if g_passed < g_performed:
                    issues.append(self._violation("GIBBS", g_performed - g_passed))
            except BurninError as exc:
                performed += 1
                issues.append(exc.to_issue())

        status = self._status(performed, passed)
        if issues and status is SuiteStatus.PASSED:
            status = SuiteStatus.FAILED
        return self._create_result(
            status=status,
            start_time=start_time,
            checks_performed=performed,
            checks_passed=passed,
            issues=issues,
            warnings=warnings,
            details=details,
        )

    def _violation(self, label: str, count: int) -> Dict[str, Any]:
        return {
            "type": "DOMINATION_VIOLATION",
            "code": f"{label}_MINORANT_EXCEEDS_KERNEL",
            "message": f"{count} point(s) where the minorant exceeds the kernel density",
            "severity": "critical",
        }

    def _check_block(self, context: SuiteContext, mino, n_states: int, n_points: int) -> Tuple[int, int]:
        ds, hyper = context.dataset, context.hyper
        rng = context.rng(11)
        states = block_states_in_set(context, mino, n_states, rng)
        grid_theta = np.geomspace(mino.lambda_theta_star / 50.0, mino.lambda_theta_star * 20.0, n_points)
        grid_e = np.geomspace(mino.lambda_e_star / 50.0, mino.lambda_e_star * 20.0, n_points)
        h1 = mino.log_h1(grid_theta)
        h2 = mino.log_h2(grid_e)

        performed = passed = 0
        for theta, mu in states:
            rate_theta = hyper.b1 + float(v1_values(theta, mu)) / 2.0
            rate_e = hyper.b2 + (float(v2_values(theta, ds)) + ds.sse) / 2.0
            ok_theta = _dominated(log_gamma_density(mino.alpha_theta, rate_theta, grid_theta), h1)
            ok_e = _dominated(log_gamma_density(mino.alpha_e, rate_e, grid_e), h2)
            performed += 2 * n_points
            passed += int(ok_theta.sum() + ok_e.sum())
        return performed, passed

    def _check_gibbs(self, context: SuiteContext, mino, n_states: int, n_points: int) -> Tuple[int, int]:
        ds, hyper = context.dataset, context.hyper
        rng = context.rng(13)
        states = gibbs_states_in_set(context, mino, n_states, rng)
        half = np.sqrt(mino.d) + 3.0 / np.sqrt(hyper.s0 + ds.K * mino.c4)
        mu_grid = np.linspace(mino.c_l - half, mino.c_u + half, n_points)
        theta_points = ds.ybar_arr + rng.standard_normal((n_points, ds.K)) / np.sqrt(mino.c4)

        g1 = mino.log_g1(mu_grid, theta_points)
        g2 = mino.log_g2(mu_grid) + mino.log_mu_scale()

        performed = passed = 0
        for theta_prev, lt, le in states:
            w = lt + ds.m_arr * le
            mean_theta = (lt * mu_grid[:, None] + ds.m_arr * le * ds.ybar_arr) / w
            log_f_theta = log_normal_density(mean_theta, 1.0 / w, theta_points).sum(axis=1)

            precision_mu = hyper.s0 + ds.K * lt
            mean_mu = (hyper.s0 * hyper.m0 + ds.K * lt * float(np.mean(theta_prev))) / precision_mu
            log_f_mu = log_normal_density(mean_mu, 1.0 / precision_mu, mu_grid)

            performed += 2 * n_points
            passed += int(_dominated(log_f_theta, g1).sum() + _dominated(log_f_mu, g2).sum())
        return performed, passed
