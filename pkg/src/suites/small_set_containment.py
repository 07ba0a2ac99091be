"""
Small-set containment suite: states with V <= d must lie in the superset on
which the minorization was established.
"""
import time
from typing import Any, Dict, List, Tuple

import numpy as np

from ..certificates import block_minorization, gibbs_minorization
from ..config import CONTAINMENT_STATES
from ..core_model import (
    BlockDriftSpec,
    block_drift_values,
    gibbs_drift_values,
    gibbs_inverse_coefficient,
    optimal_start_block,
)
from ..errors import BurninError
from .base import BaseSuite, SuiteContext, SuiteResult

MAX_SAMPLING_ROUNDS = 200
# Gibbs precisions are drawn log-uniformly this far beyond the C_G1 and C_G2 limits
PRECISION_WIDENING = 10.0


class SmallSetContainmentSuite(BaseSuite):

    SUITE_ID = "small_set_containment"
    SUITE_NAME = "small_set_containment"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        n = context.size("containment_states", CONTAINMENT_STATES)
        issues: List[Dict[str, Any]] = []
        warnings: List[str] = []
        details: Dict[str, Any] = {}
        performed = passed = 0

        parts = [("block", self._block)]
        if context.gibbs is None:
            warnings.append("Gibbs containment skipped: assumptions fail for this prior and data")
        else:
            parts.append(("gibbs", self._gibbs))

        for name, check in parts:
            try:
                n_performed, n_passed, extra = check(context, n)
            except BurninError as exc:
                performed += 1
                issues.append(exc.to_issue())
                continue
            performed += n_performed
            passed += n_passed
            details[name] = {"states_in_S": n_performed, "outside_C": n_performed - n_passed, **extra}
            if n_performed < n:
                warnings.append(f"{name}: only {n_performed} of {n} sampled states fell in S")
            if n_passed < n_performed:
                issues.append({
                    "type": "CONTAINMENT_VIOLATION",
                    "code": f"{name.upper()}_STATE_OUTSIDE_C",
                    "message": f"{n_performed - n_passed} state(s) with V <= d fall outside the minorization set",
                    "severity": "critical",
                })

        return self._create_result(
            status=self._status(performed, passed),
            start_time=start_time,
            checks_performed=performed,
            checks_passed=passed,
            issues=issues,
            warnings=warnings,
            details=details,
        )

    def _block(self, context: SuiteContext, n: int) -> Tuple[int, int, Dict[str, Any]]:
        ds, p = context.dataset, context.block
        spec = BlockDriftSpec(p.phi1, p.phi2, p.gamma)
        mino = block_minorization(ds, context.hyper, p.phi1, p.phi2, p.d)
        theta_hat, mu_hat = optimal_start_block(spec, ds)
        scale = np.sqrt(p.d / (p.phi1 + p.phi2 * ds.min_m))
        rng = context.rng(31)

        performed = passed = 0
        for _ in range(MAX_SAMPLING_ROUNDS):
            theta = theta_hat + scale * rng.standard_normal((n, ds.K)) / np.sqrt(ds.K)
            mu = mu_hat + scale * rng.standard_normal(n)
            in_s = block_drift_values(theta, mu, spec, ds) <= p.d
            take = np.flatnonzero(in_s)[: n - performed]
            performed += take.size
            passed += int(mino.contains(theta[take], mu[take], ds).sum())
            if performed >= n:
                break
        return performed, passed, {}

    def _gibbs(self, context: SuiteContext, n: int) -> Tuple[int, int, Dict[str, Any]]:
        ds, hyper, g = context.dataset, context.hyper, context.gibbs
        cert = context.gibbs_certificate()
        mino = gibbs_minorization(ds, hyper, g.c3, g.d)
        q = gibbs_inverse_coefficient(hyper, ds.K)
        log_lo = np.log(q / (PRECISION_WIDENING * g.d))
        log_hi = np.log(PRECISION_WIDENING * mino.upper_precision)
        rng = context.rng(37)

        performed = passed = drawn_outside = 0
        for _ in range(MAX_SAMPLING_ROUNDS):
            lt = np.exp(rng.uniform(log_lo, log_hi, n))
            le = np.exp(rng.uniform(log_lo, log_hi, n))
            theta = ds.ybar_grand + np.sqrt(g.d) * rng.standard_normal((n, ds.K))
            drawn_outside += int((~(mino.in_cg1(lt) & mino.in_cg2(le))).sum())
            in_s = gibbs_drift_values(theta, lt, le, cert.spec, hyper, ds) <= g.d
            take = np.flatnonzero(in_s)[: n - performed]
            performed += take.size
            inside = mino.in_cg1(lt[take]) & mino.in_cg2(le[take]) & mino.in_cg3(theta[take], lt[take])
            passed += int(inside.sum())
            if performed >= n:
                break
        return performed, passed, {"drawn_outside_precision_box": drawn_outside}
