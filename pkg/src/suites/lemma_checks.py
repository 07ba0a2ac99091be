"""
Lemma checks: the scalar inequalities the certificates lean on.

- gamma-density infimum over a rate interval equals the two-piece closed form
- the quadratic-ratio inequality behind the Gibbs drift holds on random tuples
- the (gamma, b) -> (rho, L) drift conversion dominates on a grid of V
- the normal-density infimum over a mean interval sits at the far endpoint
"""
import time
from typing import Any, Dict, List

import numpy as np

from ..certificates import quadratic_ratio_holds, convert_drift, gamma_inf_threshold, normal_inf_value
from ..config import GAMMA_INF_BETA_POINTS, GAMMA_INF_TRIPLES, GAMMA_INF_X_POINTS, QUADRATIC_RATIO_TUPLES
from ..numerics import log_gamma_density, log_normal_density
from .base import BaseSuite, SuiteContext, SuiteResult

LOG_TOLERANCE = 1e-9
CONVERSION_POINTS = 1000


class LemmaChecksSuite(BaseSuite):

    SUITE_ID = "lemma_checks"
    SUITE_NAME = "lemma_checks"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        rng = context.rng(21)
        issues: List[Dict[str, Any]] = []
        details: Dict[str, Any] = {}
        performed = passed = 0

        checks = (
            ("gamma_infimum", self._gamma_infimum),
            ("quadratic_ratio", self._quadratic_ratio),
            ("drift_conversion", self._drift_conversion),
            ("normal_infimum", self._normal_infimum),
        )
        for name, check in checks:
            n_performed, n_passed = check(context, rng)
            performed += n_performed
            passed += n_passed
            details[name] = {"checks": n_performed, "violations": n_performed - n_passed}
            if n_passed < n_performed:
                issues.append({
                    "type": "LEMMA_VIOLATION",
                    "code": name.upper(),
                    "message": f"{name}: {n_performed - n_passed} of {n_performed} checks failed",
                    "severity": "critical",
                })

        return self._create_result(
            status=self._status(performed, passed),
            start_time=start_time,
            checks_performed=performed,
            checks_passed=passed,
            issues=issues,
            details=details,
        )

    def _gamma_infimum(self, context: SuiteContext, rng):
        n_triples = context.size("gamma_inf_triples", GAMMA_INF_TRIPLES)
        n_beta = context.size("gamma_inf_beta_points", GAMMA_INF_BETA_POINTS)
        n_x = context.size("gamma_inf_x_points", GAMMA_INF_X_POINTS)
        performed = passed = 0
        for _ in range(n_triples):
            alpha = 1.0 + rng.exponential(5.0)
            b = float(np.exp(rng.uniform(-3.0, 3.0)))
            c = float(np.exp(rng.uniform(-3.0, 3.0)))
            x_star = gamma_inf_threshold(alpha, b, c)
            xs = np.geomspace(x_star / 20.0, x_star * 20.0, n_x)
            rates = np.linspace(b, b + c / 2.0, n_beta)
            grid_inf = np.min(
                [log_gamma_density(alpha, rate, xs) for rate in rates], axis=0
            )
            closed = np.where(
                xs <= x_star,
                log_gamma_density(alpha, b, xs),
                log_gamma_density(alpha, b + c / 2.0, xs),
            )
            ok = np.abs(grid_inf - closed) <= LOG_TOLERANCE * np.maximum(1.0, np.abs(closed))
            performed += n_x
            passed += int(ok.sum())
        return performed, passed

    def _quadratic_ratio(self, context: SuiteContext, rng):
        n = context.size("quadratic_ratio_tuples", QUADRATIC_RATIO_TUPLES)
        b = np.exp(rng.uniform(-4.0, 4.0, n))
        a = b * rng.uniform(1.0, 5.0, n)
        x = np.exp(rng.uniform(-6.0, 6.0, n))
        y = np.exp(rng.uniform(-6.0, 6.0, n))
        # a/b in [1, 5)
        ok = [quadratic_ratio_holds(a[i], b[i], x[i], y[i]) for i in range(n)]
        return n, int(np.sum(ok))

    def _drift_conversion(self, context: SuiteContext, rng):
        performed = passed = 0
        for gamma in (0.1, 0.4, 0.7, 0.95):
            for b in (0.01, 1.0, 50.0):
                for a in (0.25, 1.0, 4.0):
                    geo = convert_drift(gamma, b, a)
                    v = np.linspace(0.0, 10.0 * geo.d_C, CONVERSION_POINTS)
                    ok = geo.dominates(v)
                    performed += v.size
                    passed += int(ok.sum())
        return performed, passed

    def _normal_infimum(self, context: SuiteContext, rng):
        performed = passed = 0
        for _ in range(20):
            lo = rng.normal()
            hi = lo + rng.exponential(2.0)
            sigma2 = float(np.exp(rng.uniform(-2.0, 2.0)))
            taus = np.linspace(lo, hi, 501)
            for x in np.linspace(lo - 3.0, hi + 3.0, 50):
                grid_inf = float(np.exp(np.min(log_normal_density(taus, sigma2, x))))
                closed = normal_inf_value(lo, hi, sigma2, float(x))
                performed += 1
                passed += int(abs(grid_inf - closed) <= 1e-12 + 1e-9 * closed)
        return performed, passed
