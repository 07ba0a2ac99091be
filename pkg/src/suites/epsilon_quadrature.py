"""
Epsilon quadrature suite: closed-form minorization constants against direct
numerical integration of their minorizing densities.
"""
import time
from typing import Any, Dict, List

import numpy as np

from ..certificates import block_minorization, gibbs_epsilon_by_quadrature, gibbs_minorization
from ..config import QUADRATURE_REL_TOL
from ..errors import BurninError
from ..numerics import quadrature_1d
from .base import BaseSuite, SuiteContext, SuiteResult

D_MULTIPLIERS = (1.0, 2.0, 4.0)


def _split_integral(log_density, split: float, tolerances) -> float:
    f = lambda x: float(np.exp(log_density(x)))
    return (
        quadrature_1d(f, 0.0, split, tolerances, relative_only=True)
        + quadrature_1d(f, split, np.inf, tolerances, relative_only=True)
    )


class EpsilonQuadratureSuite(BaseSuite):

    SUITE_ID = "epsilon_quadrature"
    SUITE_NAME = "epsilon_quadrature"

    def run(self, context: SuiteContext) -> SuiteResult:
        start_time = time.time()
        issues: List[Dict[str, Any]] = []
        warnings: List[str] = []
        rows: List[Dict[str, Any]] = []
        performed = passed = 0

        # CHECK 1: block split integrals
        p = context.block
        for factor in D_MULTIPLIERS:
            d = factor * p.d
            performed += 1
            try:
                mino = block_minorization(context.dataset, context.hyper, p.phi1, p.phi2, d)
                numeric = (
                    _split_integral(mino.log_h1, mino.lambda_theta_star, context.tolerances)
                    * _split_integral(mino.log_h2, mino.lambda_e_star, context.tolerances)
                )
                rel = abs(numeric / mino.epsilon - 1.0)
                rows.append({"sampler": "block", "d": d, "epsilon": mino.epsilon, "relative_error": rel})
                if rel <= QUADRATURE_REL_TOL:
                    passed += 1
                else:
                    issues.append(self._mismatch("BLOCK", d, rel))
            except BurninError as exc:
                issues.append(exc.to_issue())

        # CHECK 2: Gibbs closed form against the reduced mu-integral
        if context.gibbs is None:
            warnings.append("Gibbs epsilon skipped: assumptions fail for this prior and data")
        else:
            g = context.gibbs
            for factor in D_MULTIPLIERS:
                d = factor * g.d
                performed += 1
                try:
                    mino = gibbs_minorization(context.dataset, context.hyper, g.c3, d)
                    log_numeric = gibbs_epsilon_by_quadrature(
                        context.dataset, context.hyper, g.c3, d, context.tolerances
                    )
                    rel = abs(float(np.expm1(log_numeric - mino.log_epsilon)))
                    rows.append({"sampler": "gibbs", "d": d, "log_epsilon": mino.log_epsilon, "relative_error": rel})
                    if rel <= QUADRATURE_REL_TOL:
                        passed += 1
                    else:
                        issues.append(self._mismatch("GIBBS", d, rel))
                except BurninError as exc:
                    issues.append(exc.to_issue())

        return self._create_result(
            status=self._status(performed, passed),
            start_time=start_time,
            checks_performed=performed,
            checks_passed=passed,
            issues=issues,
            warnings=warnings,
            details={"comparisons": rows, "rel_tol": QUADRATURE_REL_TOL},
        )

    def _mismatch(self, label: str, d: float, rel: float) -> Dict[str, Any]:
        return {
            "type": "QUADRATURE_MISMATCH",
            "code": f"{label}_EPSILON_MISMATCH",
            "message": f"{label.lower()} epsilon at d={d:.6g}: relative error {rel:.3g}",
            "severity": "critical",
        }
