"""
Shared pieces of the validation suites: the result object, the run context
and the parameter points each suite checks.
"""
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..bounds import block_gamma_floor, gibbs_gamma_floor
from ..certificates import (
    BlockDriftCertificate,
    GibbsDriftCertificate,
    derive_block_drift,
    derive_block_drift_balanced,
    derive_gibbs_drift,
)
from ..config import RHO1_SLACK, SuiteStatus
from ..core_model import Dataset, Hyperparameters
from ..errors import BurninError
from ..models.schema import ToleranceConfig


@dataclass
class SuiteResult:
    """Standard result object for all suites."""
    suite_id: str
    suite_name: str
    status: SuiteStatus
    execution_time_ms: float = 0.0
    checks_performed: int = 0
    checks_passed: int = 0
    issues: List[Dict[str, Any]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is not SuiteStatus.FAILED

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        out = {
            "suite_id": self.suite_id,
            "suite_name": self.suite_name,
            "status": self.status.value,
            "checks_performed": self.checks_performed,
            "checks_passed": self.checks_passed,
            "issues": self.issues,
            "warnings": self.warnings,
            "details": self.details,
        }
        if include_timing:
            out["execution_time_ms"] = self.execution_time_ms
        return out


@dataclass
class BlockPoint:
    phi1: float
    phi2: float
    gamma: float
    d: float


@dataclass
class GibbsPoint:
    c3: float
    gamma: float
    d: float
    rho1_slack: float = RHO1_SLACK


@dataclass
class SuiteContext:
    """Everything a suite needs; sizes override the acceptance defaults."""
    dataset: Dataset
    hyper: Hyperparameters
    seed: int = 0
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    sizes: Dict[str, int] = field(default_factory=dict)
    block: Optional[BlockPoint] = None
    gibbs: Optional[GibbsPoint] = None

    def size(self, name: str, default: int) -> int:
        return int(self.sizes.get(name, default))

    def rng(self, offset: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed + offset)

    def block_certificate(self) -> BlockDriftCertificate:
        p = self.block
        return derive_block_drift(self.dataset, self.hyper, p.phi1, p.phi2, p.gamma)

    def balanced_block_certificate(self) -> Optional[BlockDriftCertificate]:
        """The equal-group-size form at the block point's phi and gamma; None for unequal groups."""
        if not self.dataset.balanced:
            return None
        p = self.block
        return derive_block_drift_balanced(self.dataset, self.hyper, p.phi1, p.gamma)

    def gibbs_certificate(self) -> GibbsDriftCertificate:
        p = self.gibbs
        return derive_gibbs_drift(self.dataset, self.hyper, p.c3, p.gamma, p.rho1_slack)


def default_points(dataset: Dataset, hyper: Hyperparameters, rho1_slack: float = RHO1_SLACK):
    """
    Mid-range parameter points: gamma halfway up its feasible interval and d
    at 1.5 times the smallest admissible size. The Gibbs point is None when
    the Gibbs assumptions fail for this prior and data.
    """
    phi2 = 1.0 / float(np.mean(dataset.m))
    phi1 = 0.5
    gamma = 0.5 * (1.0 + block_gamma_floor(dataset, hyper, phi1, phi2, False))
    cert = derive_block_drift(dataset, hyper, phi1, phi2, gamma)
    block = BlockPoint(phi1=phi1, phi2=phi2, gamma=gamma, d=3.0 * cert.b / (1.0 - gamma))

    try:
        c3 = 0.25 * min(hyper.b1, hyper.b2)
        g_gamma = 0.5 * (1.0 + gibbs_gamma_floor(dataset, hyper, rho1_slack))
        g_cert = derive_gibbs_drift(dataset, hyper, c3, g_gamma, rho1_slack)
        gibbs = GibbsPoint(c3=c3, gamma=g_gamma, d=3.0 * g_cert.b / (1.0 - g_gamma), rho1_slack=rho1_slack)
    except BurninError:
        gibbs = None
    return block, gibbs


class BaseSuite:
    """Common plumbing; subclasses set SUITE_ID and SUITE_NAME and implement run()."""

    SUITE_ID = "base"
    SUITE_NAME = "base"

    def run(self, context: SuiteContext) -> SuiteResult:
        raise NotImplementedError

    def _create_result(
        self,
        status: SuiteStatus,
        start_time: float,
        checks_performed: int,
        checks_passed: int,
        issues: List[Dict[str, Any]],
        warnings: List[str] = None,
        details: Dict[str, Any] = None,
    ) -> SuiteResult:
        """Create a standardized suite result."""
        return SuiteResult(
            suite_id=self.SUITE_ID,
            suite_name=self.SUITE_NAME,
            status=status,
            execution_time_ms=(time.time() - start_time) * 1000,
            checks_performed=checks_performed,
            checks_passed=checks_passed,
            issues=issues,
            warnings=warnings or [],
            details=details or {},
        )

    def _status(self, checks_performed: int, checks_passed: int) -> SuiteStatus:
        if checks_performed == 0:
            return SuiteStatus.SKIPPED
        return SuiteStatus.PASSED if checks_passed == checks_performed else SuiteStatus.FAILED
