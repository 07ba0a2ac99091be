# Validation suites package
from .base import BlockPoint, GibbsPoint, SuiteContext, SuiteResult, default_points
from .drift_monte_carlo import DriftMonteCarloSuite
from .epsilon_quadrature import EpsilonQuadratureSuite
from .lemma_checks import LemmaChecksSuite
from .minorization_domination import MinorizationDominationSuite
from .small_set_containment import SmallSetContainmentSuite
from .xi_moments import XiMomentsSuite

SUITES = {
    suite.SUITE_ID: suite
    for suite in (
        DriftMonteCarloSuite,
        MinorizationDominationSuite,
        LemmaChecksSuite,
        SmallSetContainmentSuite,
        EpsilonQuadratureSuite,
        XiMomentsSuite,
    )
}

__all__ = [
    "BlockPoint",
    "GibbsPoint",
    "SuiteContext",
    "SuiteResult",
    "default_points",
    "DriftMonteCarloSuite",
    "MinorizationDominationSuite",
    "LemmaChecksSuite",
    "SmallSetContainmentSuite",
    "EpsilonQuadratureSuite",
    "XiMomentsSuite",
    "SUITES",
]
