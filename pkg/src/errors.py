"""
Error hierarchy for the burn-in bound engine.

Every error carries a stable upper-case code. Certificate errors also carry
the violated inequality and its numeric slack so reports can say exactly how
far a parameter choice missed.
"""
from typing import Any, Dict, Optional


class BurninError(Exception):
    """Base class for all domain errors."""

    code = "BURNIN_ERROR"
    error_type = "BURNIN_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_issue(self) -> Dict[str, Any]:
        """Render as an issue entry for suite results and reports."""
        return {
            "type": self.error_type,
            "code": self.code,
            "message": self.message,
            "severity": "critical",
            "details": dict(self.details),
        }


# ============================================================================
# DATA
# ============================================================================
class DataValidationError(BurninError):
    code = "DATA_INVALID"
    error_type = "DATA_VALIDATION"


class TooFewGroups(DataValidationError):
    code = "TOO_FEW_GROUPS"


class TooFewObservations(DataValidationError):
    code = "TOO_FEW_OBSERVATIONS"


class NotBalanced(DataValidationError):
    code = "NOT_BALANCED"


class NonpositivePrecision(BurninError):
    code = "NONPOSITIVE_PRECISION"
    error_type = "DOMAIN"


class DomainViolation(BurninError):
    code = "DOMAIN_VIOLATION"
    error_type = "DOMAIN"


# ============================================================================
# CERTIFICATE PRECONDITIONS
# ============================================================================
class PreconditionViolated(BurninError):
    """A named inequality failed; slack is (rhs - lhs), negative when violated."""

    code = "PRECONDITION_VIOLATED"
    error_type = "PRECONDITION"

    def __init__(self, inequality: str, slack: float, details: Optional[Dict[str, Any]] = None):
        message = f"{inequality} violated (slack {slack:.6g})"
        merged = {"inequality": inequality, "slack": slack}
        merged.update(details or {})
        super().__init__(message, merged)
        self.inequality = inequality
        self.slack = slack


class DriftPreconditionViolated(PreconditionViolated):
    code = "DRIFT_PRECONDITION_VIOLATED"


class AssumptionViolated(PreconditionViolated):
    code = "ASSUMPTION_VIOLATED"


class EmptySmallSet(PreconditionViolated):
    code = "EMPTY_SMALL_SET"


class NonpositiveRadius(PreconditionViolated):
    code = "NONPOSITIVE_RADIUS"


class AlphaNotGreaterThanOne(PreconditionViolated):
    code = "ALPHA_NOT_GREATER_THAN_ONE"


class JLessThanOne(PreconditionViolated):
    code = "J_LESS_THAN_ONE"


class NPrimeTooSmall(PreconditionViolated):
    code = "N_PRIME_TOO_SMALL"


class BetaOutOfRange(PreconditionViolated):
    code = "BETA_OUT_OF_RANGE"


# ============================================================================
# BOUND SEARCH
# ============================================================================
class NonContractive(BurninError):
    code = "NON_CONTRACTIVE"
    error_type = "BOUND"


class TargetUnreachable(BurninError):
    code = "TARGET_UNREACHABLE"
    error_type = "BOUND"


class AllPointsInfeasible(BurninError):
    code = "ALL_POINTS_INFEASIBLE"
    error_type = "BOUND"


# ============================================================================
# NUMERICS AND CONFIGURATION
# ============================================================================
class InvalidBracket(BurninError):
    code = "INVALID_BRACKET"
    error_type = "NUMERICS"


class QuadratureFailure(BurninError):
    code = "QUADRATURE_FAILURE"
    error_type = "NUMERICS"


class ConfigError(BurninError):
    code = "CONFIG_INVALID"
    error_type = "CONFIG"
