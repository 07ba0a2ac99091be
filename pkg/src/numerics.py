"""
Numerics: special functions, scalar minimization and quadrature shared by the
certificate and bound modules.

Bound arithmetic elsewhere runs in log space, so the log-density primitives
here are the ones most callers want.
"""
import logging
import warnings
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainViolation, InvalidBracket, QuadratureFailure
from .models.schema import ToleranceConfig

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = ToleranceConfig()


# ============================================================================
# SPECIAL FUNCTIONS
# ============================================================================
def reg_lower_inc_gamma(alpha: float, x: float) -> float:
    """Regularized lower incomplete gamma P(alpha, x).

    The Gamma(alpha, rate beta) CDF at t is P(alpha, beta * t).
    """
    if not alpha > 0:
        raise DomainViolation(f"incomplete gamma shape must be positive, got {alpha}")
    if not x >= 0:
        raise DomainViolation(f"incomplete gamma argument must be nonnegative, got {x}")
    return float(special.gammainc(alpha, x))


def reg_upper_inc_gamma(alpha: float, x: float) -> float:
    """Q(alpha, x) = 1 - P(alpha, x) without cancellation in the upper tail."""
    if not alpha > 0:
        raise DomainViolation(f"incomplete gamma shape must be positive, got {alpha}")
    if not x >= 0:
        raise DomainViolation(f"incomplete gamma argument must be nonnegative, got {x}")
    return float(special.gammaincc(alpha, x))


def std_normal_cdf(x: float) -> float:
    return float(special.ndtr(x))


def log_std_normal_cdf(x: float) -> float:
    """log Phi(x), accurate far into the lower tail."""
    return float(special.log_ndtr(x))


def log_gamma_density(alpha: float, rate: float, x):
    """Log of the Gamma(alpha, rate) density; x may be a scalar or array."""
    x_arr = np.asarray(x, dtype=float)
    if not (alpha > 0 and rate > 0):
        raise DomainViolation(f"gamma density needs positive shape and rate, got ({alpha}, {rate})")
    if np.any(x_arr <= 0):
        raise DomainViolation("gamma density evaluated outside (0, inf)")
    values = (
        alpha * np.log(rate)
        - special.gammaln(alpha)
        + (alpha - 1.0) * np.log(x_arr)
        - rate * x_arr
    )
    return float(values) if values.ndim == 0 else values


def log_normal_density(mean, var, x):
    """Log of the N(mean, var) density; broadcasts over arrays."""
    var_arr = np.asarray(var, dtype=float)
    if np.any(var_arr <= 0):
        raise DomainViolation("normal density needs a positive variance")
    diff = np.asarray(x, dtype=float) - np.asarray(mean, dtype=float)
    values = -0.5 * np.log(2.0 * np.pi * var_arr) - 0.5 * diff * diff / var_arr
    return float(values) if np.ndim(values) == 0 else values


# ============================================================================
# OPTIMIZATION AND QUADRATURE
# ============================================================================
def minimize_scalar(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> Tuple[float, float]:
    """
    Minimize a unimodal function on [lo, hi].

    Returns:
        (x_min, f_min). Endpoints are compared explicitly so a monotone
        objective returns the boundary itself.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise InvalidBracket(f"invalid bracket [{lo}, {hi}]", {"lo": lo, "hi": hi})

    result = optimize.minimize_scalar(
        f,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tolerances.opt_tol},
    )
    x_min, f_min = float(result.x), float(result.fun)
    for edge in (lo, hi):
        f_edge = float(f(edge))
        if f_edge <= f_min:
            x_min, f_min = float(edge), f_edge
    logger.debug("minimize_scalar on [%g, %g] -> x=%.12g f=%.12g", lo, hi, x_min, f_min)
    return x_min, f_min


def quadrature_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    relative_only: bool = False,
    points: Optional[list] = None,
) -> float:
    """
    Adaptive quadrature of f over [lo, hi]; infinite limits are allowed.

    relative_only drops the absolute tolerance, for integrands that have been
    rescaled so their peak is of order one.
    """
    if not lo < hi:
        raise InvalidBracket(f"invalid integration range [{lo}, {hi}]", {"lo": lo, "hi": hi})

    epsabs = 0.0 if relative_only else tolerances.quad_tol
    kwargs = {"epsabs": epsabs, "epsrel": tolerances.quad_tol, "limit": 500}
    if points is not None and np.isfinite(lo) and np.isfinite(hi):
        kwargs["points"] = points

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(f, lo, hi, **kwargs)

    allowed = max(epsabs, tolerances.quad_tol * abs(value)) * 1e4
    if not np.isfinite(value) or abserr > allowed:
        raise QuadratureFailure(
            f"quadrature did not converge on [{lo}, {hi}]",
            {"value": value, "abserr": abserr},
        )
    return float(value)
