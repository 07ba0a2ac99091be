"""
Certificates: drift and minorization constants for the block Gibbs and Gibbs
samplers, and the conversion of a (gamma, b) drift into (rho, L) form.

Every derivation checks its preconditions and fails with the violated
inequality named together with its numeric slack. Nothing is adjusted
silently.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import special

from .config import GIBBS_BALANCE_RATIO, DRIFT_CONVERSION_A, RHO1_SLACK
from .core_model import (
    BlockDriftSpec,
    Dataset,
    GibbsDriftSpec,
    Hyperparameters,
    gibbs_inverse_coefficient,
    v1_values,
    v2_values,
)
from .errors import (
    AlphaNotGreaterThanOne,
    AssumptionViolated,
    DomainViolation,
    DriftPreconditionViolated,
    EmptySmallSet,
    NonpositiveRadius,
    NotBalanced,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    log_gamma_density,
    log_normal_density,
    quadrature_1d,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)

logger = logging.getLogger(__name__)


# ============================================================================
# BLOCK GIBBS DRIFT
# ============================================================================

@dataclass
class BlockDriftCertificate:
    spec: BlockDriftSpec
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    delta5: float
    delta: float
    c1: float
    c2: float
    b: float
    balanced: bool
    delta_hull: float
    precondition_slack: float

    @property
    def gamma(self) -> float:
        return self.spec.gamma

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "block",
            "formula": "balanced" if self.balanced else "unbalanced",
            "phi1": self.spec.phi1,
            "phi2": self.spec.phi2,
            "gamma": self.spec.gamma,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "delta4": self.delta4,
            "delta5": self.delta5,
            "delta": self.delta,
            "c1": self.c1,
            "c2": self.c2,
            "Delta": self.delta_hull,
            "b": self.b,
            "precondition_slack": self.precondition_slack,
        }


def _block_constants(dataset: Dataset, hyper: Hyperparameters) -> Dict[str, float]:
    K, M = dataset.K, dataset.M
    delta1 = 1.0 / (2.0 * hyper.a1 + K - 2.0)
    delta2 = 1.0 / (2.0 * hyper.a2 + M - 2.0)
    return {
        "delta1": delta1,
        "delta2": delta2,
        "delta3": (K + 1.0) * delta2,
        "delta4": delta2 * dataset.sum_inv_m,
        "delta5": K * delta2,
        "delta": max(delta1, (K + 1.0) * delta2),
        "c1": 2.0 * hyper.b1 * delta1,
        "c2": (2.0 * hyper.b2 + dataset.sse) * delta2,
    }


def _check_gamma_range(gamma: float, lower: float, label: str, error=DriftPreconditionViolated) -> None:
    if not gamma > lower:
        raise error(f"gamma > {label}", gamma - lower, {"gamma": gamma, label: lower})
    if not gamma < 1:
        raise error("gamma < 1", 1.0 - gamma, {"gamma": gamma})


def derive_block_drift(
    dataset: Dataset, hyper: Hyperparameters, phi1: float, phi2: float, gamma: float
) -> BlockDriftCertificate:
    """Drift for V1 = phi1 v1 + phi2 v2 with arbitrary group sizes."""
    k = _block_constants(dataset, hyper)
    _check_gamma_range(gamma, k["delta"], "delta")

    lhs = phi1 * k["delta4"] / phi2 + k["delta"]
    if not lhs < gamma:
        raise DriftPreconditionViolated(
            "phi1*delta4/phi2 + delta < gamma", gamma - lhs, {"lhs": lhs, "gamma": gamma}
        )

    hull = dataset.delta(hyper.m0)
    b = (
        phi1 * (k["c1"] + k["c2"] * dataset.sum_inv_m + dataset.K * hull ** 2)
        + phi2 * (k["c2"] * (dataset.K + 1) + dataset.M * hull ** 2)
    )
    return BlockDriftCertificate(
        spec=BlockDriftSpec(phi1=phi1, phi2=phi2, gamma=gamma),
        b=float(b),
        balanced=False,
        delta_hull=hull,
        precondition_slack=gamma - lhs,
        **k,
    )


def derive_block_drift_balanced(
    dataset: Dataset, hyper: Hyperparameters, phi: float, gamma: float
) -> BlockDriftCertificate:
    """Drift for V2 = phi v1 + v2/m when every group has m observations."""
    if not dataset.balanced:
        raise NotBalanced(f"balanced drift needs equal group sizes, got m={list(dataset.m)}")
    k = _block_constants(dataset, hyper)
    _check_gamma_range(gamma, k["delta"], "delta")

    lhs = phi * k["delta5"] + k["delta"]
    if not lhs < gamma:
        raise DriftPreconditionViolated(
            "phi*delta5 + delta < gamma", gamma - lhs, {"lhs": lhs, "gamma": gamma}
        )

    K, m = dataset.K, dataset.m[0]
    ybar = dataset.ybar_arr
    center = dataset.ybar_groupmean
    spread = np.maximum((center - ybar) ** 2, (hyper.m0 - ybar) ** 2).sum()
    b = phi * k["c1"] + (phi * K + K + 1.0) / m * k["c2"] + max(phi, 1.0) * spread
    return BlockDriftCertificate(
        spec=BlockDriftSpec(phi1=phi, phi2=1.0 / m, gamma=gamma),
        b=float(b),
        balanced=True,
        delta_hull=dataset.delta(hyper.m0),
        precondition_slack=gamma - lhs,
        **k,
    )


# ============================================================================
# GIBBS DRIFT
# ============================================================================

@dataclass
class GibbsDriftCertificate:
    spec: GibbsDriftSpec
    delta1: float
    delta6: float
    delta7: float
    rho1_limit: float
    rho1: float
    b: float
    legacy_conditions: Dict[str, bool] = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return self.spec.gamma

    @property
    def c3(self) -> float:
        return self.spec.c3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "gibbs",
            "c3": self.spec.c3,
            "gamma": self.spec.gamma,
            "delta1": self.delta1,
            "delta6": self.delta6,
            "delta7": self.delta7,
            "rho1_limit": self.rho1_limit,
            "rho1": self.rho1,
            "b": self.b,
            "legacy_conditions": dict(self.legacy_conditions),
        }


def derive_gibbs_drift(
    dataset: Dataset,
    hyper: Hyperparameters,
    c3: float,
    gamma: float,
    rho1_slack: float = RHO1_SLACK,
) -> GibbsDriftCertificate:
    """Drift for V3 under the Gibbs kernel (exponent N of the b-formula read as M)."""
    if not hyper.a1 > 1.5:
        raise AssumptionViolated("a1 > 3/2", hyper.a1 - 1.5)
    balance = GIBBS_BALANCE_RATIO * dataset.min_m - dataset.max_m
    if not balance > 0:
        raise AssumptionViolated("5 m' > m''", float(balance))
    if not c3 > 0:
        raise AssumptionViolated("c3 > 0", c3)
    c3_cap = min(hyper.b1, hyper.b2)
    if not c3 < c3_cap:
        raise AssumptionViolated("c3 < min(b1, b2)", c3_cap - c3)

    K, M = dataset.K, dataset.M
    delta1 = 1.0 / (2.0 * hyper.a1 + K - 2.0)
    kk = K * K + 2.0 * K * hyper.a1
    delta6 = kk / (2.0 * hyper.s0 * hyper.b1 + kk)
    delta7 = 1.0 / (2.0 * (hyper.a1 - 1.0))
    rho1_limit = (K + delta6 / delta7) * delta1
    rho1 = rho1_limit + rho1_slack
    if not rho1 < 1:
        raise AssumptionViolated("rho1 < 1", 1.0 - rho1, {"rho1_limit": rho1_limit})
    _check_gamma_range(
        gamma, max(rho1, delta6, delta7), "max(rho1, delta6, delta7)", error=AssumptionViolated
    )

    ybar = dataset.ybar_grand
    b = (
        (hyper.b1 / (hyper.b1 - c3)) ** (hyper.a1 + K / 2.0)
        + (hyper.b2 / (hyper.b2 - c3)) ** (hyper.a2 + M / 2.0)
        + (delta6 + delta7) * (1.0 / hyper.s0 + (hyper.m0 - ybar) ** 2 + dataset.s2 / K)
        + 2.0 * hyper.b1 * delta7 / K
    )
    legacy = {
        "a1 >= (3K-2)/(2K-2)": hyper.a1 >= (3.0 * K - 2.0) / (2.0 * K - 2.0),
        "m' > (sqrt(5)-2) m''": dataset.min_m > (np.sqrt(5.0) - 2.0) * dataset.max_m,
    }
    return GibbsDriftCertificate(
        spec=GibbsDriftSpec(c3=c3, gamma=gamma, rho1_slack=rho1_slack),
        delta1=delta1,
        delta6=delta6,
        delta7=delta7,
        rho1_limit=rho1_limit,
        rho1=rho1,
        b=float(b),
        legacy_conditions=legacy,
    )


# ============================================================================
# MINORIZATION
# ============================================================================

def gamma_inf_threshold(alpha: float, b: float, c: float) -> float:
    """
    Crossing point x* of the Gamma(alpha, b) and Gamma(alpha, b + c/2)
    densities. Below x* the rate-b density is the infimum over rates in
    [b, b + c/2]; above it the rate-(b + c/2) density is.
    """
    if not alpha > 1:
        raise AlphaNotGreaterThanOne("alpha > 1", alpha - 1.0)
    if not (b > 0 and c >= 0):
        raise DomainViolation(f"threshold needs b > 0 and c >= 0, got ({b}, {c})")
    if c == 0:
        return alpha / b
    return float(2.0 * alpha / c * np.log1p(c / (2.0 * b)))


@dataclass
class MinorizationCertificate:
    d: float
    epsilon: float
    log_epsilon: float

    def base_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "epsilon": self.epsilon, "log_epsilon": self.log_epsilon}


@dataclass
class BlockMinorizationCertificate(MinorizationCertificate):
    phi1: float = 0.0
    phi2: float = 0.0
    lambda_theta_star: float = 0.0
    lambda_e_star: float = 0.0
    integral_theta: float = 0.0
    integral_e: float = 0.0
    alpha_theta: float = 0.0
    rates_theta: tuple = (0.0, 0.0)
    alpha_e: float = 0.0
    rates_e: tuple = (0.0, 0.0)

    def log_h1(self, x):
        """Pointwise minorant of the lambda_theta conditional over the small set."""
        x = np.asarray(x, dtype=float)
        low = log_gamma_density(self.alpha_theta, self.rates_theta[0], x)
        high = log_gamma_density(self.alpha_theta, self.rates_theta[1], x)
        return np.where(x <= self.lambda_theta_star, low, high)

    def log_h2(self, x):
        x = np.asarray(x, dtype=float)
        low = log_gamma_density(self.alpha_e, self.rates_e[0], x)
        high = log_gamma_density(self.alpha_e, self.rates_e[1], x)
        return np.where(x <= self.lambda_e_star, low, high)

    def contains(self, theta, mu, dataset: Dataset) -> np.ndarray:
        """Membership in {phi1 v1 < d} and {v2 < d/phi2}."""
        return (self.phi1 * v1_values(theta, mu) < self.d) & (v2_values(theta, dataset) < self.d / self.phi2)

    def to_dict(self) -> Dict[str, Any]:
        out = self.base_dict()
        out.update({
            "kind": "block",
            "lambda_theta_star": self.lambda_theta_star,
            "lambda_e_star": self.lambda_e_star,
            "integral_theta": self.integral_theta,
            "integral_e": self.integral_e,
        })
        return out


def block_minorization(
    dataset: Dataset, hyper: Hyperparameters, phi1: float, phi2: float, d: float
) -> BlockMinorizationCertificate:
    """epsilon_B as a product of two split incomplete-gamma integrals."""
    if not d > 0:
        raise NonpositiveRadius("d > 0", d)

    alpha_theta = dataset.K / 2.0 + hyper.a1
    rate_theta = (hyper.b1, d / (2.0 * phi1) + hyper.b1)
    lt_star = gamma_inf_threshold(alpha_theta, hyper.b1, d / phi1)
    integral_theta = (
        reg_lower_inc_gamma(alpha_theta, rate_theta[0] * lt_star)
        + reg_upper_inc_gamma(alpha_theta, rate_theta[1] * lt_star)
    )

    alpha_e = dataset.M / 2.0 + hyper.a2
    base_e = dataset.sse / 2.0 + hyper.b2
    rate_e = (base_e, (phi2 * dataset.sse + d) / (2.0 * phi2) + hyper.b2)
    le_star = gamma_inf_threshold(alpha_e, base_e, d / phi2)
    integral_e = (
        reg_lower_inc_gamma(alpha_e, rate_e[0] * le_star)
        + reg_upper_inc_gamma(alpha_e, rate_e[1] * le_star)
    )

    log_eps = float(np.log(integral_theta) + np.log(integral_e))
    logger.debug("block minorization d=%.6g eps=%.6g", d, np.exp(log_eps))
    return BlockMinorizationCertificate(
        d=d,
        epsilon=float(np.exp(log_eps)),
        log_epsilon=log_eps,
        phi1=phi1,
        phi2=phi2,
        lambda_theta_star=lt_star,
        lambda_e_star=le_star,
        integral_theta=integral_theta,
        integral_e=integral_e,
        alpha_theta=alpha_theta,
        rates_theta=rate_theta,
        alpha_e=alpha_e,
        rates_e=rate_e,
    )


@dataclass
class GibbsMinorizationCertificate(MinorizationCertificate):
    c3: float = 0.0
    c4: float = 0.0
    c_l: float = 0.0
    c_u: float = 0.0
    v: float = 0.0
    m_l: float = 0.0
    m_u: float = 0.0
    log_d: float = 0.0
    dataset: Optional[Dataset] = field(default=None, repr=False)
    hyper: Optional[Hyperparameters] = field(default=None, repr=False)

    @property
    def upper_precision(self) -> float:
        """log(d)/c3, the largest precision allowed on the small set."""
        return self.log_d / self.c3

    def mu_mean(self, theta, lambda_theta):
        theta_bar = np.mean(np.asarray(theta, dtype=float), axis=-1)
        lt = np.asarray(lambda_theta, dtype=float)
        K = self.dataset.K
        return (self.hyper.s0 * self.hyper.m0 + K * lt * theta_bar) / (self.hyper.s0 + K * lt)

    def in_cg1(self, lambda_theta):
        lt = np.asarray(lambda_theta, dtype=float)
        return (lt >= self.c4) & (lt <= self.upper_precision)

    def in_cg2(self, lambda_e):
        le = np.asarray(lambda_e, dtype=float)
        return (le > 0) & (le <= self.upper_precision)

    def in_cg3(self, theta, lambda_theta):
        mean = self.mu_mean(theta, lambda_theta)
        return (mean >= self.c_l) & (mean <= self.c_u)

    def log_g1(self, mu, theta):
        """log g1; mu has shape (n,), theta (n, K)."""
        theta = np.asarray(theta, dtype=float)
        mu = np.asarray(mu, dtype=float)
        ds = self.dataset
        quad = np.sum((theta - mu[..., None]) ** 2 + ds.m_arr * (theta - ds.ybar_arr) ** 2, axis=-1)
        return 0.5 * ds.K * np.log(self.c4 / (2.0 * np.pi)) - self.upper_precision / 2.0 * quad

    def log_g2(self, mu):
        mu = np.asarray(mu, dtype=float)
        var = 1.0 / (self.hyper.s0 + self.dataset.K * self.upper_precision)
        center = np.where(mu <= self.dataset.ybar_grand, self.c_u, self.c_l)
        return log_normal_density(center, var, mu)

    def log_mu_scale(self) -> float:
        """log of the square-root factor multiplying g2."""
        K = self.dataset.K
        return 0.5 * (
            np.log(self.hyper.s0 + K * self.c4) - np.log(self.hyper.s0 + K * self.upper_precision)
        )

    def to_dict(self) -> Dict[str, Any]:
        out = self.base_dict()
        out.update({
            "kind": "gibbs",
            "c3": self.c3,
            "c4": self.c4,
            "c_l": self.c_l,
            "c_u": self.c_u,
            "v": self.v,
            "m_l": self.m_l,
            "m_u": self.m_u,
        })
        return out


def _gibbs_split_constants(dataset: Dataset, hyper: Hyperparameters, c3: float, d: float) -> Dict[str, float]:
    q = gibbs_inverse_coefficient(hyper, dataset.K)
    threshold = c3 * q
    if not (d > 1 and d * np.log(d) > threshold):
        value = d * np.log(d) if d > 0 else -np.inf
        raise EmptySmallSet(
            "d log d > c3 delta7/(K delta1)", float(value - threshold), {"d": d, "threshold": threshold}
        )
    log_d = float(np.log(d))
    K, s0, m0 = dataset.K, hyper.s0, hyper.m0
    ybar = dataset.ybar_grand
    half_width = np.sqrt((m0 - ybar) ** 2 + d)
    c_l, c_u = ybar - half_width, ybar + half_width
    w = dataset.m_arr / (1.0 + dataset.m_arr)
    scale = log_d / c3
    v = 1.0 / (s0 + scale * (K + w.sum()))
    weighted = float(np.dot(w, dataset.ybar_arr))
    return {
        "c4": q / d,
        "c_l": float(c_l),
        "c_u": float(c_u),
        "v": float(v),
        "m_l": float(v * (c_l * s0 + scale * (K * c_l + weighted))),
        "m_u": float(v * (c_u * s0 + scale * (K * c_u + weighted))),
        "log_d": log_d,
    }


def _gibbs_log_prefactor(dataset: Dataset, c3: float, k: Dict[str, float]) -> float:
    """(c4 c3 / log d)^{K/2} prod (1 + m_i)^{-1/2}, in logs."""
    return float(
        0.5 * dataset.K * np.log(k["c4"] * c3 / k["log_d"]) - 0.5 * np.sum(np.log1p(dataset.m_arr))
    )


def gibbs_minorization(
    dataset: Dataset, hyper: Hyperparameters, c3: float, d: float
) -> GibbsMinorizationCertificate:
    """Closed-form epsilon_G, evaluated in log space."""
    k = _gibbs_split_constants(dataset, hyper, c3, d)
    K, s0 = dataset.K, hyper.s0
    scale = k["log_d"] / c3
    ybar = dataset.ybar_grand
    w = dataset.m_arr / (1.0 + dataset.m_arr)
    sqrt_v = np.sqrt(k["v"])

    def branch(center: float, mean: float) -> float:
        return -center ** 2 * s0 / 2.0 - K * center ** 2 * scale / 2.0 + mean ** 2 / (2.0 * k["v"])

    log_upper = branch(k["c_u"], k["m_u"]) + special.log_ndtr((ybar - k["m_u"]) / sqrt_v)
    log_lower = branch(k["c_l"], k["m_l"]) + special.log_ndtr(-(ybar - k["m_l"]) / sqrt_v)

    log_eps = float(
        0.5 * np.log(k["v"] * (s0 + K * k["c4"]))
        + _gibbs_log_prefactor(dataset, c3, k)
        - scale / 2.0 * float(np.dot(w, dataset.ybar_arr ** 2))
        + special.logsumexp([log_upper, log_lower])
    )
    logger.debug("gibbs minorization d=%.6g log eps=%.6g", d, log_eps)
    return GibbsMinorizationCertificate(
        d=d,
        epsilon=float(np.exp(log_eps)),
        log_epsilon=log_eps,
        c3=c3,
        dataset=dataset,
        hyper=hyper,
        **k,
    )


def gibbs_epsilon_by_quadrature(
    dataset: Dataset, hyper: Hyperparameters, c3: float, d: float, tolerances=DEFAULT_TOLERANCES
) -> float:
    """
    log epsilon_G from the reduced one-dimensional mu-integral, integrated
    numerically over the two half-lines split at the grand mean.
    """
    k = _gibbs_split_constants(dataset, hyper, c3, d)
    K, s0 = dataset.K, hyper.s0
    scale = k["log_d"] / c3
    precision = s0 + K * scale
    ybar = dataset.ybar_grand
    w = dataset.m_arr / (1.0 + dataset.m_arr)
    ybars = dataset.ybar_arr

    def log_integrand(mu: float, center: float) -> float:
        return (
            log_normal_density(center, 1.0 / precision, mu)
            - scale / 2.0 * float(np.dot(w, (mu - ybars) ** 2))
        )

    peak_upper = log_integrand(min(k["m_u"], ybar), k["c_u"])
    peak_lower = log_integrand(max(k["m_l"], ybar), k["c_l"])
    shift = max(peak_upper, peak_lower)
    reach = max(abs(ybar - k["m_u"]), abs(ybar - k["m_l"])) + 40.0 * np.sqrt(k["v"])

    left = quadrature_1d(
        lambda mu: np.exp(log_integrand(mu, k["c_u"]) - shift), ybar - reach, ybar, tolerances, relative_only=True
    )
    right = quadrature_1d(
        lambda mu: np.exp(log_integrand(mu, k["c_l"]) - shift), ybar, ybar + reach, tolerances, relative_only=True
    )
    return float(
        0.5 * (np.log(s0 + K * k["c4"]) - np.log(precision))
        + _gibbs_log_prefactor(dataset, c3, k)
        + shift
        + np.log(left + right)
    )


def normal_inf_value(a: float, b: float, sigma2: float, x: float) -> float:
    """Infimum over tau in [a, b] of the N(tau, sigma2) density at x."""
    if not a <= b:
        raise DomainViolation(f"invalid interval [{a}, {b}]")
    if not sigma2 > 0:
        raise DomainViolation(f"variance must be positive, got {sigma2}")
    center = b if x <= (a + b) / 2.0 else a
    return float(np.exp(log_normal_density(center, sigma2, x)))


# ============================================================================
# DRIFT CONVERSION
# ============================================================================

@dataclass
class GeometricDriftCertificate:
    """E W(X1) <= rho W(x) + L 1{W(x) <= d_C} with W = 1 + V."""
    rho: float
    L: float
    d_C: float
    a: float
    gamma: float
    b: float

    def dominates(self, v) -> np.ndarray:
        """Check gamma(1+v) + b + (1-gamma) <= rho(1+v) + L 1{1+v <= d_C}."""
        w = 1.0 + np.asarray(v, dtype=float)
        lhs = self.gamma * w + self.b + (1.0 - self.gamma)
        rhs = self.rho * w + self.L * (w <= self.d_C)
        return lhs <= rhs * (1.0 + 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        return {"rho": self.rho, "L": self.L, "d_C": self.d_C, "a": self.a}


def convert_drift(gamma: float, b: float, a: float = DRIFT_CONVERSION_A) -> GeometricDriftCertificate:
    if not 0 < gamma < 1:
        raise DomainViolation(f"gamma must lie in (0, 1), got {gamma}")
    if not (np.isfinite(b) and b >= 0):
        raise DomainViolation(f"b must be finite and nonnegative, got {b}")
    if not a > 0:
        raise DomainViolation(f"conversion parameter a must be positive, got {a}")
    rho = (a + gamma) / (a + 1.0)
    L = b + (1.0 - gamma)
    d_C = (a + 1.0) * L / (a * (1.0 - rho))
    return GeometricDriftCertificate(rho=rho, L=L, d_C=d_C, a=a, gamma=gamma, b=b)


def quadratic_ratio_holds(a: float, b: float, x: float, y: float) -> bool:
    """True iff 5b > a >= b > 0, x, y > 0 and (ax/(ax+y))^2 + (y/(bx+y))^2 < 1."""
    if not (5.0 * b > a >= b > 0 and x > 0 and y > 0):
        return False
    return (a * x / (a * x + y)) ** 2 + (y / (b * x + y)) ** 2 < 1.0
