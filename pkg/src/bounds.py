"""
Bounds: total-variation upper bounds from drift and minorization constants,
the search for a sufficient burn-in n*, and grid optimization of the free
parameters.

All bound arithmetic runs in log space: n* reaches 10^19 and epsilon goes far
below 10^-17 in realistic settings.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import (
    block_minorization,
    convert_drift,
    derive_block_drift,
    derive_block_drift_balanced,
    derive_gibbs_drift,
    gibbs_minorization,
)
from .config import (
    INT64_LIMIT,
    DRIFT_CONVERSION_A,
    N_STAR_SEARCH_CEILING,
    RHO1_SLACK,
    GridMode,
    SamplerKind,
    TheoremKind,
)
from .core_model import (
    Dataset,
    Hyperparameters,
    eval_block_drift,
    eval_gibbs_drift,
    block_start_state,
    optimal_start_gibbs,
)
from .errors import (
    AllPointsInfeasible,
    BetaOutOfRange,
    BurninError,
    DomainViolation,
    JLessThanOne,
    NonContractive,
    NPrimeTooSmall,
    PreconditionViolated,
    TargetUnreachable,
)
from .models.schema import ToleranceConfig
from .numerics import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)


# ============================================================================
# THEOREM 3.1 (ROSENTHAL)
# ============================================================================

@dataclass
class RosenthalInputs:
    gamma: float
    b: float
    epsilon: float
    d_R: float
    r: float
    V0: float

    def validate(self) -> "RosenthalInputs":
        if not 0 < self.gamma < 1:
            raise PreconditionViolated("0 < gamma < 1", min(self.gamma, 1.0 - self.gamma))
        threshold = 2.0 * self.b / (1.0 - self.gamma)
        if not self.d_R > threshold:
            raise PreconditionViolated("d_R > 2b/(1-gamma)", self.d_R - threshold)
        if not 0 < self.r < 1:
            raise PreconditionViolated("0 < r < 1", min(self.r, 1.0 - self.r))
        if not 0 < self.epsilon <= 1:
            raise PreconditionViolated("0 < epsilon <= 1", min(self.epsilon, 1.0 - self.epsilon))
        if not self.V0 >= 0:
            raise PreconditionViolated("V0 >= 0", self.V0)
        return self

    @property
    def alpha(self) -> float:
        return (1.0 + self.d_R) / (1.0 + 2.0 * self.b + self.gamma * self.d_R)

    @property
    def U(self) -> float:
        return 1.0 + 2.0 * (self.gamma * self.d_R + self.b)

    def log_factors(self) -> Dict[str, float]:
        """Per-step log contraction of the coupling and drift terms."""
        return {
            "coupling": self.r * float(np.log1p(-self.epsilon)),
            "drift": self.r * np.log(self.U) - (1.0 - self.r) * np.log(self.alpha),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "b": self.b,
            "epsilon": self.epsilon,
            "d_R": self.d_R,
            "r": self.r,
            "V0": self.V0,
        }


def rosenthal_bound(inp: RosenthalInputs, n: float) -> float:
    """(1-eps)^{rn} + (U^r / alpha^{1-r})^n (1 + b/(1-gamma) + V0)."""
    inp.validate()
    factors = inp.log_factors()
    log_coupling = 0.0 if n == 0 else float(n) * factors["coupling"]
    log_drift = float(n) * factors["drift"] + np.log(1.0 + inp.b / (1.0 - inp.gamma) + inp.V0)
    return max(0.0, float(np.exp(log_coupling) + np.exp(log_drift)))


# ============================================================================
# THEOREM 3.2 (ROBERTS-TWEEDIE)
# ============================================================================

@dataclass
class RTInputs:
    rho: float
    L: float
    epsilon: float
    d_RT: float
    W0: float
    beta: Optional[float] = None

    def validate(self) -> "RTInputs":
        if not 0 < self.rho < 1:
            raise PreconditionViolated("0 < rho < 1", min(self.rho, 1.0 - self.rho))
        if not self.L > 0:
            raise PreconditionViolated("L > 0", self.L)
        if not 0 < self.epsilon < 1:
            raise PreconditionViolated("0 < epsilon < 1", min(self.epsilon, 1.0 - self.epsilon))
        floor = self.L / (1.0 - self.rho) - 1.0
        if not self.d_RT >= floor:
            raise PreconditionViolated("d_RT >= L/(1-rho) - 1", self.d_RT - floor)
        if not self.W0 >= 1:
            raise PreconditionViolated("W0 >= 1", self.W0 - 1.0)
        if not self.kappa < 1:
            raise PreconditionViolated("kappa < 1", 1.0 - self.kappa)
        if not self.J >= 1:
            raise JLessThanOne("J >= 1", self.J - 1.0)
        return self

    @property
    def kappa(self) -> float:
        return self.rho + self.L / (1.0 + self.d_RT)

    @property
    def J(self) -> float:
        d = self.d_RT
        return ((self.kappa * d - self.epsilon) * (1.0 + d) + self.L * d) / ((1.0 + d) * self.kappa)

    @property
    def log_one_minus_eps(self) -> float:
        return float(np.log1p(-self.epsilon))

    @property
    def zeta(self) -> float:
        return float(np.log(0.5 * (self.L / (1.0 - self.rho) + self.W0)) / -np.log(self.kappa))

    @property
    def eta(self) -> float:
        return float((np.log(self.J) - self.log_one_minus_eps) / -np.log(self.kappa))

    @property
    def log_beta_rt(self) -> float:
        return float(
            np.log(self.kappa) * self.log_one_minus_eps / (np.log(self.J) - self.log_one_minus_eps)
        )

    @property
    def beta_rt(self) -> float:
        return float(np.exp(self.log_beta_rt))

    def constants(self) -> Dict[str, float]:
        return {
            "kappa": self.kappa,
            "J": self.J,
            "zeta": self.zeta,
            "eta": self.eta,
            "beta_RT": self.beta_rt,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rho": self.rho,
            "L": self.L,
            "epsilon": self.epsilon,
            "d_RT": self.d_RT,
            "W0": self.W0,
            "beta": self.beta,
        }


def rt_bound(inp: RTInputs, k: float) -> float:
    """Roberts-Tweedie bound at iteration k; beta defaults to the approximate minimizer."""
    inp.validate()
    eta = inp.eta
    n_prime = float(k) - inp.zeta
    floor = eta * (1.0 - inp.epsilon) / inp.epsilon
    if not n_prime > floor:
        raise NPrimeTooSmall("n' > eta(1-eps)/eps", n_prime - floor, {"k": k})

    log_growth = float(np.log1p(eta / n_prime)) / eta
    if inp.beta is None:
        log_beta = max(0.0, inp.log_beta_rt - log_growth)
    else:
        if not 1.0 <= inp.beta < inp.beta_rt:
            raise BetaOutOfRange(
                "1 <= beta < beta_RT", min(inp.beta - 1.0, inp.beta_rt - inp.beta)
            )
        log_beta = float(np.log(inp.beta))

    head = log_beta + inp.log_one_minus_eps - log_growth
    if head >= 0:
        return 0.0
    log_value = (
        np.log(-np.expm1(head))
        + np.log1p(n_prime / eta)
        + (n_prime / eta) * np.log1p(eta / n_prime)
        - n_prime * log_beta
    )
    return max(0.0, float(np.exp(log_value)))


# ============================================================================
# EVALUATORS AND THE BURN-IN SEARCH
# ============================================================================

class RosenthalEvaluator:
    theorem = TheoremKind.ROSENTHAL

    def __init__(self, inputs: RosenthalInputs):
        self.inputs = inputs.validate()

    def log_geometric_factors(self) -> Dict[str, float]:
        return self.inputs.log_factors()

    def min_n(self) -> int:
        return 0

    def value(self, n: float) -> float:
        return rosenthal_bound(self.inputs, n)

    def constants(self) -> Dict[str, float]:
        return {"alpha": self.inputs.alpha, "U": self.inputs.U}


class RTEvaluator:
    theorem = TheoremKind.ROBERTS_TWEEDIE

    def __init__(self, inputs: RTInputs):
        self.inputs = inputs.validate()

    def log_geometric_factors(self) -> Dict[str, float]:
        return {"beta_RT^-1": -self.inputs.log_beta_rt}

    def min_n(self) -> int:
        inp = self.inputs
        return max(0, int(np.floor(inp.zeta + inp.eta * (1.0 - inp.epsilon) / inp.epsilon)) + 1)

    def value(self, n: float) -> float:
        return rt_bound(self.inputs, n)

    def constants(self) -> Dict[str, float]:
        return self.inputs.constants()


@dataclass
class BurninResult:
    theorem: TheoremKind
    n_star: int
    bound_at_n_star: float
    target_tv: float
    geometric_factors: Dict[str, float]
    inputs: Dict[str, Any]
    constants: Dict[str, float]

    @property
    def n_star_str(self) -> str:
        return str(self.n_star)

    def to_dict(self) -> Dict[str, Any]:
        n_star = self.n_star if self.n_star < INT64_LIMIT else self.n_star_str
        return {
            "theorem": self.theorem.value,
            "n_star": n_star,
            "n_star_decimal": self.n_star_str,
            "bound_at_n_star": self.bound_at_n_star,
            "target_tv": self.target_tv,
            "geometric_factors": dict(self.geometric_factors),
            "inputs": dict(self.inputs),
            "constants": dict(self.constants),
        }


def find_burnin(evaluator, target_tv: float) -> BurninResult:
    """
    Smallest integer n with bound(n) <= target_tv: exponential doubling, then
    bisection over integers on the monotone tail.
    """
    if not 0 < target_tv < 1:
        raise DomainViolation(f"target_tv must lie in (0, 1), got {target_tv}")

    log_factors = evaluator.log_geometric_factors()
    for name, log_factor in log_factors.items():
        if not log_factor < 0:
            raise NonContractive(
                f"per-step factor '{name}' = {np.exp(log_factor):.6g} is not below 1",
                {"factor": name, "log_factor": log_factor},
            )

    n0 = evaluator.min_n()
    if evaluator.value(n0) <= target_tv:
        n_star = n0
    else:
        lo, step = n0, 1
        hi = n0 + step
        while evaluator.value(hi) > target_tv:
            lo = hi
            step *= 2
            hi = n0 + step
            if hi > N_STAR_SEARCH_CEILING:
                raise TargetUnreachable(
                    f"bound stays above {target_tv} up to n = {N_STAR_SEARCH_CEILING:.3g}"
                )
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if evaluator.value(mid) <= target_tv:
                hi = mid
            else:
                lo = mid
        n_star = hi

    result = BurninResult(
        theorem=evaluator.theorem,
        n_star=int(n_star),
        bound_at_n_star=evaluator.value(n_star),
        target_tv=target_tv,
        geometric_factors={name: float(np.exp(v)) for name, v in log_factors.items()},
        inputs=evaluator.inputs.to_dict(),
        constants=evaluator.constants(),
    )
    logger.debug("n* = %s (bound %.6g)", result.n_star_str, result.bound_at_n_star)
    return result


# ============================================================================
# POINT EVALUATION
# ============================================================================

@dataclass
class PointEvaluation:
    """Everything derived at one parameter point."""
    parameters: Dict[str, float]
    result: BurninResult
    drift: Dict[str, Any]
    minorization: Dict[str, Any]
    start: Dict[str, Any]
    conversion: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "parameters": dict(self.parameters),
            "certificates": {"drift": self.drift, "minorization": self.minorization},
            "start": self.start,
            "result": self.result.to_dict(),
        }
        if self.conversion is not None:
            out["certificates"]["conversion"] = self.conversion
        return out


def block_gamma_floor(dataset: Dataset, hyper: Hyperparameters, phi1: float, phi2: float, balanced: bool) -> float:
    K, M = dataset.K, dataset.M
    delta1 = 1.0 / (2.0 * hyper.a1 + K - 2.0)
    delta2 = 1.0 / (2.0 * hyper.a2 + M - 2.0)
    delta = max(delta1, (K + 1.0) * delta2)
    if balanced:
        return delta + phi1 * K * delta2
    return delta + phi1 * delta2 * dataset.sum_inv_m / phi2


def gibbs_gamma_floor(dataset: Dataset, hyper: Hyperparameters, rho1_slack: float) -> float:
    # derive at gamma just below 1 to reuse the assumption checks
    limit = derive_gibbs_drift(dataset, hyper, min(hyper.b1, hyper.b2) / 2.0, 1.0 - 1e-15, rho1_slack)
    return max(limit.rho1, limit.delta6, limit.delta7)


def evaluate_point(
    dataset: Dataset,
    hyper: Hyperparameters,
    sampler: SamplerKind,
    theorem: TheoremKind,
    params: Dict[str, float],
    target_tv: float,
    mode: GridMode = GridMode.ABSOLUTE,
    rho1_slack: float = RHO1_SLACK,
    beta: Optional[float] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> PointEvaluation:
    """
    Derive certificates at one parameter point and search n*.

    In relative mode, params['gamma'] is a fraction of the feasible interval
    above the certificate's lower limit and params['d'] multiplies the
    smallest admissible small-set size. For the Gibbs sampler params['c3']
    is then a fraction of min(b1, b2).
    """
    gamma = params["gamma"]
    a = params.get("a", DRIFT_CONVERSION_A)

    if sampler is SamplerKind.BLOCK:
        balanced = params.get("phi") is not None and dataset.balanced
        if balanced:
            phi1, phi2 = params["phi"], 1.0 / dataset.m[0]
        else:
            phi1 = params.get("phi1", params.get("phi"))
            phi2 = params.get("phi2", 1.0 / float(np.mean(dataset.m)))
        if mode is GridMode.RELATIVE:
            floor = block_gamma_floor(dataset, hyper, phi1, phi2, balanced)
            gamma = floor + gamma * (1.0 - floor)
        if balanced:
            cert = derive_block_drift_balanced(dataset, hyper, phi1, gamma)
        else:
            cert = derive_block_drift(dataset, hyper, phi1, phi2, gamma)
        start_state = block_start_state(cert.spec, dataset, hyper)
        V0 = eval_block_drift(start_state, cert.spec, dataset)

        def minorize(d: float):
            return block_minorization(dataset, hyper, phi1, phi2, d)
    else:
        slack = params.get("rho1_slack", rho1_slack)
        c3 = params["c3"]
        if mode is GridMode.RELATIVE:
            floor = gibbs_gamma_floor(dataset, hyper, slack)
            gamma = floor + gamma * (1.0 - floor)
            c3 = c3 * min(hyper.b1, hyper.b2)
        cert = derive_gibbs_drift(dataset, hyper, c3, gamma, slack)
        start_state = optimal_start_gibbs(cert.spec, dataset, hyper, tolerances)
        V0 = eval_gibbs_drift(start_state, cert.spec, hyper, dataset)

        def minorize(d: float):
            return gibbs_minorization(dataset, hyper, c3, d)

    b = cert.b
    conversion = None
    if theorem is TheoremKind.ROSENTHAL:
        d = params["d"]
        if mode is GridMode.RELATIVE:
            d = d * 2.0 * b / (1.0 - gamma)
        RosenthalInputs(gamma, b, 1.0, d, params["r"], V0).validate()
        mino = minorize(d)
        evaluator = RosenthalEvaluator(RosenthalInputs(gamma, b, mino.epsilon, d, params["r"], V0))
    else:
        geo = convert_drift(gamma, b, a)
        conversion = geo.to_dict()
        d_rt = params["d"]
        if mode is GridMode.RELATIVE:
            d_rt = d_rt * geo.d_C
        if not d_rt >= geo.d_C:
            raise PreconditionViolated("d_RT >= d_C", d_rt - geo.d_C)
        mino = minorize(d_rt - 1.0)
        evaluator = RTEvaluator(RTInputs(geo.rho, geo.L, mino.epsilon, d_rt, 1.0 + V0, beta))

    result = find_burnin(evaluator, target_tv)
    resolved = dict(params)
    resolved["gamma"] = gamma
    if sampler is SamplerKind.GIBBS:
        resolved["c3"] = cert.c3
    resolved["d"] = mino.d if theorem is TheoremKind.ROSENTHAL else mino.d + 1.0
    return PointEvaluation(
        parameters=resolved,
        result=result,
        drift=cert.to_dict(),
        minorization=mino.to_dict(),
        start=dict(start_state.to_dict(), V0=V0),
        conversion=conversion,
    )


# ============================================================================
# GRID SEARCH
# ============================================================================

@dataclass
class GridSpec:
    gamma: Sequence[float]
    d: Sequence[float]
    phi: Sequence[float] = ()
    phi1: Sequence[float] = ()
    phi2: Sequence[float] = ()
    r: Sequence[float] = ()
    c3: Sequence[float] = ()
    a: Sequence[float] = (DRIFT_CONVERSION_A,)
    target_tv: float = 0.01
    mode: GridMode = GridMode.ABSOLUTE
    rho1_slack: float = RHO1_SLACK

    def axes(self, sampler: SamplerKind, theorem: TheoremKind, dataset: Dataset) -> Dict[str, List[float]]:
        """Ordered parameter axes for this sampler and theorem."""
        if not 0 < self.target_tv < 1:
            raise DomainViolation(f"target_tv must lie in (0, 1), got {self.target_tv}")
        axes: Dict[str, List[float]] = {"gamma": sorted(self.gamma)}
        if sampler is SamplerKind.BLOCK:
            if self.phi and dataset.balanced:
                axes["phi"] = sorted(self.phi)
            else:
                axes["phi1"] = sorted(self.phi1 or self.phi)
                axes["phi2"] = sorted(self.phi2 or [1.0 / float(np.mean(dataset.m))])
        else:
            axes["c3"] = sorted(self.c3)
        axes["d"] = sorted(self.d)
        if theorem is TheoremKind.ROSENTHAL:
            axes["r"] = sorted(self.r)
        else:
            axes["a"] = sorted(self.a)
        empty = [name for name, values in axes.items() if not values]
        if empty:
            raise DomainViolation(f"empty grid axes: {', '.join(empty)}")
        return axes


@dataclass
class GridResult:
    best: PointEvaluation
    feasible: int
    infeasible: int
    infeasible_reasons: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best": self.best.to_dict(),
            "feasible": self.feasible,
            "infeasible": self.infeasible,
            "infeasible_reasons": dict(sorted(self.infeasible_reasons.items())),
        }


def grid_optimize(
    dataset: Dataset,
    hyper: Hyperparameters,
    sampler: SamplerKind,
    theorem: TheoremKind,
    grid: GridSpec,
    max_workers: int = 1,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> GridResult:
    """Exhaustive search; ties go to the lexicographically first parameter tuple."""
    axes = grid.axes(sampler, theorem, dataset)
    names = list(axes)
    points = [dict(zip(names, values)) for values in itertools.product(*axes.values())]

    def attempt(params: Dict[str, float]) -> Tuple[Optional[PointEvaluation], Optional[str]]:
        try:
            return evaluate_point(
                dataset, hyper, sampler, theorem, params, grid.target_tv, grid.mode, grid.rho1_slack,
                tolerances=tolerances,
            ), None
        except BurninError as exc:
            return None, exc.code

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(attempt, points))
    else:
        outcomes = [attempt(p) for p in points]

    best: Optional[PointEvaluation] = None
    reasons: Dict[str, int] = {}
    feasible = 0
    for evaluation, code in outcomes:
        if evaluation is None:
            reasons[code] = reasons.get(code, 0) + 1
            continue
        feasible += 1
        if best is None or evaluation.result.n_star < best.result.n_star:
            best = evaluation

    infeasible = len(points) - feasible
    logger.info("grid search: %d feasible, %d infeasible of %d points", feasible, infeasible, len(points))
    if best is None:
        raise AllPointsInfeasible(
            f"all {len(points)} grid points infeasible", {"reasons": dict(sorted(reasons.items()))}
        )
    return GridResult(best=best, feasible=feasible, infeasible=infeasible, infeasible_reasons=reasons)
