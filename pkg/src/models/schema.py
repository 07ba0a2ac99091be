"""
Configuration models for the burn-in bound engine.
Defines the contract for run configuration files: where the data come from,
the prior, which sampler and bound to use, and the parameters to try.
"""
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..config import (
    DEFAULT_SEED,
    DEFAULT_SIMULATE_ITERATIONS,
    DEFAULT_TARGET_TV,
    DRIFT_CONVERSION_A,
    OPT_TOL,
    QUAD_TOL,
    REL_TOL,
    RHO1_SLACK,
    TOLERANCE_CEILING,
    GridMode,
    SamplerKind,
    SweepParameter,
    TheoremKind,
)


class ToleranceConfig(BaseModel):
    """Numerical tolerances shared by special functions, quadrature and minimization."""
    rel_tol: float = Field(default=REL_TOL, gt=0, description="Relative tolerance for special functions")
    quad_tol: float = Field(default=QUAD_TOL, gt=0, description="Quadrature tolerance")
    opt_tol: float = Field(default=OPT_TOL, gt=0, description="Scalar minimizer x-tolerance")

    @field_validator("rel_tol", "quad_tol", "opt_tol")
    @classmethod
    def must_be_tight(cls, v: float) -> float:
        if v >= TOLERANCE_CEILING:
            raise ValueError(f"tolerance must be below {TOLERANCE_CEILING}")
        return v


# ============================================================================
# DATA AND PRIOR
# ============================================================================

class DatasetSummaryInput(BaseModel):
    """Sufficient statistics entered directly instead of raw observations."""
    m: List[int] = Field(..., description="Per-group observation counts")
    ybar: List[float] = Field(..., description="Group means")
    sse: float = Field(..., ge=0, description="Within-group sum of squares")
    ybar_grand: Optional[float] = Field(default=None, description="Grand mean override (rounded summary values)")

    @model_validator(mode="after")
    def lengths_match(self) -> "DatasetSummaryInput":
        if len(self.m) != len(self.ybar):
            raise ValueError("m and ybar must have the same length")
        return self


class DataSource(BaseModel):
    """Either a raw `group,value` CSV or inline summaries."""
    path: Optional[str] = Field(default=None, description="Raw CSV path")
    summaries: Optional[DatasetSummaryInput] = Field(default=None, description="Inline summaries")

    @model_validator(mode="after")
    def exactly_one_source(self) -> "DataSource":
        if (self.path is None) == (self.summaries is None):
            raise ValueError("data needs exactly one of 'path' or 'summaries'")
        return self


class HyperparameterSpec(BaseModel):
    """Prior constants; m0 may be the string 'ybar' (the grand mean of the data)."""
    a1: float = Field(..., gt=0, description="Gamma shape of lambda_theta")
    b1: float = Field(..., gt=0, description="Gamma rate of lambda_theta")
    a2: float = Field(..., gt=0, description="Gamma shape of lambda_e")
    b2: float = Field(..., gt=0, description="Gamma rate of lambda_e")
    m0: Union[float, Literal["ybar"]] = Field(..., description="Prior mean of mu")
    s0: float = Field(default=1.0, gt=0, description="Prior precision of mu")

    def resolve(self, dataset) -> "Any":
        """Turn into a core Hyperparameters, substituting the grand mean for 'ybar'."""
        from ..core_model import Hyperparameters

        m0 = dataset.ybar_grand if self.m0 == "ybar" else float(self.m0)
        return Hyperparameters(a1=self.a1, b1=self.b1, a2=self.a2, b2=self.b2, m0=m0, s0=self.s0)


# ============================================================================
# PARAMETERS
# ============================================================================

class FixedParameters(BaseModel):
    """A single parameter point. Which fields are needed depends on sampler and theorem."""
    gamma: float = Field(..., gt=0, lt=1, description="Drift rate")
    phi: Optional[float] = Field(default=None, gt=0, description="Balanced block drift weight")
    phi1: Optional[float] = Field(default=None, gt=0, description="Unbalanced block weight on v1")
    phi2: Optional[float] = Field(default=None, gt=0, description="Unbalanced block weight on v2")
    d: float = Field(..., gt=0, description="Small-set size (d_R, or d_RT in W-units)")
    r: Optional[float] = Field(default=None, gt=0, lt=1, description="Rosenthal mixing exponent")
    c3: Optional[float] = Field(default=None, gt=0, description="Gibbs exponential drift constant")
    a: float = Field(default=DRIFT_CONVERSION_A, gt=0, description="Drift conversion parameter")
    rho1_slack: float = Field(default=RHO1_SLACK, gt=0, description="Offset of rho1 above its limit")
    beta: Optional[float] = Field(default=None, ge=1, description="Override of the Roberts-Tweedie beta")


class GridRange(BaseModel):
    """Either explicit values or an evenly spaced range."""
    values: Optional[List[float]] = Field(default=None, description="Explicit grid values")
    lo: Optional[float] = Field(default=None, description="Lower end")
    hi: Optional[float] = Field(default=None, description="Upper end")
    points: int = Field(default=10, ge=1, description="Number of points")
    scale: Literal["linear", "log"] = Field(default="linear")

    @model_validator(mode="after")
    def values_or_range(self) -> "GridRange":
        if self.values is not None:
            if not self.values:
                raise ValueError("grid values must be nonempty")
            return self
        if self.lo is None or self.hi is None:
            raise ValueError("grid range needs 'values' or both 'lo' and 'hi'")
        if self.hi < self.lo:
            raise ValueError("grid range needs lo <= hi")
        if self.scale == "log" and self.lo <= 0:
            raise ValueError("log-scaled grid needs lo > 0")
        return self

    def to_values(self) -> List[float]:
        if self.values is not None:
            return sorted(float(v) for v in self.values)
        if self.points == 1:
            return [float(self.lo)]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.points)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.points)]


class GridRanges(BaseModel):
    """Grid ranges per parameter; missing ranges fall back to the default grid."""
    mode: GridMode = Field(default=GridMode.RELATIVE, description="How gamma and d values are read")
    gamma: Optional[GridRange] = None
    phi: Optional[GridRange] = None
    phi1: Optional[GridRange] = None
    phi2: Optional[GridRange] = None
    d: Optional[GridRange] = None
    r: Optional[GridRange] = None
    c3: Optional[GridRange] = None
    a: Optional[GridRange] = None
    rho1_slack: float = Field(default=RHO1_SLACK, gt=0)
    max_workers: int = Field(default=1, ge=1, description="Threads used to evaluate grid points")


class SweepSpec(BaseModel):
    """Figure-style sweep of a hyperparameter pair."""
    vary: SweepParameter = Field(default=SweepParameter.A2B2)
    values: Optional[List[float]] = Field(default=None, description="Explicit values of the varied pair")
    start: Optional[float] = Field(default=None, gt=0, description="First value (geometric spacing)")
    stop: Optional[float] = Field(default=None, gt=0, description="Last value (geometric spacing)")
    points: int = Field(default=5, ge=1)

    def to_values(self) -> List[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        if self.start is None or self.stop is None:
            raise ValueError("sweep needs 'values' or both 'start' and 'stop'")
        if self.points == 1:
            return [float(self.start)]
        return [float(v) for v in np.geomspace(self.start, self.stop, self.points)]


class SimulateSpec(BaseModel):
    iterations: int = Field(default=DEFAULT_SIMULATE_ITERATIONS, ge=0)
    start: Literal["optimal", "ybar"] = Field(default="optimal")


# ============================================================================
# RUN CONFIGURATION
# ============================================================================

class RunConfig(BaseModel):
    """
    The complete run configuration.
    Holds at most one of fixed parameters and grid ranges; with neither, the
    default grid applies.
    """
    data: DataSource = Field(..., description="Data source")
    hyperparameters: HyperparameterSpec = Field(..., description="Prior constants")
    sampler: SamplerKind = Field(default=SamplerKind.BLOCK)
    theorem: TheoremKind = Field(default=TheoremKind.ROSENTHAL)
    target_tv: float = Field(default=DEFAULT_TARGET_TV, gt=0, lt=1, description="Total-variation target")
    fixed: Optional[FixedParameters] = None
    grid: Optional[GridRanges] = None
    sweep: Optional[SweepSpec] = None
    simulate: SimulateSpec = Field(default_factory=SimulateSpec)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    output: Optional[str] = Field(default=None, description="Report path")

    @model_validator(mode="after")
    def fixed_or_grid(self) -> "RunConfig":
        if self.fixed is not None and self.grid is not None:
            raise ValueError("'fixed' and 'grid' are mutually exclusive")
        return self

    def effective_grid(self) -> Optional[GridRanges]:
        if self.fixed is not None:
            return None
        return self.grid if self.grid is not None else GridRanges()

    def defaults_applied(self) -> List[str]:
        """Dotted names of every field that took its default value."""
        defaulted = [name for name in type(self).model_fields if name not in self.model_fields_set]
        if "s0" not in self.hyperparameters.model_fields_set:
            defaulted.append("hyperparameters.s0")
        if self.fixed is not None:
            for name in ("a", "rho1_slack"):
                if name not in self.fixed.model_fields_set:
                    defaulted.append(f"fixed.{name}")
        if self.grid is None and self.fixed is None:
            defaulted.append("grid (default grid)")
        return defaulted

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return self.model_dump(mode="json")
