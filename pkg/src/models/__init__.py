# Models package
from .schema import (
    DataSource,
    DatasetSummaryInput,
    FixedParameters,
    GridRange,
    GridRanges,
    HyperparameterSpec,
    RunConfig,
    SimulateSpec,
    SweepSpec,
    ToleranceConfig,
)

__all__ = [
    "DataSource",
    "DatasetSummaryInput",
    "FixedParameters",
    "GridRange",
    "GridRanges",
    "HyperparameterSpec",
    "RunConfig",
    "SimulateSpec",
    "SweepSpec",
    "ToleranceConfig",
]
