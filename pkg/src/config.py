"""
Configuration constants for the burn-in bound engine.
All tolerances, starting values and default grids are defined here for
transparency and auditability.
"""
from enum import Enum
from typing import Dict, List


class SamplerKind(Enum):
    """The two Markov kernels on the random effects posterior."""
    GIBBS = "gibbs"
    BLOCK = "block"


class TheoremKind(Enum):
    """Total-variation bound formulas."""
    ROSENTHAL = "rosenthal"
    ROBERTS_TWEEDIE = "roberts-tweedie"


class SuiteStatus(Enum):
    """Status codes for validation suite execution."""
    PASSED = "PASSED"
    FAILED = "FAILED"
    SKIPPED = "SKIPPED"


class GridMode(Enum):
    """How grid values for gamma and d are interpreted."""
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


class SweepParameter(Enum):
    """Hyperparameter pairs varied by the sweep subcommand."""
    A2B2 = "a2b2"
    A1B1 = "a1b1"


# ============================================================================
# NUMERICAL TOLERANCES
# ============================================================================
REL_TOL = 1e-12
QUAD_TOL = 1e-10
OPT_TOL = 1e-9
TOLERANCE_CEILING = 1e-3  # every tolerance must stay below this

N_STAR_SEARCH_CEILING = 1e300
INT64_LIMIT = 2 ** 63

# ============================================================================
# CERTIFICATE DEFAULTS
# ============================================================================
RHO1_SLACK = 1e-5
DRIFT_CONVERSION_A = 1.0
LAMBDA_E_START = 1e-6
MIN_GROUPS = 3
MIN_GROUP_SIZE = 2
GIBBS_BALANCE_RATIO = 5  # 5 m' > m''

# ============================================================================
# RUN DEFAULTS
# ============================================================================
DEFAULT_SEED = 0
DEFAULT_TARGET_TV = 0.01
DEFAULT_SIMULATE_ITERATIONS = 1000
MIN_MC_REPLICATES = 100

# Default grid, relative mode: gamma as a fraction of its feasible interval,
# d as a multiple of the smallest admissible small-set size.
DEFAULT_GRID: Dict[str, List[float]] = {
    "gamma": [0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
    "phi": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0],
    "d": [1.05, 1.15, 1.3, 1.5, 1.75, 2.0],
    "r": [0.005, 0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.15],
    "c3": [0.25, 0.5, 0.75],
    "a": [1.0],
}

# ============================================================================
# VALIDATION SUITE SIZES
# ============================================================================
DRIFT_MC_STATES = 100
DRIFT_MC_REPLICATES = 10_000
DRIFT_MC_Z = 4.0
DOMINATION_STATES = 50
DOMINATION_GRID_POINTS = 1000
GAMMA_INF_TRIPLES = 20
GAMMA_INF_BETA_POINTS = 1000
GAMMA_INF_X_POINTS = 100
QUADRATIC_RATIO_TUPLES = 100_000
CONTAINMENT_STATES = 10_000
QUADRATURE_REL_TOL = 1e-6
MOMENT_DRAWS = 1_000_000
MOMENT_Z = 4.0

# ============================================================================
# FILE FORMATS
# ============================================================================
RAW_CSV_COLUMNS = ["group", "value"]
SWEEP_CSV_COLUMNS = ["param_value", "epsilon", "n_star", "bound_at_n_star"]
TRACE_FIXED_COLUMNS = ["iter", "mu", "lambda_theta", "lambda_e"]
REPORT_SIGNIFICANT_DIGITS = 17

# ============================================================================
# EXIT CODES
# ============================================================================
EXIT_OK = 0
EXIT_CERTIFICATE_FAILURE = 1
EXIT_IO_ERROR = 2
