"""Finite-N velocity distribution toolkit.

The exact single-component velocity law of an isolated N-particle system
with fixed total energy, a targeted goodness-of-fit test built from the
operator that characterises it, classical EDF baselines, and a
reproducible Monte Carlo harness for calibration, size, and power.
"""

from .distribution import FiniteNLaw
from .edf import EdfStatistics, edf_statistics
from .errors import (
    ConfigError,
    DegenerateSampleError,
    DomainError,
    FiniteNError,
)
from .harness import (
    CalibrationEntry,
    CalibrationTable,
    CompareRow,
    GridResult,
    GridSpec,
    PowerRow,
    calibrate,
    compare_edf,
    estimate_rejection,
    power_boundary,
    run_grid,
    sanov_table,
)
from .jacobi import (
    JacobiBasis,
    jacobi_deriv,
    jacobi_eval_all,
    jacobi_weight,
    sigma_k,
    stein_apply_rescaled,
    stein_apply_unrescaled,
)
from .stein_test import (
    SteinTestConfig,
    TestReport,
    batch_statistic,
    coefficients,
    even_modes,
    run_test,
    standardize,
    statistic,
)

__version__ = "0.1.0"

__all__ = [
    "FiniteNLaw",
    "EdfStatistics",
    "edf_statistics",
    "FiniteNError",
    "DomainError",
    "DegenerateSampleError",
    "ConfigError",
    "JacobiBasis",
    "jacobi_eval_all",
    "jacobi_deriv",
    "jacobi_weight",
    "sigma_k",
    "stein_apply_rescaled",
    "stein_apply_unrescaled",
    "SteinTestConfig",
    "TestReport",
    "even_modes",
    "standardize",
    "coefficients",
    "statistic",
    "batch_statistic",
    "run_test",
    "GridSpec",
    "CalibrationEntry",
    "CalibrationTable",
    "PowerRow",
    "CompareRow",
    "GridResult",
    "calibrate",
    "estimate_rejection",
    "run_grid",
    "sanov_table",
    "power_boundary",
    "compare_edf",
    "__version__",
]
