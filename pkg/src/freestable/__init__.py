"""Free stable distributions in the unified (alpha, rho) parameterization."""
__version__ = "0.1.0"

from .errors import BudgetError, ConvergenceError, DomainError, FreeStableError, PoleError, PrecisionError
from .params import BpbParams, FreeStableParams, dual, from_bpb, make_params, reflected, to_bpb, x_star
from .dist import (
    QuantileTable,
    RngState,
    abs_moment,
    cdf,
    cdf_array,
    cf,
    cf_fourier,
    classical_cdf,
    classical_pdf,
    mellin_cf,
    mellin_classical,
    mellin_free,
    pdf,
    pdf_array,
    positive_mass,
    positive_moment,
    quantile,
    quantile_table,
    sample_cauchy_k,
    sample_classical,
    sample_free,
)
from .checks import CheckCase, CheckReport, SuiteConfig, run_suite

__all__ = [
    "__version__",
    "FreeStableError", "DomainError", "PoleError", "PrecisionError", "ConvergenceError", "BudgetError",
    "FreeStableParams", "BpbParams", "make_params", "from_bpb", "to_bpb", "reflected", "dual", "x_star",
    "pdf", "pdf_array", "cdf", "cdf_array", "quantile", "quantile_table", "QuantileTable",
    "cf", "cf_fourier", "mellin_free", "mellin_classical", "mellin_cf", "abs_moment",
    "positive_mass", "positive_moment",
    "RngState", "sample_free", "sample_classical", "sample_cauchy_k",
    "classical_pdf", "classical_cdf",
    "CheckCase", "CheckReport", "SuiteConfig", "run_suite",
]
