"""Entropy gap of a homogeneous expanding universe with nuclear burning."""

from .critical_times import (
    CriticalTimesReport,
    approx_t_cr1,
    approx_t_cr2,
    cubic_residual,
    pair_exists,
    solve_critical_times,
)
from .errors import DomainError, GapLabError, NumericalFailure, ValidationError, WienLimitError
from .gap_model import (
    LogGapValue,
    actual_entropy_curve,
    bracket_rate,
    equilibrium_entropy,
    ln_gap,
    ln_gap_rel,
    temperature_at,
)
from .quantities import DimensionlessParams, ModelParams, fiducial_params, make_params, to_dimensionless

__version__ = "0.1.0"
