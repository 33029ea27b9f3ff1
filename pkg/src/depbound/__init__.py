"""Bounds on quantiles and Range Value-at-Risk of sums of random variables
with known marginals and unknown dependence."""

__version__ = "0.1.0"

from ._simplex import OptimizerOptions
from .applications import KSStatistic, ScheduleMatrix, crew_schedule_bound, crew_schedule_search, ks_critical_value
from .convolution import (
    BoundResult,
    SimplexWeights,
    lower_quantile_bound,
    lower_rvar_bound,
    r_minus,
    r_plus,
    reduced_lower_bound,
    reduced_upper_bound,
    sharpness_certificate,
    upper_quantile_bound,
    upper_rvar_bound,
)
from .distributions import (
    Cauchy,
    DiscreteUniform,
    Empirical,
    Exponential,
    Gamma,
    Lognormal,
    Normal,
    Pareto,
    PointMass,
    QuantileModel,
    TableQuantile,
    Uniform,
    models_from_json,
    quantile,
    rvar,
)
from .dual import correspondence, d_n, dual_bound, reduced_dual_bound
from .estimators import ConvolutionBound, DualBound, ExtremalStructure, Rearrangement
from .exceptions import DepboundError
from .mixability import center_interval, jm_check_finite_mean, jm_check_location_scale
from .rearrangement import RaMatrix, discretize, ra_interval, ra_run
from .structures import (
    approximation_interval,
    build_candidate,
    build_suboptimal_beta,
    check_candidate_optimality,
    h_function,
    improve_suboptimal,
    sample,
)
