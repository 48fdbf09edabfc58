"""Coarse Ricci curvature of continuous-time Markov processes on finite metric spaces."""

from .contraction import (
    ContractionReport,
    check_inf_equality,
    equilibrium_by_contraction,
    equilibrium_gap,
    verify_contraction,
)
from .curvature import (
    CurvatureEstimate,
    CurvatureProfile,
    check_concavity,
    coupling_lower_bound,
    curvature_profile,
    discrete_profile,
    is_epsilon_geodesic,
    kappa_discrete,
    kappa_extrapolated,
    r_samples,
    time_grid,
)
from .errors import *  # noqa: F401,F403
from .gallery import circle_gap, circle_walk, deterministic_flow, dyadic_cascade, random_reversible_ctmc
from .kernels import BACKEND
from .markov_core import (
    Generator,
    Measure,
    MetricSpace,
    TransitionKernel,
    build_generator,
    build_metric_space,
    check_reversible,
    load_chain_spec,
    dump_chain_spec,
    semigroup_rows,
    stationary_measure,
    transition_at,
)
from .spectral import check_lichnerowicz, power_norm_check, spectral_gap, spectral_report
from .transport import dual_certificate, w1_distance, wasserstein1

__version__ = "0.1.0"
