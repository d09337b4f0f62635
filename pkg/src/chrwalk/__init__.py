"""Coordinate hit-and-run sampling on convex bodies, with the auxiliary
Gaussian coordinate walk and a desk-scale verification suite for the flow,
overlap, isoperimetry and mixing inequalities that govern it."""

from .geometry import (
    BodyValidationError,
    ChordSegment,
    ConvexBody,
    chord,
    chord_bisection,
    contains,
    contains_many,
    exact_uniform_sample,
    make_ball,
    make_box,
    make_intersection,
    make_polytope,
    random_sandwiched_polytope,
    rejection_uniform_sample,
    robust_interior_contains,
    sandwich_validate,
    scale_body,
    standard_simplex,
    unit_cube,
)
from .schemes import (
    GaussianWalkParams,
    MarkovScheme,
    WarmStart,
    chr_scheme,
    chr_step,
    default_tau,
    derive_rng,
    gaussian_iterate,
    gaussian_scheme,
    gaussian_step,
    hnr_scheme,
    hnr_step,
    run_chain,
    warm_start_sample,
)
from .mixture import (
    MultiIndex,
    enumerate_multi_indices,
    gaussian_tv_equal_cov,
    lambda_weight,
    mixture_log_density,
    non_full_rank_mass,
    pinsker_shift_bound,
    sample_multi_index,
)
from .conductance import (
    DiscreteChain,
    discretize_chr,
    discretize_gaussian,
    ergodic_flow,
    isoperimetry_check,
    overlap_check,
    overlap_flow_bound,
    s_conductance,
)
from .bounds import (
    BoundParams,
    chr_conductance_lower_bound,
    chr_gaussian_flow_factor,
    gaussian_iterate_flow_bound,
    mixing_step_bound,
    multi_step_flow_factor,
    tv_bound_from_conductance,
)
from .diagnostics import (
    MixingReport,
    TvEstimate,
    chernoff_bound,
    gaussian_tail_bound,
    mixing_time_empirical,
    pinsker_from_kl,
    tv_to_uniform,
)
from .harness import load_body_spec, run_preset, save_body_spec

__version__ = "0.1.0"
