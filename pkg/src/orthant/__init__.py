"""Reflected Brownian motions in the orthant: simulation, coupling, diagnostics."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    AssumptionReport,
    DerivedParams,
    ModelError,
    RbmSpec,
    StabilityError,
    TransienceError,
    build_asymmetric_atlas,
    build_band_model,
    build_symmetric_atlas,
    check_assumptions,
    closed_form_rinv_asym,
    closed_form_rinv_sym,
    contraction_constants,
    derived_params,
    r_inverse,
    r_inverse_neumann,
    schedule_dt,
    schedule_ell,
    spec_from_json,
    spec_from_json_dict,
)
from .skorokhod import (  # noqa: F401
    BrownianDriver,
    RbmPath,
    ReflectionError,
    lcp_reflect,
    simulate,
    simulate_atlas_particles,
    simulate_ensemble,
)
from .coupling import (  # noqa: F401
    CrossingLog,
    HitCounter,
    SyncCoupledPaths,
    WeightedNormParams,
    contraction_check,
    couple,
    crossing_log,
    domination_check,
    hit_counter,
    monotonicity_check,
    u_beta_series,
    weighted_l1,
    weighted_sup,
)
from .derivative import (  # noqa: F401
    DerivativeState,
    WalkState,
    derivative_evolve,
    finite_diff_derivative,
    rw_distribution_mc,
    rw_sample,
    wasserstein_bound_estimate,
)
from .stationary import (  # noqa: F401
    PerturbationSpec,
    alpha_Y,
    atlas_stationary_rates,
    burnin_stationary,
    class_check,
    n_schedule,
    perturbed_start,
    sample_atlas_stationary,
    sample_perturbation,
)
