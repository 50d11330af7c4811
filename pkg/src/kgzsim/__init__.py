"""Radial pseudospectral simulator and analysis toolkit for the 3D
Klein-Gordon-Zakharov system."""

from .radial import (
    PhysField,
    RadialGrid,
    SpectralField,
    apply_multiplier,
    besov_norm,
    kg_propagate,
    lebesgue_norm,
    lp_project,
    lp_project_le,
    pointwise_product,
    random_band_limited,
    sobolev_norm,
    spectral_l2,
    to_physical,
    to_spectral,
    wave_propagate,
)
from .kgz import (
    BlowupError,
    ComplexState,
    RealState,
    SimConfig,
    Trajectory,
    energy,
    from_first_order,
    gaussian_data,
    oracle_evolve,
    rhs,
    run_simulation,
    step,
    to_first_order,
)
from .resonance import (
    InteractionTag,
    LemmaGridSpec,
    ResonanceParams,
    compute_params,
    decompose_bilinear,
    dual_point,
    in_support,
    omega,
    omega_tilde,
    verify_lemma_bounds,
    verify_profile_bound,
)
from .normalform import (
    BilinearOperator,
    BilinearSymbol,
    bilinear_apply,
    boundary_term_N,
    boundary_term_U,
    clear_bilinear_cache,
    cubic_terms,
    dense_bilinear_reference,
    duhamel_residual,
    estimate_sweep,
)
from .strichartz import (
    AdmissiblePair,
    FreeEvolution,
    GuardError,
    ResolutionNorms,
    beta_exponent,
    measure_spacetime_norm,
    resolution_norm,
    scattering_profile,
    sharpness_witness,
    strichartz_scan,
)

__version__ = "0.1.0"
