"""Two-layer interfacial waves: operators, stability criteria, and solvers."""

from .errors import (
    BreakdownError,
    DegenerateGeometryError,
    IncompatibleDataError,
    InvalidConfigError,
    NumericalError,
    TwoFluidError,
)
from .params import (
    DimensionlessParams,
    PhysicalConfig,
    PRESETS,
    Verdict,
    bond_number,
    config_from_dimensionless,
    derive_params,
    practical_verdict,
    shear_scale,
    sigma_for_upsilon,
    upsilon,
)
from .spectral import (
    PeriodicGrid,
    antideriv,
    apply_multiplier,
    apply_symbol,
    dealias_mask,
    deriv,
    inner,
    l2_norm,
    norm_h1_sigma,
    norm_hdot_mu,
    norm_sobolev,
    truncate,
)
from .strip import (
    DiffeoData,
    PMatrixField,
    StripSolution,
    build_trivial_diffeo,
    dn_apply,
    dn_flat,
    solve_dirichlet,
    solve_neumann,
)
from .operators import (
    InterfaceState,
    TraceBundle,
    Workspace,
    apply_e,
    apply_g,
    apply_g_tilde,
    apply_j,
    coupled_dn_flat_symbol,
    dn_mix_flat_symbol,
    e_quadratic_form,
    invert_g_tilde,
    invert_j,
    j_flat_symbol,
    transmission_solve,
)
from .symbols import (
    TailReport,
    TailSymbolSet,
    eval_s,
    eval_t,
    ratio_symbol_error,
    tail_error_report,
)
from .stability import (
    ECoeffResult,
    FlatConstant,
    MarginResult,
    StabilityInputs,
    StabilityReport,
    a_field,
    c_flat,
    criteria_from_scalars,
    e_coeff,
    evaluate_criteria,
    ins_form,
    modewise_margin,
    stability_inputs,
)
from .kelvin import (
    ShearConfig,
    critical_shear,
    growth_table,
    kelvin_criterion_threshold,
    max_growth,
    mode_frequencies,
    mode_growth,
)
from .evolution import (
    EvolutionConfig,
    TimeSeries,
    cfl_cap,
    linear_mode_energy,
    monitor_criterion,
    rhs,
    rk4_step,
    run,
)
from .swsw import (
    ComparisonTable,
    SWConfig,
    SWSeries,
    SWState,
    compare_with_full,
    flux,
    fv_step,
    heights,
    hyperbolicity_indicator,
    jacobian_discriminant,
    jacobian_eigs,
    run_swsw,
)

__version__ = "0.1.0"
