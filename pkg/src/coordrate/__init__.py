"""Coordination-rate toolkit for distributed sampling with shared randomness.

Exact discrete information measures, closed-form and optimization-based
transmission rates, rate-region polytopes with exact symbolic projection, and
finite-blocklength protocol simulations with exactly computed induced
distributions.
"""

from .info_core import (
    Alphabet,
    AxisMismatchError,
    Channel,
    DomainError,
    JointPMF,
    PMFValidationError,
    binary_entropy,
    compose,
    condition,
    conditional_mutual_information,
    dual_total_correlation,
    entropy,
    inv_binary_entropy,
    marginalize,
    mutual_information,
    total_correlation,
    tv_distance,
)
from .dsbs_analytic import (
    DsbsParams,
    dsbs_joint,
    dsbs_wyner_ci,
    f_curve,
    f_curve_terms,
    interp_channel,
    t_star,
    wyner_channel,
)
from .rate_optimizers import (
    MinmaxEquivalenceReport,
    OptimizerConfig,
    OptimizerError,
    OptResult,
    channel_grid_oracle,
    gamma_star,
    minmax_equivalence_check,
    r_opt_indv,
    r_opt_objective,
    r_opt_two,
    relaxed_wyner_ci,
    wyner_ci,
    wyner_grid_oracle,
)
from .rate_regions import (
    AccessStructure,
    FactorizationError,
    Inequality,
    LinearForm,
    LinearSystem,
    MarkovViolationError,
    ObliviousMembership,
    RateTuple,
    ach_two_pre_system,
    ach_two_region_system,
    canonical_inequality_set,
    correlated_rate,
    entropy_bindings,
    evaluate_system,
    fme_eliminate,
    forehead_upper_bound,
    forehead_upper_bound_search,
    oblivious_membership,
    region_ach_two,
    region_equal_forehead,
    region_equal_general,
    region_equal_indv,
    region_two_equal,
    system_feasible,
    systems_equal,
)
from .protocol_sim import (
    CodebookInstance,
    ObliviousFamily,
    ResourceGuardError,
    SimReport,
    TrendReport,
    binned_scheme_sim,
    oblivious_sim,
    trend_report,
    wyner_synthesis_sim,
    xor_scheme,
)

__version__ = "0.1.0"
