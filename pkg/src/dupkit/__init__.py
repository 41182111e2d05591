"""Revenue experiments with duplicate bidders on regular value distributions.

The package is organized around concave revenue curves in quantile space:
`curves` holds the algebra, `exante` the water-filling relaxation that
upper-bounds optimal revenue, `mechanisms` scalar auction rules, `simulate`
vectorized Monte Carlo plus quadrature oracles, `duplication` the cloning
plans and selection rules, `analysis` the structural classifiers and
closed-form guarantees, `examples` the worked instances, and `verify` the
acceptance suite the CLI exposes as `dupkit verify`.
"""

from .curves import (
    EPS_MIN,
    BidderProfile,
    RevenueCurve,
    make_equal_revenue,
    make_piecewise,
    make_point_mass,
    make_profile,
    make_triangle,
    monopoly,
    monopoly_reserve,
    quantile_of_value,
    rev,
    rev_dominates,
    value,
    virtual_value,
)
from .duplication import (
    all_once,
    best_single_duplicate,
    extend_profile,
    k_copies_of,
    select_by_beta,
    select_by_noisy_beta,
    select_by_sample,
    select_k_set_noisy,
    set_once,
    single_of,
)
from .errors import (
    ConcavityViolation,
    DominanceViolation,
    DomainError,
    DupkitError,
    HypothesisViolated,
    LemmaViolation,
    NonConvergence,
    ParseError,
    ProfileMismatch,
    UnboundedExpectation,
)
from .exante import ExAnteSolution, exante_triangle_reduction, solve_exante
from .mechanisms import (
    NO_CONSTRAINT,
    AuctionOutcome,
    PairConstraint,
    run_lookahead,
    run_myerson_single,
    run_posted,
    run_spa,
    run_spald,
    run_vcg_constrained,
    run_vcg_k,
)
from .analysis import (
    bound_k_constrained,
    bound_k_free,
    bound_k_free_remark,
    bound_k_noisy,
    bound_sample,
    bound_single,
    bound_single_noisy,
    classify_k,
    classify_single,
    median_lower_bound_check,
    poisson_binomial,
    warmup_constant,
)
from .simulate import (
    Estimate,
    estimate_revenue,
    expected_order_stat,
    mechanism_names,
    mechanism_revenue_quadrature,
    paired_compare,
    sample_revenues,
)
from .examples import (
    example_lbhr,
    example_n3,
    min_ratio_two_triangles,
    ratio_two_triangles,
    spa_flat_check,
)
from .config import ExperimentConfig, emit_config, parse_config, run_experiment
from .verify import verify_all

__all__ = [name for name in dir() if not name.startswith("_")]
