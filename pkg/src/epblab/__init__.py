"""Simulation and numerical-analysis lab for budgeted approval voting with
noisy quality signals."""

__version__ = "0.1.0"

from .model import (
    COST_EPS,
    Environment,
    InstanceTooLargeError,
    UtilityKind,
    env_from_json,
    env_to_json,
    generate_environment,
    is_feasible,
    is_quality_dominant,
    load_environment,
    sample_quality_vector,
    sample_signal_profile,
    save_environment,
    utility,
)
from .rules import (
    ALL_RULES,
    Rule,
    TieBreak,
    WinningSet,
    tally,
    tally_av,
    tally_av_per_cost,
    tally_greedy_cover,
    tally_mes,
    tally_mes_plus,
    tally_pav,
    tally_phragmen,
)
from .oracles import (
    SubsetEnumerator,
    deviation_gain_exact,
    minimize_rate_function_grid,
    optimal_set,
    pivotal_log_probability_exact,
    pivotal_probability_exact,
    tie_log_probability_exact,
    tie_probability_exact,
)
from .strategic import (
    ConstraintSpec,
    EmptyPivotalSetError,
    PivotalPartition,
    RarityResult,
    RateFunctionResult,
    SingularCaseError,
    binary_bne_lhs_rhs,
    compute_t_tilde,
    enumerate_pivotal_pairs,
    g_min_over,
    partition_to_spec,
    rarity_simulation,
    rate_function_G,
    refined_pivotal_estimate,
    sample_structure,
    tie_probability_saddlepoint,
)
from .perf import (
    EnvParams,
    PerformanceRecord,
    SweepConfig,
    TTestResult,
    empirical_performance,
    indistinguishable_scenarios,
    paired_t_test,
    performance_samples,
    records_to_csv,
    run_sweep,
    scenario_performance,
    worst_case_performance,
)
