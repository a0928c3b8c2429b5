"""Distributed spectrum sharing on interference graphs.

Simulation library for multi-channel random access where users pick channel
sets and attempt probabilities over a shared collision medium. Covers
best-response play for per-user rate maximization, noisy best response with
cooling for proportionally fair allocations, slot-level Monte Carlo,
exhaustive oracles, and a reproducible experiment harness.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    DegenerateInstanceError,
    EstimationError,
)
from .network import (
    Instance,
    InterferenceGraph,
    Strategy,
    StrategyProfile,
    build_geometric_graph,
    build_regular_graph,
    expected_rate_on_channel,
    graph_from_positions,
    log_interference,
    make_profile,
    neighbors_on_channel,
    replace_strategy,
    success_probability,
    total_expected_rate,
    validate_profile,
)
from .drm import (
    DrmNepReport,
    best_response_drm,
    br_potential,
    br_potential_upper_bound,
    efficiency_bound,
    is_nep_drm,
    naive_expected_rate,
)
from .fairness import (
    CoolingSchedule,
    FairnessAction,
    FairnessNepReport,
    cooperative_utility,
    delta_lower_bound,
    exact_potential,
    gibbs_stationary,
    is_nep_fairness,
    noisy_br_distribution,
    optimal_attempt_probability,
    per_channel_sum_log_rate,
    sample_noisy_br,
)
from .dynamics import (
    EstimatorConfig,
    PopulationEvent,
    SlotOutcome,
    Trajectory,
    TrajectoryStep,
    UpdateMechanism,
    drm_initial_profile,
    estimate_success_probability,
    nbrf_initial_profile,
    run_better_response_replay,
    run_br_drm,
    run_nbrf,
    select_active,
    simulate_naive_policy,
    simulate_slot,
    simulate_slots,
)
from .oracle import (
    OracleResult,
    allocation_profile,
    brute_force_best_response,
    empirical_visit_distribution,
    exhaustive_drm_nep_enumeration,
    exhaustive_fairness_nep_enumeration,
    exhaustive_sum_log_rate,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    GibbsCheckReport,
    build_estimator,
    build_instance_and_events,
    build_mechanism,
    build_schedule,
    default_gibbs_instance,
    efficiency_sweep,
    gibbs_check,
    list_presets,
    load_config,
    load_preset,
    run_experiment,
)

__all__ = [
    "__version__",
    "CapacityError",
    "ConfigError",
    "DegenerateInstanceError",
    "EstimationError",
    "Instance",
    "InterferenceGraph",
    "Strategy",
    "StrategyProfile",
    "build_geometric_graph",
    "build_regular_graph",
    "graph_from_positions",
    "expected_rate_on_channel",
    "log_interference",
    "make_profile",
    "neighbors_on_channel",
    "replace_strategy",
    "success_probability",
    "total_expected_rate",
    "validate_profile",
    "DrmNepReport",
    "best_response_drm",
    "br_potential",
    "br_potential_upper_bound",
    "efficiency_bound",
    "is_nep_drm",
    "naive_expected_rate",
    "CoolingSchedule",
    "FairnessAction",
    "FairnessNepReport",
    "cooperative_utility",
    "delta_lower_bound",
    "exact_potential",
    "gibbs_stationary",
    "is_nep_fairness",
    "noisy_br_distribution",
    "optimal_attempt_probability",
    "per_channel_sum_log_rate",
    "sample_noisy_br",
    "EstimatorConfig",
    "PopulationEvent",
    "SlotOutcome",
    "Trajectory",
    "TrajectoryStep",
    "UpdateMechanism",
    "drm_initial_profile",
    "estimate_success_probability",
    "nbrf_initial_profile",
    "run_better_response_replay",
    "run_br_drm",
    "run_nbrf",
    "select_active",
    "simulate_naive_policy",
    "simulate_slot",
    "simulate_slots",
    "OracleResult",
    "allocation_profile",
    "brute_force_best_response",
    "empirical_visit_distribution",
    "exhaustive_drm_nep_enumeration",
    "exhaustive_fairness_nep_enumeration",
    "exhaustive_sum_log_rate",
    "ExperimentConfig",
    "ExperimentResult",
    "GibbsCheckReport",
    "build_estimator",
    "build_instance_and_events",
    "build_mechanism",
    "build_schedule",
    "default_gibbs_instance",
    "efficiency_sweep",
    "gibbs_check",
    "list_presets",
    "load_config",
    "load_preset",
    "run_experiment",
]
