"""Traffic-aware flying-gateway placement and proactive queue sizing.

The package plans where a relay drone should hover and how large each
access-point queue must be so that per-link delay stays under a bound,
then checks those plans against a discrete-event simulation and a
particle-swarm benchmark solver.
"""

from .channel import (
    CALIBRATED_FAIR_SHARE_BPS,
    DEFAULT_MIN_SNR_DB,
    SPEED_OF_LIGHT_MPS,
    VHT160_RATES_BPS,
    ChannelParams,
    McsEntry,
    McsTable,
    RateModel,
    calibrated_mcs_table,
    default_mcs_table,
    fit_rate_model,
    friis_snr_db,
    link_budget_constant_db,
    max_distance_m,
    rician_snr_sample,
    shannon_capacity_bps,
)
from .errors import (
    AggregateCapacityError,
    DelayInfeasibleError,
    InfeasibleDemandError,
    PlacementInfeasibleError,
    PlanningError,
    SaturationError,
)
from .placement import (
    OverlapAnalysis,
    PlacementResult,
    SphereConstraint,
    Venue,
    compute_fgw_pos,
    feasibility_margin,
    sphere_pair_analysis,
)
from .planner import (
    ConstraintCheck,
    ConstraintReport,
    FapPlan,
    GpqmPlan,
    PlannerConfig,
    PlanSeries,
    check_formulation,
    plan_series,
    plan_series_from_json,
    plan_series_to_json,
    plan_snapshot,
)
from .queueing import (
    DEFAULT_PACKET_SIZE_BYTES,
    md1_delay_s,
    md1_queue_size,
    mm1q_plr,
    planned_queue_size,
    plr_curve,
    rates_from_traffic,
)
from .scenario import (
    DEFAULT_DEMAND_FRACTIONS,
    DemandProfile,
    FapState,
    FapTrace,
    MobilityParams,
    ScenarioTrace,
    Snapshot,
    generate_rwm,
    load_scenario,
    load_waypoints,
    reference_fair_share_bps,
    save_scenario,
    save_waypoints,
)
from .simulator import (
    DistributionSummary,
    SimConfig,
    SimMetrics,
    compare,
    merge_metrics,
    simulate,
    summarize,
)
from .solver import (
    BenchmarkRow,
    OptProblem,
    PsoParams,
    SolverResult,
    evaluate,
    run_benchmark,
    solve_pso,
    solver_plan,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateCapacityError",
    "BenchmarkRow",
    "CALIBRATED_FAIR_SHARE_BPS",
    "ChannelParams",
    "ConstraintCheck",
    "ConstraintReport",
    "DEFAULT_DEMAND_FRACTIONS",
    "DEFAULT_MIN_SNR_DB",
    "DEFAULT_PACKET_SIZE_BYTES",
    "DelayInfeasibleError",
    "DemandProfile",
    "DistributionSummary",
    "FapPlan",
    "FapState",
    "FapTrace",
    "GpqmPlan",
    "InfeasibleDemandError",
    "McsEntry",
    "McsTable",
    "MobilityParams",
    "OptProblem",
    "OverlapAnalysis",
    "PlacementInfeasibleError",
    "PlacementResult",
    "PlanSeries",
    "PlannerConfig",
    "PlanningError",
    "PsoParams",
    "RateModel",
    "SPEED_OF_LIGHT_MPS",
    "SaturationError",
    "ScenarioTrace",
    "SimConfig",
    "SimMetrics",
    "Snapshot",
    "SolverResult",
    "SphereConstraint",
    "VHT160_RATES_BPS",
    "Venue",
    "calibrated_mcs_table",
    "check_formulation",
    "compare",
    "compute_fgw_pos",
    "default_mcs_table",
    "evaluate",
    "feasibility_margin",
    "fit_rate_model",
    "friis_snr_db",
    "generate_rwm",
    "link_budget_constant_db",
    "load_scenario",
    "load_waypoints",
    "max_distance_m",
    "md1_delay_s",
    "md1_queue_size",
    "merge_metrics",
    "mm1q_plr",
    "plan_series",
    "plan_series_from_json",
    "plan_series_to_json",
    "plan_snapshot",
    "planned_queue_size",
    "plr_curve",
    "rates_from_traffic",
    "reference_fair_share_bps",
    "rician_snr_sample",
    "run_benchmark",
    "save_scenario",
    "save_waypoints",
    "shannon_capacity_bps",
    "simulate",
    "solve_pso",
    "solver_plan",
    "sphere_pair_analysis",
    "summarize",
]
