"""Security workbench for class-based blockchain sharding.

Exact failure-probability analytics for jury-per-shard consensus, an
event-sourced membership/court state machine, and Monte Carlo simulation of
adversary placement strategies.
"""

from .logprob import LogProb, log_of_fraction
from .params import (
    AdversaryAllocation,
    AllocationOverflowError,
    ParameterError,
    SystemParams,
)
from .analytics import (
    GuardError,
    ManipulationBound,
    SECONDS_PER_YEAR,
    ShardLimit,
    any_jury_tail_prob,
    hypergeom_tail,
    jury_tail_prob,
    liveness_threshold,
    manipulation_prob,
    max_manipulation_prob,
    max_shards_for_target,
    optimal_allocation,
    throughput,
    time_to_fail,
)
from .membership import (
    AdmissionReport,
    CourtState,
    LogError,
    MembershipError,
    replay,
    replay_path,
)
from .sim import (
    CustomAllocation,
    EpochOutcome,
    ExhaustiveResult,
    FrontLoaded,
    LongRunStats,
    TrialReport,
    UniformSpread,
    assign_epoch,
    exhaustive,
    long_run,
    monte_carlo,
    strategy_from_config,
)

__version__ = "0.1.0"

__all__ = [
    "LogProb",
    "log_of_fraction",
    "AdversaryAllocation",
    "AllocationOverflowError",
    "ParameterError",
    "SystemParams",
    "GuardError",
    "ManipulationBound",
    "SECONDS_PER_YEAR",
    "ShardLimit",
    "any_jury_tail_prob",
    "hypergeom_tail",
    "jury_tail_prob",
    "liveness_threshold",
    "manipulation_prob",
    "max_manipulation_prob",
    "max_shards_for_target",
    "optimal_allocation",
    "throughput",
    "time_to_fail",
    "AdmissionReport",
    "CourtState",
    "LogError",
    "MembershipError",
    "replay",
    "replay_path",
    "CustomAllocation",
    "EpochOutcome",
    "ExhaustiveResult",
    "FrontLoaded",
    "LongRunStats",
    "TrialReport",
    "UniformSpread",
    "assign_epoch",
    "exhaustive",
    "long_run",
    "monte_carlo",
    "strategy_from_config",
    "__version__",
]
