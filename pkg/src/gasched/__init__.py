"""Genetic-algorithm job scheduling over a binary machine-queue matrix."""

from .errors import (
    BudgetError,
    CapacityError,
    ConfigError,
    DimensionError,
    GaschedError,
    StateError,
)
from .ga_core import (
    GaConfig,
    Genome,
    Individual,
    Population,
    crossover,
    epsilon_good_set,
    evaluate,
    has_converged,
    mutate,
    random_genome,
    run,
    select_parents,
    step_generation,
)
from .oracle import OracleResult, brute_force_best, enumerate_assignments
from .schedule_matrix import (
    OverloadConfig,
    ScheduleMatrix,
    column_load,
    column_loads,
    complete_heads,
    from_genome,
    from_text,
    inverse_select,
    mutate_dropped_rows,
    rebalance_crossover,
    recall_job,
    repair_column_capacity,
    repair_rows,
    shift_up,
    to_genome,
    to_text,
)
from .scheduler_ga import (
    OptimizeResult,
    SchedulerFitnessConfig,
    SchedulingProblem,
    decode_schedule,
    feasible,
    make_fitness,
    optimize_schedule,
    schedule_fitness,
)
from .simulator import (
    Job,
    SimConfig,
    SimMetrics,
    SimState,
    dispatch,
    load_workload,
    run_sim,
    save_workload,
    tick,
    trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CapacityError",
    "ConfigError",
    "DimensionError",
    "GaschedError",
    "StateError",
    "GaConfig",
    "Genome",
    "Individual",
    "Population",
    "crossover",
    "epsilon_good_set",
    "evaluate",
    "has_converged",
    "mutate",
    "random_genome",
    "run",
    "select_parents",
    "step_generation",
    "OracleResult",
    "brute_force_best",
    "enumerate_assignments",
    "OverloadConfig",
    "ScheduleMatrix",
    "column_load",
    "column_loads",
    "complete_heads",
    "from_genome",
    "from_text",
    "inverse_select",
    "mutate_dropped_rows",
    "rebalance_crossover",
    "recall_job",
    "repair_column_capacity",
    "repair_rows",
    "shift_up",
    "to_genome",
    "to_text",
    "OptimizeResult",
    "SchedulerFitnessConfig",
    "SchedulingProblem",
    "decode_schedule",
    "feasible",
    "make_fitness",
    "optimize_schedule",
    "schedule_fitness",
    "Job",
    "SimConfig",
    "SimMetrics",
    "SimState",
    "dispatch",
    "load_workload",
    "run_sim",
    "save_workload",
    "tick",
    "trace_csv",
]
