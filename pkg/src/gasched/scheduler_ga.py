"""Binds the GA engine to the scheduling matrix.

Candidate schedules are flattened matrix bodies with one row per job;
the physical queue depth ``m`` caps how many jobs one machine's column
may hold. Decoding repairs row feasibility (leftmost 1 wins) and then
column capacity (entries beyond ``m`` per column are evicted into
dropped rows), so every genome scores as a physically realizable
schedule and the GA optimum is comparable with exhaustive search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Sequence

from . import ga_core
from .errors import DimensionError
from .ga_core import GaConfig, Genome
from .schedule_matrix import (
    OverloadConfig,
    ScheduleMatrix,
    column_loads,
    from_genome,
    mutate_dropped_rows,
    rebalance_crossover,
    repair_column_capacity,
)

if TYPE_CHECKING:
    from .simulator import Job


@dataclass
class SchedulerFitnessConfig:
    """Weights of the scalar objective; dropped jobs must dominate."""

    overload: OverloadConfig
    drop_weight: float = 100.0
    overload_weight: float = 1.0
    infeasible_row_penalty: float = 10.0

    def __post_init__(self):
        if self.drop_weight <= 0:
            raise ValueError("drop_weight must be positive")
        if self.overload_weight < 0 or self.infeasible_row_penalty < 0:
            raise ValueError("weights must be non-negative")


@dataclass
class SchedulingProblem:
    jobs: Sequence["Job"]
    k: int
    m: int
    fitness_cfg: SchedulerFitnessConfig
    ga_cfg: GaConfig

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("need k >= 1 machines and queue depth m >= 1")
        if not self.jobs:
            raise ValueError("jobs must be nonempty")
        overload = self.fitness_cfg.overload
        if overload.w > self.m:
            raise ValueError("w must not exceed the queue depth m")
        if overload.delta > self.k:
            raise ValueError("delta must not exceed the machine count k")


def schedule_fitness(matrix: ScheduleMatrix, cfg: SchedulerFitnessConfig) -> float:
    """Weighted count of dropped rows, overloaded machines, and row
    constraint violations; zero exactly when none of the three occur."""
    drops = len(matrix.dropped_rows())
    loads = column_loads(matrix)
    overloads = sum(1 for load in loads if load > cfg.overload.w)
    violations = sum(
        max(0, int(row.sum()) - 1) for row in (matrix.head, *matrix.body)
    )
    return (
        cfg.drop_weight * drops
        + cfg.overload_weight * overloads
        + cfg.infeasible_row_penalty * violations
    )


def feasible(matrix: ScheduleMatrix, cfg: SchedulerFitnessConfig) -> bool:
    """True iff every row waits at <= 1 machine and at most ``delta``
    machines are overloaded."""
    if any(int(row.sum()) > 1 for row in (matrix.head, *matrix.body)):
        return False
    loads = column_loads(matrix)
    overloads = sum(1 for load in loads if load > cfg.overload.w)
    return overloads <= cfg.overload.delta


def make_fitness(job_count: int, k: int, m: int, cfg: SchedulerFitnessConfig):
    """Fitness over flattened (job_count x k) bodies, memoized.

    Scores each genome exactly as ``schedule_fitness`` applied to the
    decoded-and-repaired matrix (see :func:`decode_schedule`), but via a
    direct scan so population evaluation stays cheap.
    """
    length = job_count * k
    a = cfg.drop_weight
    b = cfg.overload_weight
    w = cfg.overload.w
    cache: dict[tuple[int, ...], float] = {}

    def fitness(genome: Genome) -> float:
        if len(genome) != length:
            raise DimensionError(f"genome length {len(genome)} != jobs*k = {length}")
        bits = genome.bits
        value = cache.get(bits)
        if value is None:
            loads = [0] * k
            drops = 0
            for r in range(job_count):
                base = r * k
                row = bits[base : base + k]
                for j in range(k):
                    if row[j]:
                        if loads[j] < m:  # leftmost 1 wins; full column evicts
                            loads[j] += 1
                        else:
                            drops += 1
                        break
                else:
                    drops += 1
            overloads = sum(1 for load in loads if load > w)
            value = a * drops + b * overloads
            cache[bits] = value
        return value

    return fitness


def decode_schedule(
    genome: Genome, job_ids: Sequence[int], k: int, m: int
) -> ScheduleMatrix:
    """Genome -> matrix with one body row per job, repaired for row
    feasibility and per-column capacity ``m``."""
    matrix = from_genome(genome, len(job_ids), k, list(job_ids))
    return repair_column_capacity(matrix, m)


def random_placement_genome(job_count: int, k: int, m: int, rng) -> Genome:
    """One job per row, each sent to a uniformly random machine; jobs
    landing on a machine whose column is already full stay as all-zero
    (dropped) rows."""
    counts = [0] * k
    bits = [0] * (job_count * k)
    for r in range(job_count):
        col = rng.randrange(k)
        if counts[col] < m:
            counts[col] += 1
            bits[r * k + col] = 1
    return Genome(tuple(bits))


class OptimizeResult(NamedTuple):
    matrix: ScheduleMatrix
    fitness: float
    history: list[float]


def optimize_schedule(problem: SchedulingProblem) -> OptimizeResult:
    """Evolve a schedule for the problem's jobs and return the best
    matrix ever seen, its fitness, and the best-fitness history."""
    job_ids = [job.id for job in problem.jobs]
    job_count = len(job_ids)
    k, m = problem.k, problem.m
    cfg = problem.fitness_cfg
    fitness = make_fitness(job_count, k, m, cfg)

    def initializer(rng):
        return random_placement_genome(job_count, k, m, rng)

    best, history = ga_core.run(initializer, fitness, problem.ga_cfg)
    matrix = decode_schedule(best.genome, job_ids, k, m)

    # final polish: spread overloaded queues, then requeue dropped jobs
    # into columns that still have physical room
    polish_rng = ga_core.stream(problem.ga_cfg.rng_seed, "polish")
    polished, _ = rebalance_crossover(matrix, cfg.overload, polish_rng)
    polished = mutate_dropped_rows(polished, polish_rng, max_load=m)
    polished_fitness = schedule_fitness(polished, cfg)
    if polished_fitness <= best.fitness:
        return OptimizeResult(polished, polished_fitness, history)
    return OptimizeResult(matrix, best.fitness, history)
