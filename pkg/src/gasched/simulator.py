"""Discrete-time simulation of k single-core machines fed by a job stream.

The waiting queues live in a :class:`ScheduleMatrix`: arriving jobs are
dispatched into the deepest free queue row (send failures leave a
labeled all-zero row instead), the whole matrix advances one slot per
tick when the head is clear, and the job reaching the head row is taken
into service by its machine. Finished jobs are retired through the head
row; failed jobs reaching the head are recalled to the back of the
queue until their recall budget runs out. Every ``rebalance_interval``
ticks the mutation/rebalance operators tidy the queues.

A job is always in exactly one place - pending, queued (labeled matrix
row), in service, completed, or dropped - and the simulation checks that
conservation law after every tick.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .errors import CapacityError, ConfigError, StateError
from .ga_core import GaConfig, stream
from .schedule_matrix import (
    OverloadConfig,
    ScheduleMatrix,
    column_loads,
    complete_heads,
    mutate_dropped_rows,
    rebalance_crossover,
    recall_job,
    shift_up,
)


@dataclass(frozen=True)
class Job:
    id: int
    service_time: int
    arrival: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("job id must be non-negative")
        if self.service_time < 1:
            raise ValueError("service_time must be >= 1")
        if self.arrival < 0:
            raise ValueError("arrival must be non-negative")


@dataclass
class SimConfig:
    k: int
    m: int
    send_failure_prob: float = 0.0
    rebalance_interval: int = 10
    horizon: int = 100
    max_recalls: int = 3
    overload: OverloadConfig | None = None
    seed: int = 0
    ga_rebalance: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("machines", "must be >= 1")
        if self.m < 1:
            raise ConfigError("queue_depth", "must be >= 1")
        if not 0.0 <= self.send_failure_prob <= 1.0:
            raise ConfigError("send_failure_prob", "must lie in [0, 1]")
        if self.rebalance_interval < 1:
            raise ConfigError("rebalance_interval", "must be >= 1")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be >= 1")
        if self.max_recalls < 0:
            raise ConfigError("max_recalls", "must be >= 0")
        if self.overload is None:
            self.overload = OverloadConfig(w=self.m, delta=self.k)
        if self.overload.w > self.m:
            raise ConfigError("w", "must not exceed queue_depth")
        if self.overload.delta > self.k:
            raise ConfigError("delta", "must not exceed machines")


@dataclass
class SimMetrics:
    completed: int = 0
    dropped: int = 0
    recalls: int = 0
    send_failures: int = 0
    mean_load: float = 0.0
    max_load: int = 0
    overload_ticks: int = 0
    ga_history: list[list[float]] = field(default_factory=list)
    trace: list[tuple[int, int, int, float]] = field(default_factory=list)


class SimState:
    """Mutable run state; owned by one simulation loop."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.tick_count = 0
        self.matrix = ScheduleMatrix.empty(cfg.m, cfg.k)
        self.remaining = [0] * cfg.k
        self.in_service: list[int | None] = [None] * cfg.k
        self.pending: deque[Job] = deque()
        self.service_time: dict[int, int] = {}
        self.recall_counts: dict[int, int] = {}
        self.arrived = 0
        self.completed = 0
        self.dropped = 0
        self.recalled = 0
        self.send_failures = 0
        self.load_sum = 0.0
        self.max_load = 0
        self.overload_ticks = 0
        self.ga_history: list[list[float]] = []
        self.trace: list[tuple[int, int, int, float]] = []

    def queued(self) -> int:
        return sum(1 for lab in self.matrix.labels if lab is not None)

    def serving(self) -> int:
        return sum(1 for job in self.in_service if job is not None)

    def check_conservation(self) -> None:
        accounted = (
            len(self.pending) + self.queued() + self.serving() + self.completed + self.dropped
        )
        if accounted != self.arrived:
            raise StateError(
                f"job conservation violated at tick {self.tick_count}: "
                f"{accounted} accounted vs {self.arrived} arrived"
            )


def dispatch(state: SimState, arrivals: list[Job], rng: random.Random) -> SimState:
    """Place arriving jobs into the queue matrix.

    Every arrival attempts a send (one uniform draw each, so failure
    tallies scale with the failure probability regardless of queue
    state). A successful send puts a 1 in the deepest free row of the
    least-loaded machine's column; a failed send occupies the row with
    no 1 at all. Arrivals finding no free row are dropped.
    """
    q = state.cfg.send_failure_prob
    matrix = state.matrix
    for job in arrivals:
        state.arrived += 1
        state.service_time[job.id] = job.service_time
        failed = rng.random() < q
        if failed:
            state.send_failures += 1
        free = [i for i in range(matrix.m) if matrix.labels[i + 1] is None]
        if not free:
            state.dropped += 1
            continue
        row = max(free)
        matrix.labels[row + 1] = job.id
        if not failed:
            loads = column_loads(matrix)
            col = loads.index(min(loads))
            matrix.body[row, col] = 1
    return state


def _process_recalls(state: SimState, to_recall: list[int]) -> None:
    for job in to_recall:
        used = state.recall_counts.get(job, 0)
        if used >= state.cfg.max_recalls:
            state.dropped += 1
            continue
        try:
            state.matrix = recall_job(state.matrix, job)
        except CapacityError:
            state.dropped += 1
        else:
            state.recall_counts[job] = used + 1
            state.recalled += 1


def _ga_repack(state: SimState, rng: random.Random) -> None:
    """Optional per-interval mode: re-place the queued jobs with a full
    GA pass instead of relying on the unary operators alone."""
    from .scheduler_ga import SchedulerFitnessConfig, SchedulingProblem, optimize_schedule

    rows = [i for i in range(state.matrix.m) if state.matrix.labels[i + 1] is not None]
    if not rows:
        return
    jobs = [
        Job(state.matrix.labels[i + 1], state.service_time[state.matrix.labels[i + 1]], 0)
        for i in rows
    ]
    problem = SchedulingProblem(
        jobs=jobs,
        k=state.cfg.k,
        m=state.cfg.m,
        fitness_cfg=SchedulerFitnessConfig(overload=state.cfg.overload),
        ga_cfg=GaConfig(
            population_size=16,
            max_generations=30,
            elite_count=2,
            rng_seed=rng.getrandbits(63),
        ),
    )
    result = optimize_schedule(problem)
    for idx, i in enumerate(rows):
        state.matrix.body[i, :] = result.matrix.body[idx, :]
    state.ga_history.append(result.history)


def tick(state: SimState, rng: random.Random) -> SimState:
    """Advance the simulation by one time step.

    Order: service countdown; recall handling for a failed job sitting
    in the head row; completion ceremonies for machines that finished;
    one queue shift (skipped while the incoming job's machine is still
    busy); service intake for the new head job; then the periodic
    mutation + rebalance pass and bookkeeping.
    """
    cfg = state.cfg

    finishers = []
    for j in range(cfg.k):
        if state.remaining[j] > 0:
            state.remaining[j] -= 1
            if state.remaining[j] == 0:
                finishers.append(j)

    # a failed job shifted into the head last tick is recalled now
    if state.matrix.labels[0] is not None and not state.matrix.head.any():
        state.matrix, _, to_recall = complete_heads(state.matrix)
        _process_recalls(state, to_recall)

    # each finished machine retires its job through the head row
    for j in finishers:
        job = state.in_service[j]
        state.in_service[j] = None
        state.matrix.labels[0] = job
        state.matrix.head[j] = 1
        state.matrix, done, _ = complete_heads(state.matrix)
        state.completed += len(done)

    # advance the queues unless the next job's machine is still busy
    if state.matrix.labels[0] is None and not state.matrix.head.any():
        blocked = False
        if state.matrix.labels[1] is not None and state.matrix.body[0].any():
            machine = int(state.matrix.body[0].argmax())
            blocked = state.remaining[machine] > 0
        if not blocked:
            state.matrix = shift_up(state.matrix)
            job = state.matrix.labels[0]
            if job is not None and state.matrix.head.any():
                machine = int(state.matrix.head.argmax())
                state.matrix.head[:] = 0
                state.matrix.labels[0] = None
                state.in_service[machine] = job
                state.remaining[machine] = state.service_time[job]

    state.tick_count += 1
    if state.tick_count % cfg.rebalance_interval == 0:
        state.matrix = mutate_dropped_rows(state.matrix, rng)
        state.matrix, _ = rebalance_crossover(state.matrix, cfg.overload, rng)
        if cfg.ga_rebalance:
            _ga_repack(state, rng)

    loads = column_loads(state.matrix)
    mean_load = sum(loads) / cfg.k
    state.load_sum += mean_load
    state.max_load = max(state.max_load, max(loads))
    state.overload_ticks += sum(1 for load in loads if load > cfg.overload.w)
    state.trace.append((state.tick_count, state.completed, state.dropped, mean_load))
    state.check_conservation()
    return state


def run_sim(config: SimConfig, workload: list[Job]) -> SimMetrics:
    """Run the full horizon and collect metrics; deterministic per seed."""
    ids = [job.id for job in workload]
    if len(ids) != len(set(ids)):
        raise ConfigError("workload", "job ids must be unique")
    if any(job.arrival >= config.horizon for job in workload):
        raise ConfigError("workload", "every arrival tick must precede the horizon")
    by_tick: dict[int, list[Job]] = {}
    for job in workload:
        by_tick.setdefault(job.arrival, []).append(job)

    dispatch_rng = stream(config.seed, "dispatch")
    tick_rng = stream(config.seed, "tick")
    state = SimState(config)
    for t in range(config.horizon):
        state.pending.extend(by_tick.get(t, []))
        arrivals = list(state.pending)
        state.pending.clear()
        dispatch(state, arrivals, dispatch_rng)
        tick(state, tick_rng)

    return SimMetrics(
        completed=state.completed,
        dropped=state.dropped,
        recalls=state.recalled,
        send_failures=state.send_failures,
        mean_load=state.load_sum / config.horizon,
        max_load=state.max_load,
        overload_ticks=state.overload_ticks,
        ga_history=state.ga_history,
        trace=state.trace,
    )


def load_workload(path: str) -> list[Job]:
    """Parse a workload file: one "id arrival service_time" triple per
    line, '#' lines are comments."""
    jobs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ConfigError("workload", f"line {lineno}: expected 'id arrival service_time'")
            try:
                job_id, arrival, service = (int(p) for p in parts)
            except ValueError:
                raise ConfigError("workload", f"line {lineno}: fields must be unsigned integers")
            if min(job_id, arrival, service) < 0:
                raise ConfigError("workload", f"line {lineno}: fields must be unsigned integers")
            jobs.append(Job(id=job_id, service_time=service, arrival=arrival))
    return jobs


def save_workload(jobs: list[Job], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# id arrival service_time\n")
        for job in jobs:
            fh.write(f"{job.id} {job.arrival} {job.service_time}\n")


def trace_csv(metrics: SimMetrics) -> str:
    """Per-tick trace as CSV text."""
    lines = ["tick,completed,dropped,mean_load"]
    for tick_no, completed, dropped, mean_load in metrics.trace:
        lines.append(f"{tick_no},{completed},{dropped},{mean_load:.6f}")
    return "\n".join(lines) + "\n"
