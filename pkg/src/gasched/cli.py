"""Command-line entry point: optimize, simulate, oracle-check, print-config.

Configuration is one flat key space. Flags override config-file values,
which override the documented defaults; unknown file keys are rejected.
Every output document embeds the resolved config and seed so a run can
be reproduced byte for byte.

Exit codes: 0 success, 1 GA-vs-oracle mismatch, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from typing import Any

from .errors import BudgetError, ConfigError, GaschedError
from .ga_core import GaConfig
from .oracle import brute_force_best
from .schedule_matrix import OverloadConfig, to_text
from .scheduler_ga import SchedulerFitnessConfig, SchedulingProblem, optimize_schedule
from .simulator import SimConfig, load_workload, run_sim, trace_csv


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    generations: int = 200
    population: int = 40
    mutation_rate: float = 0.05
    crossover_rate: float = 0.9
    elite_count: int = 2
    stagnation_window: int = 10
    stagnation_tol: float = 0.0
    machines: int = 3
    queue_depth: int = 3
    w: int = 2
    delta: int = 1
    send_failure_prob: float = 0.0
    rebalance_interval: int = 10
    horizon: int = 100
    max_recalls: int = 3
    ga_rebalance: bool = False
    drop_weight: float = 100.0
    overload_weight: float = 1.0
    infeasible_row_penalty: float = 10.0
    oracle_sweep: int = 20
    workload: str | None = None
    out: str | None = None
    format: str = "json"

    def resolved(self) -> dict[str, Any]:
        doc = {f.name: getattr(self, f.name) for f in fields(self)}
        doc.pop("subcommand")
        return doc

    def ga_config(self) -> GaConfig:
        return GaConfig(
            population_size=self.population,
            max_generations=self.generations,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            elite_count=self.elite_count,
            stagnation_window=self.stagnation_window,
            stagnation_tol=self.stagnation_tol,
            rng_seed=self.seed,
        )

    def fitness_config(self) -> SchedulerFitnessConfig:
        return SchedulerFitnessConfig(
            overload=OverloadConfig(w=self.w, delta=self.delta),
            drop_weight=self.drop_weight,
            overload_weight=self.overload_weight,
            infeasible_row_penalty=self.infeasible_row_penalty,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            k=self.machines,
            m=self.queue_depth,
            send_failure_prob=self.send_failure_prob,
            rebalance_interval=self.rebalance_interval,
            horizon=self.horizon,
            max_recalls=self.max_recalls,
            overload=OverloadConfig(w=self.w, delta=self.delta),
            seed=self.seed,
            ga_rebalance=self.ga_rebalance,
        )


_KEY_TYPES: dict[str, type] = {
    "seed": int,
    "generations": int,
    "population": int,
    "mutation_rate": float,
    "crossover_rate": float,
    "elite_count": int,
    "stagnation_window": int,
    "stagnation_tol": float,
    "machines": int,
    "queue_depth": int,
    "w": int,
    "delta": int,
    "send_failure_prob": float,
    "rebalance_interval": int,
    "horizon": int,
    "max_recalls": int,
    "ga_rebalance": bool,
    "drop_weight": float,
    "overload_weight": float,
    "infeasible_row_penalty": float,
    "oracle_sweep": int,
    "workload": str,
    "out": str,
    "format": str,
}

SUBCOMMANDS = ("optimize", "simulate", "oracle-check", "print-config")


def _coerce(key: str, value: Any, provenance: str) -> Any:
    want = _KEY_TYPES[key]
    if want is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(key, f"expected true/false ({provenance})")
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer ({provenance})")
        return value
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number ({provenance})")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string ({provenance})")
    return value


def _validate(cfg: RunConfig) -> None:
    positive = ("generations", "rebalance_interval", "horizon", "oracle_sweep",
                "machines", "queue_depth", "stagnation_window")
    for key in positive:
        if getattr(cfg, key) < 1:
            raise ConfigError(key, "must be >= 1")
    if cfg.population < 2:
        raise ConfigError("population", "must be >= 2")
    for key in ("mutation_rate", "crossover_rate", "send_failure_prob"):
        if not 0.0 <= getattr(cfg, key) <= 1.0:
            raise ConfigError(key, "must lie in [0, 1]")
    for key in ("w", "delta", "max_recalls", "elite_count", "seed"):
        if getattr(cfg, key) < 0:
            raise ConfigError(key, "must be >= 0")
    if cfg.stagnation_tol < 0:
        raise ConfigError("stagnation_tol", "must be >= 0")
    if cfg.drop_weight <= 0:
        raise ConfigError("drop_weight", "must be positive")
    if cfg.overload_weight < 0:
        raise ConfigError("overload_weight", "must be >= 0")
    if cfg.infeasible_row_penalty < 0:
        raise ConfigError("infeasible_row_penalty", "must be >= 0")
    if cfg.elite_count >= cfg.population:
        raise ConfigError("elite_count", "must be smaller than population")
    if cfg.w > cfg.queue_depth:
        raise ConfigError("w", "must not exceed queue_depth")
    if cfg.delta > cfg.machines:
        raise ConfigError("delta", "must not exceed machines")
    if cfg.format not in ("json", "csv", "both"):
        raise ConfigError("format", "must be one of json, csv, both")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasched", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--generations", type=int, default=None)
        p.add_argument("--population", type=int, default=None)
        p.add_argument("--mutation-rate", dest="mutation_rate", type=float, default=None)
        p.add_argument("--crossover-rate", dest="crossover_rate", type=float, default=None)
        p.add_argument("--machines", type=int, default=None)
        p.add_argument("--queue-depth", dest="queue_depth", type=int, default=None)
        p.add_argument("--w", type=int, default=None)
        p.add_argument("--delta", type=int, default=None)
        p.add_argument("--send-failure-prob", dest="send_failure_prob", type=float, default=None)
        p.add_argument("--rebalance-interval", dest="rebalance_interval", type=int, default=None)
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--workload", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, default=None, choices=("json", "csv", "both"))
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve flags over file values over defaults into a RunConfig."""
    try:
        ns = _build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise ConfigError("args", "could not parse command line") from exc
        raise
    cfg = RunConfig(subcommand=ns.subcommand)
    if ns.config is not None:
        try:
            with open(ns.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {ns.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError("config", "config file must hold a JSON object")
        for key, value in file_values.items():
            if key not in _KEY_TYPES:
                raise ConfigError(key, f"unknown config key (file {ns.config})")
            setattr(cfg, key, _coerce(key, value, f"file {ns.config}"))
    for key in _KEY_TYPES:
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            setattr(cfg, key, _coerce(key, flag_value, "flag"))
    _validate(cfg)
    return cfg


def _emit(doc: dict[str, Any], cfg: RunConfig, csv_text: str | None = None) -> None:
    doc = dict(doc)
    doc["config"] = cfg.resolved()
    doc["seed"] = cfg.seed
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
        if csv_text is not None and cfg.format in ("csv", "both"):
            sys.stdout.write(csv_text)
        return
    if cfg.format in ("json", "both") or csv_text is None:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if csv_text is not None and cfg.format in ("csv", "both"):
        csv_path = cfg.out if cfg.format == "csv" else cfg.out + ".csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(csv_text)


def _load_jobs(cfg: RunConfig) -> list:
    if cfg.workload is None:
        raise ConfigError("workload", "this subcommand needs a workload file")
    return load_workload(cfg.workload)


def _make_problem(cfg: RunConfig, jobs, seed: int | None = None) -> SchedulingProblem:
    ga_cfg = cfg.ga_config()
    if seed is not None:
        ga_cfg.rng_seed = seed
    return SchedulingProblem(
        jobs=jobs,
        k=cfg.machines,
        m=cfg.queue_depth,
        fitness_cfg=cfg.fitness_config(),
        ga_cfg=ga_cfg,
    )


def cmd_optimize(cfg: RunConfig) -> int:
    jobs = _load_jobs(cfg)
    result = optimize_schedule(_make_problem(cfg, jobs))
    _emit(
        {
            "best_fitness": result.fitness,
            "history": result.history,
            "matrix": to_text(result.matrix),
        },
        cfg,
    )
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    jobs = load_workload(cfg.workload) if cfg.workload is not None else []
    metrics = run_sim(cfg.sim_config(), jobs)
    doc = {
        "completed": metrics.completed,
        "dropped": metrics.dropped,
        "recalls": metrics.recalls,
        "send_failures": metrics.send_failures,
        "mean_load": metrics.mean_load,
        "max_load": metrics.max_load,
        "overload_ticks": metrics.overload_ticks,
        "ga_history": metrics.ga_history,
    }
    _emit(doc, cfg, csv_text=trace_csv(metrics))
    return 0


def cmd_oracle_check(cfg: RunConfig) -> int:
    jobs = _load_jobs(cfg)
    oracle = brute_force_best(len(jobs), cfg.machines, cfg.queue_depth, cfg.fitness_config())
    results = []
    for offset in range(cfg.oracle_sweep):
        result = optimize_schedule(_make_problem(cfg, jobs, seed=cfg.seed + offset))
        results.append(result.fitness)
    ga_best = min(results)
    match = ga_best == oracle.optimum
    _emit(
        {
            "oracle_optimum": oracle.optimum,
            "oracle_count": oracle.count,
            "oracle_witness": [0 if c is None else c for c in oracle.witness],
            "ga_best": ga_best,
            "ga_sweep": results,
            "match": match,
        },
        cfg,
    )
    return 0 if match else 1


def cmd_print_config(cfg: RunConfig) -> int:
    sys.stdout.write(json.dumps(cfg.resolved(), sort_keys=True, indent=2) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = parse_config(argv)
        handler = {
            "optimize": cmd_optimize,
            "simulate": cmd_simulate,
            "oracle-check": cmd_oracle_check,
            "print-config": cmd_print_config,
        }[cfg.subcommand]
        return handler(cfg)
    except (ConfigError, BudgetError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GaschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
