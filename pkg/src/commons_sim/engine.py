"""Multi-agent scenario runner with a shared per-resource consumption ledger."""
from __future__ import annotations

import os
import statistics
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .agent import AgentState, GaConfig, init_population, step_generation
from .knapsack import (
    InvalidArgumentError,
    ProblemInstance,
    solve_bruteforce,
    solve_dp,
    table1_instance,
)
from .metrics import UtilityParams, solution_entropy

PRESETS = ("optimal", "satisficing", "accelerated")
CALIBRATION_GENERATION = 1600


@dataclass
class ScenarioConfig:
    agent_count: int
    generations: int
    instance: ProblemInstance
    ga: GaConfig
    master_seed: int
    satisfaction_fractions: list
    accelerations: list
    reserves: list
    halt_on_tragedy: bool = False
    utility: UtilityParams = field(default_factory=UtilityParams)

    def __post_init__(self):
        if self.agent_count < 1:
            raise InvalidArgumentError("agent_count must be >= 1")
        if self.generations < 0:
            raise InvalidArgumentError("generations must be >= 0")
        if len(self.satisfaction_fractions) != self.agent_count:
            raise InvalidArgumentError("satisfaction_fractions must have one entry per agent")
        if len(self.accelerations) != self.agent_count:
            raise InvalidArgumentError("accelerations must have one entry per agent")
        if len(self.reserves) != self.instance.item_count:
            raise InvalidArgumentError("reserves must have one entry per item")
        for s in self.satisfaction_fractions:
            if not 0.0 < s <= 1.0:
                raise InvalidArgumentError(f"satisfaction fraction {s} outside (0, 1]")
        for a in self.accelerations:
            if int(a) != a or a < 1:
                raise InvalidArgumentError(f"acceleration {a} is not a positive integer")
        for t in self.reserves:
            if t < 0:
                raise InvalidArgumentError(f"reserve {t} is negative")


@dataclass
class ResourceLedger:
    cumulative: list
    reserves: list
    crossing_generation: list

    @classmethod
    def empty(cls, reserves) -> "ResourceLedger":
        return cls([0] * len(reserves), list(reserves), [None] * len(reserves))

    def charge(self, generation: int, consumed) -> None:
        for i, amount in enumerate(consumed):
            self.cumulative[i] += amount
            if self.crossing_generation[i] is None and self.cumulative[i] > self.reserves[i]:
                self.crossing_generation[i] = generation

    def any_crossed(self) -> bool:
        return any(g is not None for g in self.crossing_generation)


@dataclass
class GenerationRecord:
    generation: int
    per_resource_consumed: list
    per_resource_cumulative: list
    entropy: float
    agents_at_optimum: int
    per_agent_value: list
    per_agent_at_optimum: list
    per_agent_bits: list


@dataclass
class RunResult:
    config: ScenarioConfig
    optimal_value: float
    optimal_bits: tuple
    records: list
    ledger: ResourceLedger
    optimum_generations: list


def default_reserves(instance: ProblemInstance, agent_count: int, optimal_bits=None) -> list:
    """One shared threshold for every resource.

    Sized so that N agents all holding the optimum exhaust the heaviest item of
    the optimum at CALIBRATION_GENERATION.
    """
    if optimal_bits is None:
        optimal_bits = certify(instance).solution.bits
    heaviest = max((w for w, b in zip(instance.weights, optimal_bits) if b), default=max(instance.weights))
    return [heaviest * agent_count * CALIBRATION_GENERATION] * instance.item_count


def _scenario_rng(master_seed: int) -> np.random.Generator:
    # agent streams use ids >= 1; id 0 is reserved for scenario-level draws
    return np.random.default_rng(np.random.SeedSequence([master_seed & (2**64 - 1), 0]))


def scenario_presets(
    name: str,
    master_seed: int = 0,
    *,
    accelerated_fraction: float = 0.2,
    acceleration_factor: int = 5,
    satisfaction_range: tuple = (0.5, 0.9),
) -> ScenarioConfig:
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    instance = table1_instance()
    n = 25
    sat = [1.0] * n
    acc = [1] * n
    rng = _scenario_rng(master_seed)
    if name == "satisficing":
        lo, hi = satisfaction_range
        sat = [float(s) for s in rng.uniform(lo, hi, size=n)]
    elif name == "accelerated":
        picked = rng.choice(n, size=int(round(accelerated_fraction * n)), replace=False)
        for j in picked:
            acc[int(j)] = acceleration_factor
    return ScenarioConfig(
        agent_count=n,
        generations=2000,
        instance=instance,
        ga=GaConfig(population_size=45, selection_size=45),
        master_seed=master_seed,
        satisfaction_fractions=sat,
        accelerations=acc,
        reserves=default_reserves(instance, n),
    )


def resolve_threads(threads: Optional[int] = None) -> int:
    # per-agent work is small and GIL-bound, so "auto" steps agents serially
    if threads is None:
        env = os.environ.get("COMMONS_SIM_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def certify(instance: ProblemInstance):
    if instance.integer_weights:
        return solve_dp(instance)
    return solve_bruteforce(instance)


def run_scenario(config: ScenarioConfig, threads: Optional[int] = None) -> RunResult:
    """Step every agent once per generation and charge incumbents to the ledger.

    Agents are independent, each owning its own random stream, so they can be
    stepped on a thread pool; the ledger is updated afterwards in agent order.
    """
    instance = config.instance
    optimum = certify(instance)
    weights = np.asarray(instance.weights)
    agents = [
        AgentState.create(j + 1, config.master_seed, config.satisfaction_fractions[j], config.accelerations[j])
        for j in range(config.agent_count)
    ]
    ledger = ResourceLedger.empty(config.reserves)
    records = []
    workers = min(resolve_threads(threads), config.agent_count)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def _map(fn):
        if pool is None:
            return [fn(a) for a in agents]
        return list(pool.map(fn, agents))

    try:
        if config.generations > 0:
            _map(lambda a: init_population(a, instance, config.ga))
        for k in range(1, config.generations + 1):
            _map(lambda a: step_generation(a, instance, config.ga, optimum, k))
            bits = [a.incumbent.bits if a.incumbent is not None else None for a in agents]
            chosen = np.zeros(instance.item_count, dtype=np.int64)
            for b in bits:
                if b is not None:
                    chosen += np.asarray(b, dtype=np.int64)
            consumed = (chosen * weights).tolist()
            ledger.charge(k, consumed)
            flags = [a.at_optimum(optimum) for a in agents]
            records.append(
                GenerationRecord(
                    generation=k,
                    per_resource_consumed=consumed,
                    per_resource_cumulative=list(ledger.cumulative),
                    entropy=solution_entropy(bits),
                    agents_at_optimum=sum(flags),
                    per_agent_value=[a.value for a in agents],
                    per_agent_at_optimum=flags,
                    per_agent_bits=bits,
                )
            )
            if config.halt_on_tragedy and ledger.any_crossed():
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return RunResult(
        config=config,
        optimal_value=optimum.optimal_value,
        optimal_bits=optimum.solution.bits,
        records=records,
        ledger=ledger,
        optimum_generations=[list(a.optimum_generations) for a in agents],
    )


def _run_for_ledger(cfg: ScenarioConfig) -> ResourceLedger:
    return run_scenario(cfg, threads=1).ledger


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get("COMMONS_SIM_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_many(configs, workers: Optional[int] = None) -> list:
    """Final ledgers for independent runs, in input order, optionally across processes."""
    configs = list(configs)
    workers = min(resolve_workers(workers), max(1, len(configs)))
    if workers == 1:
        return [_run_for_ledger(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_for_ledger, configs))


def satisfaction_sweep(levels, base: ScenarioConfig, seeds, workers: Optional[int] = None) -> list:
    """Mean/stddev of end-of-run max-resource consumption for each satisfaction level.

    Returns one dict per level with the per-seed totals kept under "values".
    """
    levels = list(levels)
    if not levels:
        raise InvalidArgumentError("levels must be non-empty")
    for s in levels:
        if not 0.0 < s <= 1.0:
            raise InvalidArgumentError(f"satisfaction level {s} outside (0, 1]")
    seeds = list(seeds)
    configs = [
        replace(base, master_seed=seed, satisfaction_fractions=[s] * base.agent_count, halt_on_tragedy=False)
        for s in levels
        for seed in seeds
    ]
    ledgers = iter(run_many(configs, workers))
    rows = []
    for s in levels:
        totals = [max(next(ledgers).cumulative) for _ in seeds]
        rows.append(
            {
                "level": s,
                "mean": statistics.fmean(totals) if totals else float("nan"),
                "stddev": statistics.pstdev(totals) if len(totals) > 1 else 0.0,
                "values": list(zip(seeds, totals)),
            }
        )
    return rows
