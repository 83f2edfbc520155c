"""One agent's generational GA search over the shared knapsack instance."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .knapsack import (
    VALUE_TOL,
    InvalidArgumentError,
    OptimumCertificate,
    ProblemInstance,
    Solution,
    evaluate,
    evaluate_many,
)


class SeedingError(RuntimeError):
    def __init__(self, agent_id: int, attempts: int):
        super().__init__(
            f"agent {agent_id}: fewer than 2 feasible members after {attempts} random populations"
        )
        self.agent_id = agent_id
        self.attempts = attempts


@dataclass
class GaConfig:
    population_size: int = 45
    selection_size: int = 45
    # None means 1/M for the instance at hand
    mutation_rate: Optional[float] = None
    elitism: bool = True
    max_reseed_attempts: int = 1000

    def __post_init__(self):
        if self.population_size < 2:
            raise InvalidArgumentError("population_size must be >= 2")
        if not 1 <= self.selection_size <= self.population_size:
            raise InvalidArgumentError("selection_size must be in [1, population_size]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise InvalidArgumentError("mutation_rate must be in [0, 1]")
        if self.max_reseed_attempts < 1:
            raise InvalidArgumentError("max_reseed_attempts must be >= 1")

    def rate_for(self, instance: ProblemInstance) -> float:
        if self.mutation_rate is None:
            return 1.0 / instance.item_count
        return self.mutation_rate


def agent_rng(master_seed: int, agent_id: int) -> np.random.Generator:
    """Independent stream per agent, a pure function of (master_seed, agent_id)."""
    return np.random.default_rng(np.random.SeedSequence([master_seed & (2**64 - 1), agent_id]))


@dataclass
class AgentState:
    agent_id: int
    satisfaction_fraction: float = 1.0
    acceleration: int = 1
    population: Optional[np.ndarray] = None
    incumbent: Optional[Solution] = None
    frozen: bool = False
    optimum_generations: list = field(default_factory=list)
    rng: Optional[np.random.Generator] = None

    @classmethod
    def create(cls, agent_id, master_seed, satisfaction_fraction=1.0, acceleration=1):
        if not 0.0 < satisfaction_fraction <= 1.0:
            raise InvalidArgumentError("satisfaction_fraction must be in (0, 1]")
        if acceleration < 1:
            raise InvalidArgumentError("acceleration must be a positive integer")
        return cls(agent_id, satisfaction_fraction, acceleration, rng=agent_rng(master_seed, agent_id))

    @property
    def value(self) -> float:
        return self.incumbent.total_value if self.incumbent is not None else 0.0

    def at_optimum(self, optimum: OptimumCertificate) -> bool:
        return self.incumbent is not None and self.incumbent.total_value >= optimum.optimal_value - VALUE_TOL

    def satisfied(self, optimum: OptimumCertificate) -> bool:
        return (
            self.incumbent is not None
            and self.incumbent.total_value
            >= self.satisfaction_fraction * optimum.optimal_value - VALUE_TOL
        )


def _sort_feasible(pop, weights, values, capacity, limit):
    """Feasible rows by value descending, ties by lexicographic bit order; at most `limit`."""
    idx = np.flatnonzero(weights <= capacity)
    if idx.size == 0:
        return pop[:0], values[:0]
    feas = pop[idx]
    vals = values[idx]
    keys = [feas[:, i] for i in range(feas.shape[1] - 1, -1, -1)]
    keys.append(-vals)
    order = np.lexsort(keys)[:limit]
    return feas[order], vals[order]


def _offer_best(agent: AgentState, instance: ProblemInstance, feas, vals) -> None:
    """Replace the incumbent with the best feasible row if it is strictly better."""
    if feas.shape[0] == 0:
        return
    if agent.incumbent is None or vals[0] > agent.incumbent.total_value:
        agent.incumbent = evaluate(instance, feas[0])


def init_population(agent: AgentState, instance: ProblemInstance, config: GaConfig) -> AgentState:
    m = instance.item_count
    capacity = instance.capacity
    for _ in range(config.max_reseed_attempts):
        pop = agent.rng.integers(0, 2, size=(config.population_size, m), dtype=np.int8)
        weights, values = evaluate_many(instance, pop)
        if np.count_nonzero(weights <= capacity) >= 2:
            agent.population = pop
            feas, vals = _sort_feasible(pop, weights, values, capacity, 1)
            _offer_best(agent, instance, feas, vals)
            return agent
    raise SeedingError(agent.agent_id, config.max_reseed_attempts)


def select_feasible(population, instance: ProblemInstance, config: GaConfig) -> list:
    """Feasible members, best first, truncated to selection_size.

    Fewer than two survivors is the caller's cue to reseed; the short list is
    returned as is.
    """
    pop = np.asarray(population, dtype=np.int8)
    if pop.ndim != 2 or pop.shape[0] == 0:
        raise InvalidArgumentError("population must be a non-empty 2-D 0/1 array")
    weights, values = evaluate_many(instance, pop)
    feas, _ = _sort_feasible(pop, weights, values, instance.capacity, config.selection_size)
    return [evaluate(instance, row) for row in feas]


def crossover(parent_m, parent_n) -> np.ndarray:
    """Head of `parent_m` (ceil(M/2) bits) joined to the tail of `parent_n`.

    Works row-wise on 2-D arrays too.
    """
    a = np.asarray(parent_m)
    b = np.asarray(parent_n)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"parent shapes differ: {a.shape} vs {b.shape}")
    cut = (a.shape[-1] + 1) // 2
    return np.concatenate([a[..., :cut], b[..., cut:]], axis=-1)


def mutate(child, mutation_rate: float, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(child)
    if not 0.0 <= mutation_rate <= 1.0:
        raise InvalidArgumentError("mutation_rate must be in [0, 1]")
    flips = rng.random(c.shape) < mutation_rate
    return (c ^ flips).astype(c.dtype)


def _inner_step(agent: AgentState, instance: ProblemInstance, config: GaConfig, rate: float) -> None:
    capacity = instance.capacity
    weights, values = evaluate_many(instance, agent.population)
    feas, _ = _sort_feasible(agent.population, weights, values, capacity, config.selection_size)
    if feas.shape[0] < 2:
        init_population(agent, instance, config)
        weights, values = evaluate_many(instance, agent.population)
        feas, _ = _sort_feasible(agent.population, weights, values, capacity, config.selection_size)
    n = feas.shape[0]
    size = config.population_size
    first = agent.rng.integers(0, n, size=size)
    second = agent.rng.integers(0, n - 1, size=size)
    second = second + (second >= first)
    children = mutate(crossover(feas[first], feas[second]), rate, agent.rng)
    if config.elitism and agent.incumbent is not None:
        elite = np.asarray(agent.incumbent.bits, dtype=np.int8)[None, :]
        children = np.concatenate([children, elite], axis=0)
    agent.population = children
    weights, values = evaluate_many(instance, children)
    best, vals = _sort_feasible(children, weights, values, capacity, 1)
    _offer_best(agent, instance, best, vals)


def step_generation(
    agent: AgentState,
    instance: ProblemInstance,
    config: GaConfig,
    optimum: OptimumCertificate,
    generation_index: int,
) -> AgentState:
    if agent.population is None:
        raise InvalidArgumentError(f"agent {agent.agent_id} has not been initialised")
    if not agent.frozen:
        rate = config.rate_for(instance)
        for _ in range(agent.acceleration):
            if agent.satisfied(optimum):
                agent.frozen = True
                break
            _inner_step(agent, instance, config, rate)
        if agent.satisfied(optimum):
            agent.frozen = True
    if agent.at_optimum(optimum):
        agent.optimum_generations.append(generation_index)
    return agent
