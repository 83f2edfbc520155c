import copy
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commons_sim.agent import (
    AgentState,
    GaConfig,
    SeedingError,
    crossover,
    init_population,
    mutate,
    select_feasible,
    step_generation,
)
from commons_sim.knapsack import InvalidArgumentError, ProblemInstance, evaluate, solve_dp

X_OPT = (1, 1, 0, 1, 1, 0, 0, 1, 0, 0)


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        GaConfig(population_size=10, selection_size=11)
    with pytest.raises(InvalidArgumentError):
        GaConfig(mutation_rate=1.5)
    assert GaConfig().rate_for(ProblemInstance([1] * 10, [1.0] * 10, 5)) == 0.1


def test_init_population_table1(table1):
    agent = init_population(AgentState.create(1, 42), table1, GaConfig())
    assert agent.population.shape == (45, 10)
    assert set(np.unique(agent.population)) <= {0, 1}
    assert agent.incumbent is not None
    assert agent.incumbent.total_weight <= table1.capacity


def test_init_population_unconstrained():
    inst = ProblemInstance([3, 5, 7, 11], [1.0, 2.0, 3.0, 4.0], 100)
    agent = init_population(AgentState.create(3, 0), inst, GaConfig(population_size=8, selection_size=8))
    best = max(evaluate(inst, row).total_value for row in agent.population)
    assert agent.incumbent.total_value == best


def test_init_population_capacity_zero_seeding_rate():
    # only the all-zeros row is feasible; success per attempt is P(Binomial(4, 1/4) >= 2)
    inst = ProblemInstance([1, 1], [1.0, 1.0], 0)
    cfg = GaConfig(population_size=4, selection_size=4, max_reseed_attempts=1)
    p = 1 / 4
    exact = 1 - sum(comb(4, k) * p**k * (1 - p) ** (4 - k) for k in (0, 1))
    trials = 4000
    ok = 0
    for seed in range(trials):
        try:
            init_population(AgentState.create(1, seed), inst, cfg)
            ok += 1
        except SeedingError:
            pass
    se = (exact * (1 - exact) / trials) ** 0.5
    assert abs(ok / trials - exact) < 4 * se


def test_init_population_seeding_failure_names_agent():
    inst = ProblemInstance([1] * 10, [1.0] * 10, 0)
    with pytest.raises(SeedingError) as err:
        init_population(AgentState.create(7, 1), inst, GaConfig(max_reseed_attempts=3))
    assert err.value.agent_id == 7


def test_select_feasible_orders_by_value(table1, table1_opt):
    pop = np.array([[0] * 10, [1] * 10, list(X_OPT)], dtype=np.int8)
    kept = select_feasible(pop, table1, GaConfig())
    assert [s.bits for s in kept] == [X_OPT, (0,) * 10]
    assert select_feasible(np.ones((3, 10), dtype=np.int8), table1, GaConfig()) == []


def test_select_feasible_truncates():
    rng = np.random.default_rng(5)
    inst = ProblemInstance(list(range(1, 13)), list(rng.uniform(1, 10, 12)), 1000)
    pop = rng.integers(0, 2, size=(50, 12))
    kept = select_feasible(pop, inst, GaConfig(population_size=50, selection_size=45))
    assert len(kept) == 45
    kept_bits = {s.bits for s in kept}
    excluded = [evaluate(inst, r).total_value for r in pop if tuple(int(b) for b in r) not in kept_bits]
    assert min(s.total_value for s in kept) >= max(excluded)


def test_crossover_examples():
    m = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
    n = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1]
    assert crossover(m, n).tolist() == [1] * 10
    assert crossover(m, m).tolist() == m
    assert crossover([1, 0, 1], [0, 1, 0]).tolist() == [1, 0, 0]
    with pytest.raises(InvalidArgumentError):
        crossover([1, 0], [1, 0, 1])


def test_mutate_extremes():
    rng = np.random.default_rng(0)
    child = np.array([1, 0, 1, 1, 0], dtype=np.int8)
    assert mutate(child, 0.0, rng).tolist() == child.tolist()
    assert mutate(child, 1.0, rng).tolist() == (1 - child).tolist()


def test_mutate_mean_flip_count():
    rng = np.random.default_rng(11)
    children = np.zeros((100_000, 10), dtype=np.int8)
    flips = mutate(children, 0.1, rng).sum(axis=1)
    assert abs(flips.mean() - 1.0) < 0.02


def test_mutate_deterministic_given_stream():
    child = np.zeros(10, dtype=np.int8)
    a = mutate(child, 0.3, np.random.default_rng(9))
    b = mutate(child, 0.3, np.random.default_rng(9))
    assert a.tolist() == b.tolist()


def test_frozen_agent_is_absorbing(table1, table1_opt):
    agent = init_population(AgentState.create(1, 3), table1, GaConfig())
    agent.incumbent = evaluate(table1, X_OPT)
    for k in range(1, 6):
        step_generation(agent, table1, GaConfig(), table1_opt, k)
        assert agent.frozen and agent.incumbent.bits == X_OPT
    assert agent.optimum_generations == [1, 2, 3, 4, 5]


def test_acceleration_replays_plain_steps(table1, table1_opt):
    cfg = GaConfig()
    fast = init_population(AgentState.create(4, 99, acceleration=5), table1, cfg)
    slow = init_population(AgentState.create(4, 99, acceleration=1), table1, cfg)
    for k in range(1, 4):
        step_generation(fast, table1, cfg, table1_opt, k)
        for _ in range(5):
            step_generation(slow, table1, cfg, table1_opt, k)
        assert fast.incumbent == slow.incumbent
        assert np.array_equal(fast.population, slow.population)
        assert fast.frozen == slow.frozen


def test_satisficing_agent_freezes_at_threshold(table1, table1_opt):
    cfg = GaConfig()
    agent = init_population(AgentState.create(2, 8, satisfaction_fraction=0.6), table1, cfg)
    for k in range(1, 50):
        step_generation(agent, table1, cfg, table1_opt, k)
    assert agent.frozen
    assert agent.incumbent.total_value >= 0.6 * table1_opt.optimal_value - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.5, 0.8, 1.0]), st.booleans())
def test_incumbent_monotone_and_feasible(seed, s, elitism):
    from commons_sim.knapsack import table1_instance

    inst = table1_instance()
    opt = solve_dp(inst)
    cfg = GaConfig(elitism=elitism)
    agent = init_population(AgentState.create(1, seed, satisfaction_fraction=s), inst, cfg)
    prev = agent.incumbent.total_value
    frozen_at = None
    for k in range(1, 60):
        step_generation(agent, inst, cfg, opt, k)
        assert agent.incumbent.total_weight <= inst.capacity
        assert agent.incumbent.total_value >= prev
        prev = agent.incumbent.total_value
        if agent.frozen:
            assert agent.incumbent.total_value >= s * opt.optimal_value - 1e-9
            if frozen_at is None:
                frozen_at = copy.deepcopy(agent.incumbent)
            assert agent.incumbent == frozen_at
    for g in agent.optimum_generations:
        assert g >= 1
    if agent.optimum_generations:
        assert agent.incumbent.total_value >= opt.optimal_value - 1e-9


def test_same_seed_same_trajectory(table1, table1_opt):
    cfg = GaConfig()
    a = init_population(AgentState.create(5, 1234), table1, cfg)
    b = init_population(AgentState.create(5, 1234), table1, cfg)
    for k in range(1, 30):
        step_generation(a, table1, cfg, table1_opt, k)
        step_generation(b, table1, cfg, table1_opt, k)
        assert a.incumbent == b.incumbent and np.array_equal(a.population, b.population)


def test_two_hundred_agents_reach_optimum(table1, table1_opt):
    cfg = GaConfig()
    reached = 0
    for seed in range(200):
        agent = init_population(AgentState.create(1, seed), table1, cfg)
        for k in range(1, 2001):
            step_generation(agent, table1, cfg, table1_opt, k)
            if agent.frozen:
                break
        reached += bool(agent.optimum_generations)
    assert reached / 200 >= 0.9
