import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commons_sim.knapsack import (
    InvalidArgumentError,
    ProblemInstance,
    UnsupportedInstanceError,
    evaluate,
    evaluate_many,
    is_feasible,
    load_instance,
    random_instance,
    solve_bruteforce,
    solve_dp,
)

X_OPT = (1, 1, 0, 1, 1, 0, 0, 1, 0, 0)


def enumerate_optimum(weights, values, capacity):
    """Independent oracle: itertools over all subsets, fsum values, smallest bits on ties."""
    best = None
    for bits in itertools.product((0, 1), repeat=len(weights)):
        if sum(w for w, b in zip(weights, bits) if b) > capacity:
            continue
        v = math.fsum(x for x, b in zip(values, bits) if b)
        if best is None or v > best[0] + 1e-9:
            best = (v, bits)
    return best


def test_evaluate_table1_optimum(table1):
    sol = evaluate(table1, X_OPT)
    assert sol.total_weight == 996 + 771 + 593 + 621 + 388 == 3369
    expected = math.fsum([54.04769411, 39.33601431, 43.52375770, 66.31920392, 58.72956010])
    assert sol.total_value == pytest.approx(expected, abs=1e-9)
    assert sol.total_value == pytest.approx(261.95623014, abs=1e-9)


def test_evaluate_empty_and_full(table1):
    zero = evaluate(table1, [0] * 10)
    assert (zero.total_weight, zero.total_value) == (0, 0.0)
    full = evaluate(table1, [1] * 10)
    assert full.total_weight == 6789
    assert not is_feasible(table1, full)
    assert table1.capacity == 3394.5


def test_evaluate_rejects_bad_length(table1):
    with pytest.raises(InvalidArgumentError):
        evaluate(table1, [1, 0])


def test_is_feasible_boundaries(table1, table1_opt):
    assert is_feasible(table1, table1_opt.solution)
    inst = ProblemInstance([3, 4], [1.0, 2.0], 0)
    assert is_feasible(inst, evaluate(inst, [0, 0]))
    assert not is_feasible(inst, evaluate(inst, [1, 0]))


def test_instance_validation():
    with pytest.raises(InvalidArgumentError):
        ProblemInstance([], [], 1)
    with pytest.raises(InvalidArgumentError):
        ProblemInstance([1, 2], [1.0], 1)
    with pytest.raises(InvalidArgumentError):
        ProblemInstance([0], [1.0], 1)
    with pytest.raises(InvalidArgumentError):
        ProblemInstance([1], [-1.0], 1)
    with pytest.raises(InvalidArgumentError):
        ProblemInstance([1], [1.0], -1)


def test_dp_table1(table1, table1_opt):
    assert table1_opt.solution.bits == X_OPT
    assert table1_opt.optimal_value == pytest.approx(261.95623014, abs=1e-9)
    assert table1_opt.solution.total_weight == 3369


def test_dp_small_examples():
    cert = solve_dp(ProblemInstance([2, 3, 4], [3, 4, 5], 6))
    assert cert.solution.bits == (1, 0, 1)
    assert cert.optimal_value == 8
    assert enumerate_optimum([2, 3, 4], [3, 4, 5], 6) == (8, (1, 0, 1))
    zero = solve_dp(ProblemInstance([2, 3], [3, 4], 0))
    assert zero.solution.bits == (0, 0) and zero.optimal_value == 0


def test_dp_rejects_fractional_weights():
    inst = ProblemInstance([1.5, 2], [1.0, 1.0], 2)
    with pytest.raises(UnsupportedInstanceError):
        solve_dp(inst)
    assert solve_bruteforce(inst).solution.bits == (0, 1)


def test_bruteforce_examples(table1, table1_opt):
    assert solve_bruteforce(table1) == table1_opt
    heavy = solve_bruteforce(ProblemInstance([5], [1.0], 4))
    assert heavy.solution.bits == (0,)
    tie = solve_bruteforce(ProblemInstance([1, 1], [1.0, 1.0], 1))
    assert tie.solution.bits == (0, 1) and tie.optimal_value == 1.0
    assert solve_dp(ProblemInstance([1, 1], [1.0, 1.0], 1)).solution.bits == (0, 1)


def test_bruteforce_guard():
    inst = ProblemInstance([1] * 26, [1.0] * 26, 5)
    with pytest.raises(InvalidArgumentError):
        solve_bruteforce(inst)


def test_dp_equals_bruteforce_on_200_instances():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        m = int(rng.integers(1, 16))
        weights = [int(w) for w in rng.integers(1, 1001, size=m)]
        values = [float(v) for v in rng.uniform(1e-6, 100.0, size=m)]
        inst = ProblemInstance(weights, values, sum(weights) / 2)
        dp, bf = solve_dp(inst), solve_bruteforce(inst)
        assert dp.optimal_value == bf.optimal_value
        assert dp.solution.bits == bf.solution.bits


def test_random_instance_shape():
    inst = random_instance(12, 7)
    assert inst.item_count == 12
    assert all(1 <= w <= 1000 for w in inst.weights)
    assert all(0 < v < 100 for v in inst.values)
    assert inst.capacity == 0.5 * sum(inst.weights)
    assert random_instance(12, 7) == inst


def test_shipped_table1_file(table1):
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "instances" / "paper_table1.json"
    assert load_instance(path) == table1


small_instances = st.integers(1, 9).flatmap(
    lambda m: st.tuples(
        st.lists(st.integers(1, 50), min_size=m, max_size=m),
        st.lists(st.floats(0.01, 100.0), min_size=m, max_size=m),
    )
)


@settings(max_examples=150, deadline=None)
@given(small_instances, st.floats(0.0, 1.0))
def test_dp_matches_enumeration(data, frac):
    weights, values = data
    inst = ProblemInstance(weights, values, frac * sum(weights))
    cert = solve_dp(inst)
    ref_value, _ = enumerate_optimum(weights, values, inst.capacity)
    assert cert.optimal_value == pytest.approx(ref_value, abs=1e-9)
    assert is_feasible(inst, cert.solution)
    # no feasible single 0->1 flip beats the certificate
    for i, b in enumerate(cert.solution.bits):
        if not b:
            flipped = list(cert.solution.bits)
            flipped[i] = 1
            sol = evaluate(inst, flipped)
            if is_feasible(inst, sol):
                assert sol.total_value <= cert.optimal_value + 1e-9


@settings(max_examples=100, deadline=None)
@given(small_instances, st.data())
def test_evaluate_is_dot_product(data, draw):
    weights, values = data
    inst = ProblemInstance(weights, values, sum(weights))
    bits = draw.draw(st.lists(st.integers(0, 1), min_size=len(weights), max_size=len(weights)))
    sol = evaluate(inst, bits)
    assert sol.total_weight == int(np.dot(bits, weights))
    assert sol.total_value == pytest.approx(float(np.dot(bits, values)), abs=1e-9)
    assert evaluate(inst, bits) == sol
    w, v = evaluate_many(inst, np.array([bits]))
    assert w[0] == sol.total_weight and v[0] == sol.total_value
