"""Shared 0/1 knapsack instance, solution evaluation and exact oracles.

Solution values are always accumulated as a right fold over the selected
items (last item first). The DP table and the brute-force enumerator use the
same order, so the two oracles agree bit-for-bit on the optimal value and the
lexicographic tie-break is decided on identical floats.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

VALUE_TOL = 1e-9
BRUTEFORCE_MAX_ITEMS = 25

TABLE1_WEIGHTS = (996, 771, 543, 593, 621, 473, 595, 388, 935, 874)
TABLE1_VALUES = (
    54.04769411, 39.33601431, 14.83657681, 43.52375770, 66.31920392,
    26.17907976, 27.14489409, 58.72956010, 25.50253249, 49.04678721,
)


class InvalidArgumentError(ValueError):
    pass


class UnsupportedInstanceError(ValueError):
    """Raised by the DP oracle for instances with non-integer weights."""


@dataclass(frozen=True)
class ProblemInstance:
    weights: tuple
    values: tuple
    capacity: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.weights:
            raise InvalidArgumentError("weights: must contain at least one item")
        if len(self.weights) != len(self.values):
            raise InvalidArgumentError(
                f"weights/values: length mismatch ({len(self.weights)} vs {len(self.values)})"
            )
        for i, w in enumerate(self.weights):
            if isinstance(w, bool) or not isinstance(w, (int, float)) or not w > 0:
                raise InvalidArgumentError(f"weights[{i}]: must be a positive number, got {w!r}")
        for i, v in enumerate(self.values):
            if not v > 0 or not math.isfinite(v):
                raise InvalidArgumentError(f"values[{i}]: must be a positive number, got {v!r}")
        if not self.capacity >= 0:
            raise InvalidArgumentError(f"capacity: must be non-negative, got {self.capacity!r}")

    @property
    def item_count(self) -> int:
        return len(self.weights)

    @property
    def integer_weights(self) -> bool:
        return all(float(w).is_integer() for w in self.weights)

    def weight_array(self) -> np.ndarray:
        dtype = np.int64 if self.integer_weights else np.float64
        return np.asarray(self.weights, dtype=dtype)

    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"weights": list(self.weights), "values": list(self.values), "capacity": self.capacity}

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        if not isinstance(data, dict):
            raise InvalidArgumentError("instance: expected a JSON object")
        missing = [k for k in ("weights", "values", "capacity") if k not in data]
        if missing:
            raise InvalidArgumentError(f"instance: missing field(s) {', '.join(missing)}")
        for key in ("weights", "values"):
            if not isinstance(data[key], list):
                raise InvalidArgumentError(f"{key}: expected a list")
        weights = [int(w) if isinstance(w, float) and w.is_integer() else w for w in data["weights"]]
        return cls(weights, data["values"], data["capacity"])


@dataclass(frozen=True)
class Solution:
    bits: tuple
    total_weight: float
    total_value: float

    def feasible_for(self, instance: ProblemInstance) -> bool:
        return self.total_weight <= instance.capacity

    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class OptimumCertificate:
    solution: Solution
    optimal_value: float


def table1_instance() -> ProblemInstance:
    return ProblemInstance(TABLE1_WEIGHTS, TABLE1_VALUES, 0.5 * sum(TABLE1_WEIGHTS))


def load_instance(path) -> ProblemInstance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return ProblemInstance.from_dict(data)


def save_instance(instance: ProblemInstance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=2) + "\n")


def random_instance(items: int, seed: int) -> ProblemInstance:
    """Uniform random instance: integer weights in [1, 1000], values in (0, 100), half capacity."""
    if items < 1:
        raise InvalidArgumentError("items must be >= 1")
    rng = np.random.default_rng(seed)
    weights = [int(w) for w in rng.integers(1, 1001, size=items)]
    values = []
    while len(values) < items:
        v = float(rng.uniform(0.0, 100.0))
        if v > 0.0:
            values.append(v)
    return ProblemInstance(weights, values, 0.5 * sum(weights))


def _right_fold_value(bits, values) -> float:
    total = 0.0
    for i in range(len(bits) - 1, -1, -1):
        if bits[i]:
            total = values[i] + total
    return total


def evaluate(instance: ProblemInstance, bits: Sequence[int]) -> Solution:
    bits = tuple(int(b) for b in bits)
    if len(bits) != instance.item_count:
        raise InvalidArgumentError(
            f"bit vector has length {len(bits)}, instance has {instance.item_count} items"
        )
    if any(b not in (0, 1) for b in bits):
        raise InvalidArgumentError("bit vector must contain only 0/1")
    weight = sum(w for w, b in zip(instance.weights, bits) if b)
    return Solution(bits, weight, _right_fold_value(bits, instance.values))


def is_feasible(instance: ProblemInstance, solution: Solution) -> bool:
    return solution.total_weight <= instance.capacity


def evaluate_many(instance: ProblemInstance, population: np.ndarray):
    """Vectorised (weights, values) for a 2-D 0/1 array, same fold order as evaluate."""
    pop = np.asarray(population)
    weights = pop @ instance.weight_array()
    values = np.zeros(pop.shape[0], dtype=np.float64)
    vals = instance.values
    for i in range(pop.shape[1] - 1, -1, -1):
        values = np.where(pop[:, i] != 0, vals[i] + values, values)
    return weights, values


def solve_dp(instance: ProblemInstance) -> OptimumCertificate:
    """Exact optimum by a suffix DP over floor(capacity); ties go to the smallest bit vector."""
    if not instance.integer_weights:
        raise UnsupportedInstanceError("dynamic programming requires integer weights")
    cap = int(math.floor(instance.capacity))
    m = instance.item_count
    weights = [int(w) for w in instance.weights]
    values = instance.values
    # best[i][c]: best right-fold value using items i..m-1 within capacity c
    best = np.zeros((m + 1, cap + 1), dtype=np.float64)
    for i in range(m - 1, -1, -1):
        nxt = best[i + 1]
        row = nxt.copy()
        w = weights[i]
        if w <= cap:
            take = values[i] + nxt[: cap + 1 - w]
            row[w:] = np.maximum(nxt[w:], take)
        best[i] = row
    bits = []
    c = cap
    for i in range(m):
        # prefer leaving item i out whenever that is still optimal
        if best[i + 1][c] == best[i][c]:
            bits.append(0)
        else:
            bits.append(1)
            c -= weights[i]
    sol = evaluate(instance, bits)
    return OptimumCertificate(sol, sol.total_value)


def solve_bruteforce(instance: ProblemInstance) -> OptimumCertificate:
    m = instance.item_count
    if m > BRUTEFORCE_MAX_ITEMS:
        raise InvalidArgumentError(
            f"brute force refused: {m} items exceeds the limit of {BRUTEFORCE_MAX_ITEMS}"
        )
    best_value = -1.0
    best_code = None
    chunk = 1 << 16
    total = 1 << m
    # code bit (m-1-i) holds x_i, so integer order equals lexicographic order of bit vectors
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        pop = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        weights, values = evaluate_many(instance, pop)
        ok = weights <= instance.capacity
        if not ok.any():
            continue
        vals = np.where(ok, values, -1.0)
        top = vals.max()
        code = int(codes[np.flatnonzero(vals == top)[0]])
        if top > best_value:
            best_value, best_code = float(top), code
    bits = [(best_code >> (m - 1 - i)) & 1 for i in range(m)]
    sol = evaluate(instance, bits)
    return OptimumCertificate(sol, sol.total_value)
