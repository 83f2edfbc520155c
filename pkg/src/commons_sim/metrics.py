"""Solution entropy, optimality utilities and consumer/producer payoffs."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .knapsack import InvalidArgumentError


@dataclass
class UtilityParams:
    per_use_utility: float = 1.0
    # None resolves to generations / 10
    exp_scale: Optional[float] = None
    consumer_factor: float = 0.5
    producer_factor: float = 0.5
    discount: float = 0.99
    # None resolves to the reserve of the most consumed resource
    reserve_total: Optional[float] = None

    def __post_init__(self):
        for name in ("consumer_factor", "producer_factor", "discount"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgumentError(f"{name} must be in [0, 1], got {v}")
        if self.exp_scale is not None and not self.exp_scale > 0:
            raise InvalidArgumentError("exp_scale must be positive")
        if not self.per_use_utility > 0:
            raise InvalidArgumentError("per_use_utility must be positive")

    def resolved(self, generations: int, reserve_total: float) -> "UtilityParams":
        return UtilityParams(
            per_use_utility=self.per_use_utility,
            exp_scale=self.exp_scale if self.exp_scale is not None else max(generations, 1) / 10,
            consumer_factor=self.consumer_factor,
            producer_factor=self.producer_factor,
            discount=self.discount,
            reserve_total=self.reserve_total if self.reserve_total is not None else reserve_total,
        )


def solution_entropy(solutions) -> float:
    """Normalised Shannon entropy (base 2) of the distinct-solution histogram.

    Agents holding no solution (None) form their own category.
    """
    n = len(solutions)
    if n == 0:
        raise InvalidArgumentError("solution_entropy needs at least one solution")
    if n == 1:
        return 0.0
    counts = Counter(None if s is None else tuple(int(b) for b in s) for s in solutions)
    h = -sum((c / n) * math.log2(c / n) for c in counts.values())
    return min(1.0, max(0.0, h / math.log2(n)))


def linear_utility(optimum_generations, params: UtilityParams) -> float:
    return len(optimum_generations) * params.per_use_utility


def exponential_utility(optimum_generations, total_generations: int, params: UtilityParams) -> float:
    a = params.exp_scale if params.exp_scale is not None else total_generations / 10
    if not a > 0:
        raise InvalidArgumentError("exp_scale must be positive")
    u = params.per_use_utility
    return math.fsum(u * math.exp((total_generations - g) / a) for g in optimum_generations)


def max_resource_series(records):
    """Index of the resource with the largest final cumulative use and its per-generation draw."""
    if not records:
        raise InvalidArgumentError("max_resource_series needs at least one record")
    final = records[-1].per_resource_cumulative
    i_max = max(range(len(final)), key=lambda i: (final[i], -i))
    return i_max, [r.per_resource_consumed[i_max] for r in records]


def consumer_utility(consumed: float, params: UtilityParams) -> float:
    return params.consumer_factor * consumed


def producer_utility(consumed: float, generation: int, prior_consumption: float, params: UtilityParams) -> float:
    # remaining-reserve term is deliberately unclamped; it turns negative after depletion
    if generation < 1:
        raise InvalidArgumentError("generation index starts at 1")
    beta = params.producer_factor
    remaining = params.reserve_total - prior_consumption
    return beta * consumed + params.discount ** (generation + 1) * beta * remaining


def consumer_series(series, params: UtilityParams) -> list:
    return [consumer_utility(r, params) for r in series]


def producer_series(series, params: UtilityParams) -> list:
    out = []
    prior = 0.0
    for k, r in enumerate(series, start=1):
        out.append(producer_utility(r, k, prior, params))
        prior += r
    return out


def cumulative(xs) -> list:
    total = 0.0
    out = []
    for x in xs:
        total += x
        out.append(total)
    return out


@dataclass(frozen=True)
class Divide:
    bottom_sum: float
    top_sum: float
    relative_gap: Optional[float]


def group_divide(per_agent_utilities, split_fraction: float) -> Divide:
    """Bottom floor(split*N) agents by utility against the remaining top group.

    relative_gap is None when the bottom group's total is zero.
    """
    n = len(per_agent_utilities)
    if n < 2:
        raise InvalidArgumentError("group_divide needs at least two agents")
    if not 0.0 < split_fraction < 1.0:
        raise InvalidArgumentError("split_fraction must be in (0, 1)")
    ranked = sorted(per_agent_utilities)
    cut = math.floor(split_fraction * n)
    bottom = math.fsum(ranked[:cut])
    top = math.fsum(ranked[cut:])
    gap = None if bottom == 0 else (top - bottom) / bottom
    return Divide(bottom, top, gap)


def entropy_band_occupancy(entropies, low: float = 0.5, high: float = 0.8) -> float:
    if not entropies:
        return 0.0
    return sum(1 for e in entropies if low <= e <= high) / len(entropies)
