"""Scoring and optimization of single-body energy orderings.

Dropping a sector discards its Fourier weights, so the information lost is
controlled by how much spectral amplitude the chosen level ordering puts into
that sector.  This module scores orderings (absolute-sum and power-fraction
per sector), estimates attainable minima from the single-body level spacing,
and searches the permutation group by simulated annealing with random
transpositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

import numpy as np

from .cyclotomic import totient
from .sectors import sector_of


@dataclass(frozen=True)
class OrderingScore:
    """Absolute-sum score A (energy units) and power fraction P of one sector."""

    q: int
    absolute: float
    power_fraction: float


def dft_components(eps: Sequence[float]) -> np.ndarray:
    """Unnormalized Fourier components sum_k eps_k w_L^(-k l)."""
    return np.fft.fft(np.asarray(eps, dtype=np.float64))


def sector_members(L: int, q: int) -> list[int]:
    return [l for l in range(1, L) if sector_of(L, l) == q]


def sector_scores(eps: Sequence[float], q: int) -> OrderingScore:
    """Scores of sector q for this ordering of eps.

    The power fractions of all sectors (q=1 included) sum to one by the
    Parseval identity sum_k |eps_k|^2 = (1/L) sum_l |F_l|^2.
    """
    eps = np.asarray(eps, dtype=np.float64)
    L = len(eps)
    if q <= 1 or L % q != 0:
        raise ValueError(f"q={q} is not a divisor > 1 of L={L}")
    F = dft_components(eps)
    members = sector_members(L, q)
    a = float(sum(abs(F[l]) for l in members))
    total_power = float(np.dot(eps, eps))
    p = float(sum(abs(F[l]) ** 2 for l in members) / L) / total_power
    return OrderingScore(q=q, absolute=a, power_fraction=p)


def single_body_spacing(eps: Sequence[float]) -> float:
    """Mean level spacing of the sorted single-body spectrum."""
    eps = np.asarray(eps, dtype=np.float64)
    if len(eps) < 2:
        raise ValueError("spacing undefined for fewer than two levels")
    return float((eps.max() - eps.min()) / (len(eps) - 1))


def min_estimates(q: int, eps: Sequence[float]) -> tuple[float, float]:
    """Heuristic floors for the two scores of sector q.

    The sector's Fourier weights are combinations of level sums and
    differences, each no smaller than about one mean level spacing, and the
    sector holds phi(q) of them.
    """
    if q <= 1:
        raise ValueError(f"q must be > 1, got {q}")
    eps = np.asarray(eps, dtype=np.float64)
    spacing = single_body_spacing(eps)
    phi = totient(q)
    a_min = phi * spacing
    p_min = phi * spacing**2 / float(np.dot(eps, eps))
    return a_min, p_min


@dataclass(frozen=True)
class CostSpec:
    """Weighted combination of sector scores used as the annealing objective."""

    sectors: tuple[int, ...]
    weight_absolute: float = 0.0
    weight_power: float = 1.0

    @classmethod
    def absolute(cls, *sectors: int) -> "CostSpec":
        return cls(sectors=tuple(sectors), weight_absolute=1.0, weight_power=0.0)

    @classmethod
    def power(cls, *sectors: int) -> "CostSpec":
        return cls(sectors=tuple(sectors), weight_absolute=0.0, weight_power=1.0)

    @classmethod
    def mixed(cls, *sectors: int, weight_absolute: float = 0.5, weight_power: float = 0.5) -> "CostSpec":
        return cls(
            sectors=tuple(sectors),
            weight_absolute=weight_absolute,
            weight_power=weight_power,
        )

    def cost(self, eps: Sequence[float]) -> float:
        total = 0.0
        for q in self.sectors:
            s = sector_scores(eps, q)
            total += self.weight_absolute * s.absolute + self.weight_power * s.power_fraction
        return total

    def min_estimate(self, eps: Sequence[float]) -> float:
        total = 0.0
        for q in self.sectors:
            a_min, p_min = min_estimates(q, eps)
            total += self.weight_absolute * a_min + self.weight_power * p_min
        return total


@dataclass
class AnnealResult:
    permutation: tuple[int, ...]
    cost: float
    evaluations: int
    stopped: str  # "stop-criterion" | "target" | "budget"
    trace: list[tuple[int, float]] = field(default_factory=list)


def anneal(
    eps: Sequence[float],
    cost_spec: CostSpec,
    *,
    budget: int = 100_000,
    seed: int = 0,
    stop_factor: float | None = 1.0,
    target_cost: float | None = None,
    initial_temperature: float | None = None,
    cooling: float = 0.995,
) -> AnnealResult:
    """Search orderings by simulated annealing over random transpositions.

    Stops when the best cost falls below stop_factor times the heuristic
    minimum estimate (checked before the first move, so an already-good
    ordering returns the identity), when it reaches target_cost, or when the
    evaluation budget runs out.  Deterministic for a given seed.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if len(eps) == 0:
        raise ValueError("energies must be non-empty")
    if not 0.0 < cooling < 1.0:
        raise ValueError(f"cooling must lie in (0, 1), got {cooling}")
    if initial_temperature is not None and initial_temperature <= 0:
        raise ValueError("initial temperature must be positive")
    rng = np.random.default_rng(seed)
    L = len(eps)

    floor = None
    if stop_factor is not None:
        floor = stop_factor * cost_spec.min_estimate(eps)

    perm = np.arange(L)
    current = cost_spec.cost(eps)
    best_cost = current
    best_perm = perm.copy()
    trace = [(0, best_cost)]
    evaluations = 1

    def finished() -> str | None:
        if floor is not None and best_cost < floor:
            return "stop-criterion"
        if target_cost is not None and best_cost <= target_cost + 1e-12:
            return "target"
        return None

    reason = finished()
    if reason is not None:
        return AnnealResult(
            permutation=tuple(best_perm),
            cost=best_cost,
            evaluations=evaluations,
            stopped=reason,
            trace=trace,
        )

    if initial_temperature is None:
        samples = [
            cost_spec.cost(eps[rng.permutation(L)]) for _ in range(100)
        ]
        initial_temperature = float(np.std(samples)) or 1.0
    temperature = initial_temperature

    while evaluations < budget:
        i, j = rng.integers(0, L, size=2)
        if i == j:
            continue
        perm[i], perm[j] = perm[j], perm[i]
        cost = cost_spec.cost(eps[perm])
        evaluations += 1
        delta = cost - current
        # equal-cost moves always accepted: plateau exploration
        if delta <= 0 or rng.random() < math.exp(-delta / max(temperature, 1e-300)):
            current = cost
            if cost < best_cost:
                best_cost = cost
                best_perm = perm.copy()
                trace.append((evaluations, best_cost))
                reason = finished()
                if reason is not None:
                    return AnnealResult(
                        permutation=tuple(best_perm),
                        cost=best_cost,
                        evaluations=evaluations,
                        stopped=reason,
                        trace=trace,
                    )
        else:
            perm[i], perm[j] = perm[j], perm[i]
        temperature *= cooling

    return AnnealResult(
        permutation=tuple(best_perm),
        cost=best_cost,
        evaluations=evaluations,
        stopped="budget",
        trace=trace,
    )


def exhaustive_minimum(
    eps: Sequence[float], cost_spec: CostSpec
) -> tuple[float, list[tuple[int, ...]]]:
    """Global minimum cost over all orderings, with every minimizing permutation.

    Factorial work; intended for small L cross-checks of the annealer.
    """
    eps = np.asarray(eps, dtype=np.float64)
    best = math.inf
    argmin: list[tuple[int, ...]] = []
    for p in permutations(range(len(eps))):
        c = cost_spec.cost(eps[list(p)])
        if c < best - 1e-12:
            best = c
            argmin = [p]
        elif c <= best + 1e-12:
            argmin.append(p)
    return best, argmin
