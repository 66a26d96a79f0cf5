"""Partition of Fourier indices into q-sectors and folding between them.

For L single-body levels, the index l in [1, L-1] belongs to the sector
q = L / gcd(L, l); the degenerate q=1 sector holds l = 0.  Sectors are
connected by fold edges that divide q by one of its prime factors, and an
occupation vector folds into a shorter one whose Fourier value in the target
sector is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .cyclotomic import divisors, prime_factors, totient


@dataclass(frozen=True)
class SectorFlow:
    """Sector partition of {0, ..., L-1} plus prime-quotient fold edges.

    sectors maps each divisor q of L to the sorted tuple of its member
    indices l; edges are (q_from, q_to, prime) with q_to = q_from / prime.
    """

    L: int
    sectors: dict[int, tuple[int, ...]]
    edges: tuple[tuple[int, int, int], ...]

    def members(self, q: int) -> tuple[int, ...]:
        return self.sectors[q]

    @property
    def qs_descending(self) -> list[int]:
        return sorted(self.sectors, reverse=True)

    def to_jsonable(self) -> dict:
        return {
            "L": self.L,
            "sectors": {str(q): list(self.sectors[q]) for q in self.qs_descending},
            "edges": [list(e) for e in self.edges],
        }


@lru_cache(maxsize=None)
def sector_partition(L: int) -> SectorFlow:
    """Partition indices into q-sectors and list the prime fold edges."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    secs: dict[int, list[int]] = {q: [] for q in divisors(L)}
    secs[1].append(0)
    for l in range(1, L):
        secs[L // math.gcd(L, l)].append(l)
    edges = []
    for q in sorted(secs, reverse=True):
        if q == 1:
            continue
        for p in prime_factors(q):
            edges.append((q, q // p, p))
    return SectorFlow(
        L=L,
        sectors={q: tuple(sorted(ls)) for q, ls in secs.items()},
        edges=tuple(edges),
    )


def galois_group(q: int) -> list[int]:
    """Exponents k with gcd(k, q) = 1 labelling the automorphisms of order q.

    For q = 1 the group is trivial; it is represented by the single label 0.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return [0]
    return [k for k in range(1, q) if math.gcd(k, q) == 1]


def fold_config(n: Sequence[int], target_q: int) -> tuple[int, ...]:
    """Fold an occupation vector onto target_q levels, preserving particle number.

    m[k] collects the occupancies of all levels congruent to k mod target_q.
    """
    L = len(n)
    if target_q < 1 or L % target_q != 0:
        raise ValueError(f"target_q={target_q} does not divide L={L}")
    reps = L // target_q
    return tuple(
        sum(n[p * target_q + k] for p in range(reps)) for k in range(target_q)
    )


def sector_of(L: int, l: int) -> int:
    """The q-sector containing index l."""
    if not 0 <= l < L:
        raise ValueError(f"l must lie in [0, {L}), got {l}")
    return L // math.gcd(L, l) if l else 1


__all__ = [
    "SectorFlow",
    "sector_partition",
    "galois_group",
    "fold_config",
    "sector_of",
    "totient",
]
