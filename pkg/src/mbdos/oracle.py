"""Brute-force reference implementation.

Streams every occupation vector of N particles on L levels with at most R per
level, computes Fourier components and invariant labels per configuration, and
assembles the exact many-body density of states by direct summation.  Slow by
design; every faster path in the package is tested against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .cyclotomic import root_of_unity, totient, transfer_matrix
from .sectors import fold_config
from .spectrum import WeightedSpectrum

_count_memo: dict[tuple[int, int, int], int] = {}


def count_configs(L: int, N: int, R: int) -> int:
    """Number of occupation vectors: compositions of N into L parts, each <= R."""
    if L < 0 or N < 0 or R < 0:
        raise ValueError("L, N, R must be non-negative")
    if N == 0:
        return 1
    if L == 0:
        return 0
    key = (L, N, R)
    if key not in _count_memo:
        # inclusion-exclusion over parts forced above R
        total = 0
        for j in range(min(L, N // (R + 1)) + 1):
            rem = N - j * (R + 1)
            total += (-1) ** j * math.comb(L, j) * math.comb(rem + L - 1, L - 1)
        _count_memo[key] = total
    return _count_memo[key]


def unrank_config(L: int, N: int, R: int, rank: int) -> tuple[int, ...]:
    """Configuration at position `rank` of the lexicographic stream."""
    if not 0 <= rank < count_configs(L, N, R):
        raise ValueError(f"rank {rank} out of range")
    out = []
    rem = N
    for k in range(L):
        for v in range(min(R, rem) + 1):
            below = count_configs(L - k - 1, rem - v, R)
            if rank < below:
                out.append(v)
                rem -= v
                break
            rank -= below
    return tuple(out)


def _successor(cfg: list[int], R: int) -> bool:
    # advance cfg to the next composition in lexicographic order; False at end
    L = len(cfg)
    suffix = 0
    for i in range(L - 2, -1, -1):
        suffix += cfg[i + 1]
        if cfg[i] < R and suffix >= 1:
            cfg[i] += 1
            # smallest continuation: push the remaining particles rightmost
            s = suffix - 1
            for j in range(L - 1, i, -1):
                cfg[j] = min(R, s)
                s -= cfg[j]
            return True
    return False


def enumerate_configs(
    L: int, N: int, R: int, start: int = 0, stop: int | None = None
) -> Iterator[tuple[int, ...]]:
    """Stream occupation vectors in lexicographic order, constant memory per item.

    start/stop are positions in the stream, so callers may split the range
    into independent chunks.
    """
    total = count_configs(L, N, R)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    cfg = list(unrank_config(L, N, R, start))
    yield tuple(cfg)
    for _ in range(stop - start - 1):
        if not _successor(cfg, R):
            raise AssertionError("stream ended before its counted length")
        yield tuple(cfg)


def config_matrix(L: int, N: int, R: int) -> np.ndarray:
    """Materialize the filling matrix (one row per configuration)."""
    total = count_configs(L, N, R)
    out = np.zeros((total, L), dtype=np.int64)
    for i, cfg in enumerate(enumerate_configs(L, N, R)):
        out[i] = cfg
    return out


def u_value(n: Sequence[int], l: int) -> complex:
    """Fourier component of one configuration: sum_k n_k w_L^(k*l)."""
    L = len(n)
    if not 0 <= l < L:
        raise ValueError(f"l must lie in [0, {L}), got {l}")
    return sum(nk * root_of_unity(L, k * l) for k, nk in enumerate(n) if nk)


def invariants_of(n: Sequence[int], q: int) -> tuple[int, ...]:
    """Exact invariant coordinates of a configuration in sector q.

    Folds the configuration onto q levels and pushes it through the transfer
    matrix, so the result is the basis expansion of the sector's Fourier value.
    """
    m = fold_config(n, q)
    tmat = transfer_matrix(q)
    phi = totient(q)
    return tuple(
        sum(m[k] * tmat.rows[k][j] for k in range(q) if m[k]) for j in range(phi)
    )


@dataclass(frozen=True)
class DegeneracyClass:
    """All configurations of an ensemble sharing every invariant of sector q."""

    q: int
    invariants: tuple[int, ...]
    count: int
    witness: tuple[int, ...]


def degeneracy_classes(L: int, N: int, R: int, q: int) -> list[DegeneracyClass]:
    """Group all configurations by their sector-q invariants."""
    groups: dict[tuple[int, ...], list] = {}
    for cfg in enumerate_configs(L, N, R):
        inv = invariants_of(cfg, q)
        slot = groups.setdefault(inv, [0, cfg])
        slot[0] += 1
    return [
        DegeneracyClass(q=q, invariants=inv, count=cnt, witness=wit)
        for inv, (cnt, wit) in sorted(groups.items())
    ]


def u_distribution(L: int, N: int, R: int, l: int) -> list[tuple[complex, int]]:
    """Complex plane distribution of u_value over all configurations.

    Returned per degeneracy class: (value, count), exact grouping via invariants.
    """
    q = L // math.gcd(L, l) if l else 1
    g = (l * q // L) % q if l else 0
    out = []
    for cls in degeneracy_classes(L, N, R, q):
        val = sum(
            c * root_of_unity(q, g * j) for j, c in enumerate(cls.invariants)
        )
        out.append((val, cls.count))
    return out


def exact_mbdos(L: int, N: int, R: int, eps: Sequence[float]) -> WeightedSpectrum:
    """Exact many-body spectrum by direct summation over every configuration.

    Energies computed identically per configuration are merged at exact float
    equality; nothing else is merged.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if len(eps) != L:
        raise ValueError(f"energies must have length {L}, got {len(eps)}")

    def energy(cfg):
        s = 0.0
        for k, nk in enumerate(cfg):
            if nk:
                s += nk * eps[k]
        return s

    return WeightedSpectrum.from_energies(
        energy(cfg) for cfg in enumerate_configs(L, N, R)
    )
