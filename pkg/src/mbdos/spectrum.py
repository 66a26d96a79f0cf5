"""Weighted energy spectra: the common output type of the exact and truncated paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


@dataclass(frozen=True)
class WeightedSpectrum:
    """Energies with positive integer multiplicities, sorted ascending."""

    energies: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        m = np.asarray(self.multiplicities, dtype=np.int64)
        if e.shape != m.shape or e.ndim != 1:
            raise ValueError("energies and multiplicities must be 1-d and congruent")
        if len(m) and m.min() < 1:
            raise ValueError("multiplicities must be positive")
        order = np.argsort(e, kind="stable")
        e, m = e[order], m[order]
        e.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "multiplicities", m)

    @classmethod
    def from_energies(cls, values: Iterable[float]) -> "WeightedSpectrum":
        """Build from raw energies, merging only exactly-equal floats."""
        arr = np.fromiter(values, dtype=np.float64)
        if arr.size == 0:
            return cls(energies=arr, multiplicities=np.zeros(0, dtype=np.int64))
        uniq, counts = np.unique(arr, return_counts=True)
        return cls(energies=uniq, multiplicities=counts)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]]) -> "WeightedSpectrum":
        pairs = list(pairs)
        return cls(
            energies=np.array([p[0] for p in pairs], dtype=np.float64),
            multiplicities=np.array([p[1] for p in pairs], dtype=np.int64),
        )

    @property
    def entries(self) -> list[tuple[float, int]]:
        return [(float(e), int(m)) for e, m in zip(self.energies, self.multiplicities)]

    def __len__(self) -> int:
        return len(self.energies)

    def __iter__(self) -> Iterator[tuple[float, int]]:
        return iter(self.entries)

    def total_multiplicity(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self) -> np.ndarray:
        """All energies repeated by multiplicity, sorted."""
        return np.repeat(self.energies, self.multiplicities)

    def mean(self) -> float:
        return float(np.average(self.energies, weights=self.multiplicities))

    def std(self) -> float:
        mu = self.mean()
        return float(
            np.sqrt(np.average((self.energies - mu) ** 2, weights=self.multiplicities))
        )

    def span(self) -> float:
        return float(self.energies[-1] - self.energies[0]) if len(self) else 0.0

    def mean_level_spacing(self) -> float:
        """Span divided by the number of gaps in the full (expanded) spectrum."""
        total = self.total_multiplicity()
        if total < 2:
            raise ValueError("mean level spacing needs at least two states")
        return self.span() / (total - 1)

    def shifted(self, delta: float) -> "WeightedSpectrum":
        return WeightedSpectrum(
            energies=self.energies + delta, multiplicities=self.multiplicities
        )


def spectra_match(a: WeightedSpectrum, b: WeightedSpectrum, tol: float = 1e-9) -> bool:
    """Multiset comparison: equal total counts and sorted energies within tol."""
    if a.total_multiplicity() != b.total_multiplicity():
        return False
    ea, eb = a.expanded(), b.expanded()
    return bool(len(ea) == len(eb) and (len(ea) == 0 or np.max(np.abs(ea - eb)) <= tol))


def write_spectrum_csv(spec: WeightedSpectrum, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("energy,multiplicity\n")
        for e, m in zip(spec.energies, spec.multiplicities):
            fh.write(f"{e!r},{m}\n")


def read_spectrum_csv(path) -> WeightedSpectrum:
    energies, mults = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("energy"):
            raise ValueError(f"not a spectrum CSV: {path}")
        for line in fh:
            if not line.strip():
                continue
            e, m = line.split(",")
            energies.append(float(e))
            mults.append(int(m))
    return WeightedSpectrum(
        energies=np.array(energies), multiplicities=np.array(mults, dtype=np.int64)
    )
