"""Couple universal coefficient tables to system-specific energies.

The many-body energy of a degeneracy class is linear in its invariants: it is
the particle count times the mean single-body energy plus, for every kept
sector and every automorphism of that sector, the invariant combination of
the rotated basis roots weighted by the matching Fourier coefficient of the
energy vector.  That weight vector is computed once per (table, energies)
pair, after which a spectrum is a single integer-matrix product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cyclotomic import root_of_unity, totient
from .genfunc import CoefficientTable
from .sectors import galois_group
from .spectrum import WeightedSpectrum

IMAG_TOLERANCE = 1e-9


class ConventionError(Exception):
    """Imaginary residue above tolerance: a layout/convention mismatch somewhere."""


@dataclass(frozen=True)
class EffectiveEnergies:
    """Fourier coefficients of the single-body spectrum.

    Normalized so that reconstruction is an identity: the configuration energy
    equals sum_l U_l * tilde_l exactly, with U_l the plain (unnormalized)
    Fourier component of the occupation numbers.
    """

    tilde: np.ndarray

    @property
    def L(self) -> int:
        return len(self.tilde)

    @property
    def mean(self) -> float:
        return float(self.tilde[0].real)


def effective_energies(eps: Sequence[float]) -> EffectiveEnergies:
    """tilde_l = (1/L) sum_k eps_k w_L^(-k l)."""
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim != 1 or len(eps) == 0:
        raise ValueError("energies must be a non-empty 1-d vector")
    tilde = np.fft.fft(eps) / len(eps)
    tilde.setflags(write=False)
    return EffectiveEnergies(tilde=tilde)


def sector_weights(
    L: int, sectors: Sequence[int], eff: EffectiveEnergies
) -> np.ndarray:
    """Complex weight per invariant coordinate, blocks ordered like the table keys.

    Coordinate k' of sector q accumulates w_q^(g*k') * tilde_(g*L/q) over the
    Galois exponents g of the sector, pairing each automorphism with the
    Fourier index it selects.
    """
    if eff.L != L:
        raise ValueError(f"energies have L={eff.L}, table has L={L}")
    weights = []
    for q in sectors:
        d = L // q
        exps = [g for g in galois_group(q) if g != 0]
        for kp in range(totient(q)):
            acc = 0j
            for g in exps:
                acc += root_of_unity(q, g * kp) * eff.tilde[(g * d) % L]
            weights.append(acc)
    return np.array(weights, dtype=np.complex128)


def energy_of_key(
    key: tuple[int, Sequence[int]],
    eff: EffectiveEnergies,
    sectors: Sequence[int],
) -> float:
    """Energy of one (particles, invariants) key; sectors must match the key layout."""
    particles, coords = key
    dim = sum(totient(q) for q in sectors)
    if len(coords) != dim:
        raise ValueError(f"key has {len(coords)} coordinates, layout needs {dim}")
    w = sector_weights(eff.L, sectors, eff)
    value = particles * eff.tilde[0] + np.dot(np.asarray(coords, dtype=np.float64), w)
    if abs(value.imag) > IMAG_TOLERANCE:
        raise ConventionError(f"imaginary residue {value.imag:.3e} exceeds tolerance")
    return float(value.real)


def truncated_spectrum(
    table: CoefficientTable,
    eps: Sequence[float],
    particles: int,
) -> WeightedSpectrum:
    """One weighted energy per table key of the requested particle number.

    Keys are not merged: classes that happen to land on the same energy stay
    separate entries; exact at full sector sets, an approximation otherwise.
    """
    if particles > table.n_max:
        raise ValueError(
            f"table holds particle numbers up to {table.n_max}, asked for {particles}"
        )
    eps = np.asarray(eps, dtype=np.float64)
    if len(eps) != table.L:
        raise ValueError(f"energies must have length {table.L}, got {len(eps)}")
    eff = effective_energies(eps)
    coords, counts = table.slice_arrays(particles)
    w = sector_weights(table.L, table.sectors, eff)
    values = particles * eff.tilde[0] + coords @ w
    if len(values) and np.max(np.abs(values.imag)) > IMAG_TOLERANCE:
        raise ConventionError(
            f"imaginary residue {np.max(np.abs(values.imag)):.3e} exceeds tolerance"
        )
    return WeightedSpectrum(energies=values.real, multiplicities=counts)
