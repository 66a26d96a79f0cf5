"""Post-processing: kernel density estimates, distances, occupancies, temperatures.

Spectra are compared after Gaussian broadening at a chosen resolution; level
occupancies come from ratios of broadened sub-system densities (the system
with one level removed and the matching particles taken out), and the inverse
temperature is estimated three ways: log-derivative of the smoothed density,
the Gaussian fit to it, and linear fits to transformed occupancies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cyclotomic import divisors
from .genfunc import CoefficientTable, expand
from .resummation import truncated_spectrum
from .spectrum import WeightedSpectrum

KERNEL_CUTOFF = 8.0  # kernel treated as zero beyond this many widths


@dataclass(frozen=True)
class DensityCurve:
    """Density values on a uniform energy grid."""

    energies: np.ndarray
    values: np.ndarray
    gamma: float
    normalization: str  # "count" | "probability"

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.energies))

    def interpolate(self, energies) -> np.ndarray:
        return np.interp(energies, self.energies, self.values)


def kde_at(spec: WeightedSpectrum, gamma: float, energies) -> np.ndarray:
    """Smoothed state counts at arbitrary energies (count normalization).

    Exact windowed Gaussian sum per evaluation point; no grid binning.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if len(spec) == 0:
        raise ValueError("empty spectrum")
    points = np.atleast_1d(np.asarray(energies, dtype=np.float64))
    centers = spec.energies
    weights = spec.multiplicities.astype(np.float64)
    norm = 1.0 / (gamma * math.sqrt(2.0 * math.pi))
    out = np.zeros(len(points))
    lo = np.searchsorted(centers, points - KERNEL_CUTOFF * gamma, side="left")
    hi = np.searchsorted(centers, points + KERNEL_CUTOFF * gamma, side="right")
    for i, (x, a, b) in enumerate(zip(points, lo, hi)):
        if a == b:
            continue
        z = (x - centers[a:b]) / gamma
        out[i] = np.dot(weights[a:b], np.exp(-0.5 * z * z))
    return out * norm


def kde_curve(
    spec: WeightedSpectrum,
    gamma: float,
    n_points: int = 1000,
    e_min: float | None = None,
    e_max: float | None = None,
    normalization: str = "probability",
) -> DensityCurve:
    """Broadened density on a uniform grid spanning the spectrum plus 5 widths."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if len(spec) == 0:
        raise ValueError("empty spectrum")
    if normalization not in ("count", "probability"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if e_min is None:
        e_min = float(spec.energies[0]) - 5.0 * gamma
    if e_max is None:
        e_max = float(spec.energies[-1]) + 5.0 * gamma
    grid = np.linspace(e_min, e_max, n_points)
    step = grid[1] - grid[0] if n_points > 1 else 1.0
    values = np.zeros(n_points)
    centers = spec.energies
    weights = spec.multiplicities.astype(np.float64)
    radius = KERNEL_CUTOFF * gamma
    # windowed scatter-add per entry, chunked to keep the index matrix small
    window = int(math.ceil(radius / step)) + 1
    chunk = max(1, int(4e6) // max(window, 1))
    idx0 = np.searchsorted(grid, centers - radius, side="left")
    for s in range(0, len(centers), chunk):
        e = centers[s : s + chunk]
        wgt = weights[s : s + chunk]
        base = idx0[s : s + chunk]
        offsets = np.arange(2 * window + 1)
        cols = base[:, None] + offsets[None, :]
        valid = cols < n_points
        cols = np.clip(cols, 0, n_points - 1)
        z = (grid[cols] - e[:, None]) / gamma
        contrib = wgt[:, None] * np.exp(-0.5 * z * z)
        contrib[(np.abs(z) > KERNEL_CUTOFF) | ~valid] = 0.0
        np.add.at(values, cols.ravel(), contrib.ravel())
    values /= gamma * math.sqrt(2.0 * math.pi)
    if normalization == "probability":
        values = values / spec.total_multiplicity()
    return DensityCurve(
        energies=grid, values=values, gamma=gamma, normalization=normalization
    )


def lp_distance(a: DensityCurve, b: DensityCurve, p: float) -> float:
    """Pointwise p-norm of the difference of two curves on the same grid."""
    if p <= 0:
        raise ValueError("p must be positive")
    if a.energies.shape != b.energies.shape or not np.array_equal(
        a.energies, b.energies
    ):
        raise ValueError("curves live on different grids")
    if a.normalization != b.normalization:
        raise ValueError("curves use different normalizations")
    return float(np.sum(np.abs(a.values - b.values) ** p) ** (1.0 / p))


# -- occupancy ---------------------------------------------------------------


def drop_top_sectors(L: int, depth: int) -> tuple[int, ...]:
    """All divisor sectors of L above 1, with the `depth` largest removed."""
    qs = [q for q in divisors(L) if q > 1]
    if depth < 0 or depth > len(qs):
        raise ValueError(f"cannot drop {depth} of {len(qs)} sectors")
    return tuple(sorted(qs, reverse=True)[depth:])


class OccupancySystem:
    """Level occupancies of one (L, N, R, energies) system from broadened densities.

    The expectation at energy E of the occupancy of level k is the ratio of
    two smoothed state counts built from sub-systems with level k removed and
    0..min(R, N) particles taken out; the denominator uses the sum of the same
    terms, which for exact spectra equals the smoothed count of the full
    system.  Sub-system spectra come from one universal table of the reduced
    level count, re-weighted per removed level, truncated with the same
    drop-top policy re-derived for L-1 (unless depth 0, which keeps them exact).
    """

    def __init__(
        self,
        L: int,
        n_particles: int,
        restriction: int,
        eps: Sequence[float],
        drop_top: int = 0,
        cache=None,
    ):
        if len(eps) != L:
            raise ValueError(f"expected {L} energies, got {len(eps)}")
        self.L = L
        self.n_particles = n_particles
        self.restriction = restriction
        self.eps = np.asarray(eps, dtype=np.float64)
        self.drop_top = drop_top
        self.parent_sectors = drop_top_sectors(L, drop_top)
        child_qs = [q for q in divisors(L - 1) if q > 1]
        self.child_sectors = drop_top_sectors(L - 1, min(drop_top, len(child_qs)))
        self._parent_table = expand(
            L, n_particles, restriction, self.parent_sectors, cache=cache
        )
        self._child_table = expand(
            L - 1, n_particles, restriction, self.child_sectors, cache=cache
        )
        self._child_spectra: dict[tuple[int, int], WeightedSpectrum] = {}

    def parent_spectrum(self) -> WeightedSpectrum:
        return truncated_spectrum(self._parent_table, self.eps, self.n_particles)

    def child_spectrum(self, level: int, particles: int) -> WeightedSpectrum:
        key = (level, particles)
        if key not in self._child_spectra:
            child_eps = np.delete(self.eps, level)
            self._child_spectra[key] = truncated_spectrum(
                self._child_table, child_eps, particles
            )
        return self._child_spectra[key]

    def occupancy_terms(self, energy: float, level: int, gamma: float) -> np.ndarray:
        """Smoothed accessible-state counts per occupancy of `level`."""
        from_n = min(self.restriction, self.n_particles)
        terms = np.zeros(from_n + 1)
        for n in range(from_n + 1):
            spec = self.child_spectrum(level, self.n_particles - n)
            terms[n] = kde_at(spec, gamma, energy - n * self.eps[level])[0]
        return terms

    def occupancy(self, energy: float, level: int, gamma: float) -> float:
        """Expected occupancy of `level` at many-body energy `energy`.

        NaN when the energy is unreachable (denominator underflows).
        """
        terms = self.occupancy_terms(energy, level, gamma)
        denominator = terms.sum()
        if denominator < 1e-300:
            return float("nan")
        return float(np.dot(np.arange(len(terms)), terms) / denominator)

    def occupancy_profile(self, energy: float, gamma: float) -> np.ndarray:
        return np.array(
            [self.occupancy(energy, k, gamma) for k in range(self.L)]
        )


def occupancy(energy: float, level: int, system: OccupancySystem, gamma: float) -> float:
    """Expected occupancy of one level; see OccupancySystem.occupancy."""
    return system.occupancy(energy, level, gamma)


# -- inverse temperature ------------------------------------------------------


@dataclass(frozen=True)
class BetaEstimate:
    """Inverse temperature versus energy, with per-method diagnostics."""

    energies: np.ndarray
    beta: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    def at(self, energies) -> np.ndarray:
        mask = np.isfinite(self.beta)
        return np.interp(energies, self.energies[mask], self.beta[mask])


def beta_boltzmann(curve: DensityCurve) -> BetaEstimate:
    """Central-difference derivative of the log density; NaN where it vanishes."""
    values = curve.values
    positive = values > 0
    ln = np.where(positive, np.log(np.where(positive, values, 1.0)), np.nan)
    beta = np.gradient(ln, curve.energies)
    return BetaEstimate(energies=curve.energies, beta=beta, method="boltzmann")


def gaussian_fit(curve: DensityCurve, floor: float = 1e-6) -> tuple[float, float, float]:
    """Least-squares log-parabola fit: (mu, sigma, amplitude).

    Points below `floor` times the peak are excluded; no iterative solver.
    """
    y = curve.values
    peak = float(y.max())
    if peak <= 0:
        raise ValueError("curve has no mass")
    mask = y > floor * peak
    x = curve.energies[mask]
    ln = np.log(y[mask])
    coeffs = np.polyfit(x, ln, 2)
    a, b, c = coeffs
    if a >= 0:
        raise ValueError("log-density is not concave; Gaussian fit undefined")
    sigma = math.sqrt(-1.0 / (2.0 * a))
    mu = -b / (2.0 * a)
    amplitude = math.exp(c - b * b / (4.0 * a))
    return mu, sigma, amplitude


def beta_gaussian_fit(curve: DensityCurve) -> BetaEstimate:
    """Linear-in-energy estimate from the Gaussian fit: (mu - E) / sigma^2."""
    mu, sigma, amplitude = gaussian_fit(curve)
    beta = (mu - curve.energies) / sigma**2
    return BetaEstimate(
        energies=curve.energies,
        beta=beta,
        method="boltzmann-fit",
        diagnostics={"mu": mu, "sigma": sigma, "amplitude": amplitude},
    )


def bose_transform(occupancies: np.ndarray) -> np.ndarray:
    """ln(1/<n> + 1): linear in the level energy for a Bose-Einstein profile."""
    occ = np.asarray(occupancies, dtype=np.float64)
    out = np.full(occ.shape, np.nan)
    ok = np.isfinite(occ) & (occ > 0)
    out[ok] = np.log(1.0 / occ[ok] + 1.0)
    return out


def linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line: (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least two points")
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - (slope * x + intercept)
    ss_res = float(np.dot(residual, residual))
    centered = y - y.mean()
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r_squared


def beta_empirical(
    eps: Sequence[float],
    occupancies_by_energy: Mapping[float, np.ndarray],
) -> BetaEstimate:
    """Slope of the transformed occupancies versus level energy, per probe energy."""
    eps = np.asarray(eps, dtype=np.float64)
    energies = np.array(sorted(occupancies_by_energy))
    betas = np.full(len(energies), np.nan)
    r2 = np.full(len(energies), np.nan)
    for i, e in enumerate(energies):
        transformed = bose_transform(occupancies_by_energy[e])
        ok = np.isfinite(transformed)
        if ok.sum() >= 2:
            slope, _, r_squared = linear_fit(eps[ok], transformed[ok])
            betas[i] = slope
            r2[i] = r_squared
    return BetaEstimate(
        energies=energies,
        beta=betas,
        method="empirical",
        diagnostics={"r_squared": r2},
    )


def beta_estimators(
    curve: DensityCurve,
    eps: Sequence[float],
    occupancies_by_energy: Mapping[float, np.ndarray],
) -> tuple[BetaEstimate, BetaEstimate, BetaEstimate]:
    """The three estimators: log-derivative, Gaussian-fit, empirical."""
    return (
        beta_boltzmann(curve),
        beta_gaussian_fit(curve),
        beta_empirical(eps, occupancies_by_energy),
    )
