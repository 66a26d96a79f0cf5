"""Seeded single-body energy generators used by the CLI and the test suites."""

from __future__ import annotations

import numpy as np


def gaussian_energies(
    L: int, mu: float = 0.0, sigma: float = 1.0, seed: int = 0
) -> np.ndarray:
    """L Gaussian draws, returned sorted ascending (the monotonic ordering)."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    return np.sort(mu + sigma * rng.standard_normal(L))


def bimodal_energies(
    L: int,
    n_particles: int,
    sigma: float = 1.0,
    seed: int = 0,
    separation: float | None = None,
) -> np.ndarray:
    """Two equal Gaussian blocks whose means are farther apart than N sigma.

    Concatenates two L/2-level spectra with the same width; the resulting
    many-body spectrum splits into N+1 well-separated humps.
    """
    if L < 2 or L % 2 != 0:
        raise ValueError(f"L must be even and >= 2, got {L}")
    if separation is None:
        separation = (n_particles + 2) * sigma
    if separation <= n_particles * sigma:
        raise ValueError("separation must exceed n_particles * sigma")
    rng = np.random.default_rng(seed)
    block_a = np.sort(sigma * rng.standard_normal(L // 2))
    block_b = np.sort(separation + sigma * rng.standard_normal(L // 2))
    return np.concatenate([block_a, block_b])
