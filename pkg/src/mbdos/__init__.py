"""Exact and controllably-truncated many-body densities of states.

The universal combinatorics of identical-particle spectra (degeneracy tables
indexed by integer invariants) is computed once, cached, and combined with
system-specific single-body energies to produce exact spectra or cheap
truncated approximations, plus the thermodynamic observables derived from
them.
"""

from .cyclotomic import (
    CycloElement,
    CycloPoly,
    TransferMatrix,
    cyclotomic_poly,
    divisors,
    frobenius_apply,
    prime_factors,
    totient,
    transfer_matrix,
)
from .sectors import SectorFlow, fold_config, galois_group, sector_partition
from .oracle import (
    DegeneracyClass,
    count_configs,
    degeneracy_classes,
    enumerate_configs,
    exact_mbdos,
    invariants_of,
    u_value,
)
from .genfunc import CoefficientTable, ExpandStats, expand, merge, term_count_bound
from .resummation import (
    EffectiveEnergies,
    effective_energies,
    energy_of_key,
    truncated_spectrum,
)
from .ordering import AnnealResult, CostSpec, anneal, min_estimates, sector_scores
from .analysis import (
    BetaEstimate,
    DensityCurve,
    OccupancySystem,
    beta_estimators,
    kde_at,
    kde_curve,
    lp_distance,
    occupancy,
)
from .spectrum import WeightedSpectrum, spectra_match
from .energies import bimodal_energies, gaussian_energies

__version__ = "0.1.0"
