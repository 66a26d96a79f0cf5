import math

import numpy as np
import pytest

from mbdos.cyclotomic import divisors, totient
from mbdos.energies import gaussian_energies
from mbdos.genfunc import expand
from mbdos.oracle import exact_mbdos
from mbdos.ordering import (
    AnnealResult,
    CostSpec,
    anneal,
    dft_components,
    exhaustive_minimum,
    min_estimates,
    sector_scores,
    single_body_spacing,
)
from mbdos.spectrum import spectra_match


class TestSectorScores:
    def test_constant_vector_scores_zero(self):
        eps = [1.7] * 12
        for q in (2, 3, 4, 6, 12):
            s = sector_scores(eps, q)
            assert s.absolute == pytest.approx(0.0, abs=1e-12)
            assert s.power_fraction == pytest.approx(0.0, abs=1e-12)

    def test_pure_tone_concentrates_in_top_sector(self):
        L = 12
        eps = np.cos(2 * np.pi * np.arange(L) / L)
        assert sector_scores(eps, L).power_fraction == pytest.approx(1.0, abs=1e-12)
        for q in (2, 3, 4, 6):
            assert sector_scores(eps, q).power_fraction == pytest.approx(0.0, abs=1e-12)

    def test_power_fractions_sum_to_one(self):
        for seed in range(5):
            eps = gaussian_energies(12, seed=seed)
            total = sum(
                sector_scores(eps, q).power_fraction for q in (2, 3, 4, 6, 12)
            )
            # the q=1 share is the DC power
            dc = len(eps) * eps.mean() ** 2 / float(np.dot(eps, eps))
            assert total + dc == pytest.approx(1.0, rel=1e-12)

    def test_parseval_identity(self):
        # 100 seeded vectors, relative error at double precision
        for seed in range(100):
            eps = gaussian_energies(16, seed=seed)
            F = dft_components(eps)
            lhs = float(np.dot(eps, eps))
            rhs = float(np.sum(np.abs(F) ** 2) / len(eps))
            assert abs(lhs - rhs) / lhs < 1e-12

    def test_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            sector_scores([1.0, 2.0, 3.0, 4.0], 3)

    def test_rejects_q1(self):
        with pytest.raises(ValueError):
            sector_scores([1.0, 2.0], 1)


class TestMinEstimates:
    def test_uniform_grid(self):
        eps = np.arange(10) * 0.5
        a_min, p_min = min_estimates(10, eps)
        assert single_body_spacing(eps) == pytest.approx(0.5)
        assert a_min == pytest.approx(totient(10) * 0.5)
        assert p_min == pytest.approx(totient(10) * 0.25 / float(np.dot(eps, eps)))

    def test_q6_uses_phi_2(self):
        eps = np.arange(6, dtype=float)
        a_min, _ = min_estimates(6, eps)
        assert a_min == pytest.approx(2 * 1.0)

    def test_spacing_undefined_for_single_level(self):
        with pytest.raises(ValueError):
            min_estimates(2, [1.0])

    def test_estimate_is_a_loose_floor(self):
        # annealing should not beat the heuristic floor by a wide margin
        for seed in range(20):
            eps = gaussian_energies(20, seed=seed)
            a_min, _ = min_estimates(20, eps)
            result = anneal(
                eps, CostSpec.absolute(20), budget=2000, seed=seed, stop_factor=None
            )
            assert result.cost > a_min / 10.0


class TestAnneal:
    def test_returns_identity_when_stop_already_met(self):
        eps = gaussian_energies(8, seed=0)
        result = anneal(eps, CostSpec.absolute(8), stop_factor=100.0, seed=1)
        assert result.permutation == tuple(range(8))
        assert result.stopped == "stop-criterion"
        assert result.evaluations == 1

    def test_deterministic_for_seed(self):
        eps = gaussian_energies(10, seed=3)
        spec = CostSpec.power(10)
        a = anneal(eps, spec, budget=3000, seed=42, stop_factor=None)
        b = anneal(eps, spec, budget=3000, seed=42, stop_factor=None)
        assert a.permutation == b.permutation
        assert a.cost == b.cost
        assert a.trace == b.trace

    def test_best_cost_trace_non_increasing(self):
        eps = gaussian_energies(12, seed=7)
        result = anneal(eps, CostSpec.power(12), budget=5000, seed=0, stop_factor=None)
        costs = [c for _, c in result.trace]
        assert all(b <= a + 1e-15 for a, b in zip(costs, costs[1:]))

    def test_improves_on_monotonic_ordering(self):
        eps = gaussian_energies(20, seed=1)
        result = anneal(eps, CostSpec.power(20), budget=20000, seed=0, stop_factor=None)
        assert result.cost < CostSpec.power(20).cost(eps)

    def test_stop_criterion_reachable(self):
        eps = gaussian_energies(12, seed=2)
        result = anneal(eps, CostSpec.absolute(12), budget=200_000, seed=3, stop_factor=3.0)
        assert result.stopped in ("stop-criterion", "budget")

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            anneal([], CostSpec.absolute(2))

    def test_rejects_bad_temperature(self):
        with pytest.raises(ValueError):
            anneal([1.0, 2.0], CostSpec.absolute(2), initial_temperature=-1.0)

    def test_rejects_bad_cooling(self):
        with pytest.raises(ValueError):
            anneal([1.0, 2.0], CostSpec.absolute(2), cooling=1.5)


class TestCostSymmetries:
    def test_cost_invariant_under_cyclic_shift_and_reversal(self):
        eps = gaussian_energies(12, seed=9)
        for spec in (CostSpec.absolute(12), CostSpec.power(12, )):
            base = spec.cost(eps)
            for shift in range(1, 12):
                assert spec.cost(np.roll(eps, shift)) == pytest.approx(base, rel=1e-12)
            assert spec.cost(eps[::-1]) == pytest.approx(base, rel=1e-12)

    def test_spectrum_unchanged_by_any_permutation(self):
        # physics invariance backing the whole ordering search
        rng = np.random.default_rng(13)
        eps = gaussian_energies(6, seed=30)
        exact = exact_mbdos(6, 2, 1, eps)
        for _ in range(6):
            perm = rng.permutation(6)
            assert spectra_match(exact, exact_mbdos(6, 2, 1, eps[perm]), tol=1e-12)


class TestOptimalOrderingsSystemSpecific:
    @pytest.mark.parametrize("kind", ["A", "P"])
    def test_no_shared_optimum_for_reference_pair(self, kind):
        eps1 = np.array([2.1, 1.9, 1.1, 0.9, 0.1, -0.1])
        eps2 = np.array([2.1, 2.0, 1.9, 1.1, 1.0, 0.9])
        spec = CostSpec.absolute(6) if kind == "A" else CostSpec.power(6)
        _, argmin1 = exhaustive_minimum(eps1, spec)
        _, argmin2 = exhaustive_minimum(eps2, spec)
        # each optimum is one orbit under cyclic shifts and reversal
        assert set(argmin1) and set(argmin2)
        assert set(argmin1) & set(argmin2) == set()

    def test_anneal_attains_exhaustive_minimum_small_L(self):
        for L, seed in [(5, 0), (6, 1), (7, 2)]:
            eps = gaussian_energies(L, seed=seed)
            spec = CostSpec.power(L)
            best, _ = exhaustive_minimum(eps, spec)
            result = anneal(
                eps, spec, budget=100_000, seed=0, stop_factor=None, target_cost=best
            )
            assert result.cost == pytest.approx(best, abs=1e-9)
