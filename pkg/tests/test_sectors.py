import math

import numpy as np
import pytest

from mbdos.cyclotomic import totient
from mbdos.oracle import enumerate_configs, u_value
from mbdos.sectors import fold_config, galois_group, sector_of, sector_partition


class TestSectorPartition:
    def test_L12(self):
        flow = sector_partition(12)
        assert flow.sectors == {
            12: (1, 5, 7, 11),
            6: (2, 10),
            4: (3, 9),
            3: (4, 8),
            2: (6,),
            1: (0,),
        }

    def test_prime_L(self):
        for p in (5, 7, 11, 13):
            flow = sector_partition(p)
            assert flow.sectors == {p: tuple(range(1, p)), 1: (0,)}

    def test_L20_edges(self):
        flow = sector_partition(20)
        assert (20, 10, 2) in flow.edges
        assert (20, 4, 5) in flow.edges
        for q_from, q_to, prime in flow.edges:
            assert q_from % prime == 0 and q_from // prime == q_to
            assert q_from in flow.sectors and q_to in flow.sectors

    def test_partitions_all_indices(self):
        for L in range(1, 40):
            flow = sector_partition(L)
            members = sorted(l for ls in flow.sectors.values() for l in ls)
            assert members == list(range(L))
            for q, ls in flow.sectors.items():
                if q > 1:
                    assert len(ls) == totient(q)

    def test_sector_of(self):
        assert sector_of(12, 0) == 1
        assert sector_of(12, 10) == 6
        with pytest.raises(ValueError):
            sector_of(12, 12)


class TestGaloisGroup:
    def test_q12(self):
        assert galois_group(12) == [1, 5, 7, 11]

    def test_q2(self):
        assert galois_group(2) == [1]

    def test_q6(self):
        assert galois_group(6) == [1, 5]

    def test_q1_trivial(self):
        assert galois_group(1) == [0]

    def test_size_is_totient(self):
        for q in range(2, 100):
            assert len(galois_group(q)) == totient(q)


class TestFolding:
    def test_fold_example(self):
        assert fold_config([1, 0, 0, 1, 0, 0], 3) == (2, 0, 0)

    def test_identity_fold(self):
        n = (0, 2, 1, 0, 3, 0)
        assert fold_config(n, 6) == n

    def test_fold_to_point(self):
        assert fold_config([1, 0, 2, 1, 0, 0], 1) == (4,)

    def test_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            fold_config([1, 0, 0, 1], 3)

    def test_preserves_particle_number(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = rng.integers(0, 4, 12)
            for q in (1, 2, 3, 4, 6, 12):
                assert sum(fold_config(n, q)) == n.sum()

    def test_fold_matches_fourier_value(self):
        # the folded configuration carries the same sector value
        for L, N, R in [(6, 2, 1), (6, 3, 3), (12, 2, 1)]:
            flow = sector_partition(L)
            for cfg in enumerate_configs(L, N, R):
                for q, members in flow.sectors.items():
                    if q == 1:
                        continue
                    m = fold_config(cfg, q)
                    for l in members:
                        g = l * q // L
                        direct = u_value(cfg, l)
                        folded = u_value(m, g % q)
                        assert abs(direct - folded) < 1e-10

    def test_fold_is_functorial(self):
        # folding down one edge at a time equals folding directly
        rng = np.random.default_rng(1)
        flow = sector_partition(12)
        for _ in range(10):
            n = tuple(int(x) for x in rng.integers(0, 3, 12))
            for q_from, q_to, _ in flow.edges:
                via = fold_config(fold_config(n, q_from), q_to)
                assert via == fold_config(n, q_to)

    def test_jsonable_shape(self):
        data = sector_partition(6).to_jsonable()
        assert data["L"] == 6
        assert data["sectors"]["6"] == [1, 5]
        assert all(len(e) == 3 for e in data["edges"])
