import math
from collections import Counter

import numpy as np
import pytest

from mbdos.genfunc import (
    CoefficientTable,
    ExpandStats,
    _unzigzag,
    _zigzag,
    expand,
    expand_parallel,
    merge,
    term_count_bound,
)
from mbdos.oracle import count_configs, enumerate_configs, invariants_of


def oracle_table(L, n_max, R, sectors):
    """Group enumerated configurations by their kept-sector invariants."""
    out = {}
    for n in range(n_max + 1):
        counter = Counter(
            tuple(x for q in sorted(sectors, reverse=True) for x in invariants_of(cfg, q))
            for cfg in enumerate_configs(L, n, R)
        )
        for inv, c in counter.items():
            out[(n, inv)] = c
    return out


class TestWorkedExamples:
    def test_fermion_L6_N2_top_sector(self):
        table = expand(6, 2, 1, [6])
        assert table.get(2, (0, 0)) == 3
        assert table.get(2, (1, 0)) == 1

    def test_boson_L6_N3_q3_sector(self):
        table = expand(6, 3, 3, [3])
        expected = {
            (3, 0): 4,
            (0, 3): 4,
            (2, 1): 6,
            (1, 2): 6,
            (-3, -3): 4,
            (1, -1): 6,
            (-1, 1): 6,
            (0, 0): 8,
            (-1, -2): 6,
            (-2, -1): 6,
        }
        got = {inv: c for (p, inv), c in table.items() if p == 3}
        assert got == expected

    def test_full_sectors_all_unit(self):
        table = expand(6, 2, 1, [6, 3, 2])
        counts = [c for (p, _), c in table.items() if p == 2]
        assert len(counts) == 15
        assert set(counts) == {1}

    def test_lower_particle_slices_also_counted(self):
        table = expand(6, 2, 1, [6])
        assert table.total_multiplicity(0) == 1
        assert table.total_multiplicity(1) == 6
        assert table.total_multiplicity(2) == 15


class TestOracleEquivalence:
    @pytest.mark.parametrize(
        "L,n_max,R,sectors",
        [
            (6, 3, 1, (6,)),
            (6, 3, 3, (3, 2)),
            (8, 3, 3, (8, 4)),
            (9, 4, 1, (9, 3)),
            (10, 4, 4, (10, 5, 2)),
            (10, 5, 1, (10, 5, 2)),
            (7, 3, 3, (7,)),
        ],
    )
    def test_counts_match_enumeration(self, L, n_max, R, sectors):
        table = expand(L, n_max, R, sectors)
        assert dict(table.items()) == oracle_table(L, n_max, R, sectors)

    def test_empty_sector_set_counts_configurations(self):
        table = expand(5, 4, 2, [])
        for n in range(5):
            assert table.get(n, ()) == count_configs(5, n, 2)

    def test_mass_conservation(self):
        rng_cases = [(6, 3, 3), (8, 3, 1), (12, 4, 4)]
        for L, n_max, R in rng_cases:
            from mbdos.cyclotomic import divisors

            secs = tuple(q for q in divisors(L) if q > 1)
            table = expand(L, n_max, R, secs)
            for n in range(n_max + 1):
                assert table.total_multiplicity(n) == count_configs(L, n, R)


class TestSectorDropping:
    def test_drop_reproduces_coarser_expansion(self):
        full = expand(6, 3, 3, [6, 3, 2])
        assert full.drop_sector(6) == expand(6, 3, 3, [3, 2])
        assert full.drop_sector(2) == expand(6, 3, 3, [6, 3])
        assert full.drop_sector(6).drop_sector(3) == expand(6, 3, 3, [2])

    def test_drop_unknown_sector_rejected(self):
        with pytest.raises(ValueError):
            expand(6, 2, 1, [6]).drop_sector(3)


class TestMerge:
    def test_merge_of_level_split_equals_single_pass(self):
        whole = expand(6, 2, 1, [6, 3, 2])
        left = expand(6, 2, 1, [6, 3, 2], level_range=(0, 3))
        right = expand(6, 2, 1, [6, 3, 2], level_range=(3, 6))
        assert merge(left, right) == whole

    def test_identity_element(self):
        table = expand(6, 3, 3, [3])
        empty = CoefficientTable.empty(6, 3, 3, (3,), (6, 6))
        assert merge(table, empty)._counts == table._counts

    def test_associativity(self):
        parts = [
            expand(6, 3, 3, [6, 2], level_range=(a, b))
            for a, b in [(0, 2), (2, 4), (4, 6)]
        ]
        left_first = merge(merge(parts[0], parts[1]), parts[2])
        right_first = merge(parts[0], merge(parts[1], parts[2]))
        assert left_first == right_first
        assert left_first == expand(6, 3, 3, [6, 2])

    def test_layout_mismatch_rejected(self):
        with pytest.raises(ValueError):
            merge(expand(6, 2, 1, [6]), expand(6, 2, 1, [3]))

    def test_overlapping_ranges_rejected(self):
        a = expand(6, 2, 1, [6], level_range=(0, 4))
        b = expand(6, 2, 1, [6], level_range=(3, 6))
        with pytest.raises(ValueError):
            merge(a, b)

    def test_parallel_expansion_matches_serial(self):
        serial = expand(8, 3, 3, [8, 4])
        parallel = expand_parallel(8, 3, 3, [8, 4], workers=3)
        assert parallel == serial


class TestComplexityBound:
    def test_reference_bound_value(self):
        assert term_count_bound(6, 1, [6]) == 4096

    def test_observed_work_within_bound(self):
        stats = ExpandStats()
        expand(6, 2, 1, [6], stats=stats)
        assert 0 < stats.term_touches <= 4096

    def test_boson_bound(self):
        assert term_count_bound(6, 3, [3]) == (2 * 4) ** 6

    def test_empty_sector_bound_degenerate(self):
        assert term_count_bound(6, 1, []) == 0


class TestValidation:
    def test_non_divisor_sector_rejected(self):
        with pytest.raises(ValueError):
            expand(6, 2, 1, [5])

    def test_q1_rejected(self):
        with pytest.raises(ValueError):
            expand(6, 2, 1, [6, 1])

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            expand(6, -1, 1, [6])


class TestSerialization:
    def test_zigzag_round_trip(self):
        for n in list(range(-70, 71)) + [10**12, -(10**12)]:
            assert _unzigzag(_zigzag(n)) == n
        assert _zigzag(-1) == 1
        assert _zigzag(1) == 2

    def test_bytes_round_trip(self):
        table = expand(6, 3, 3, [6, 3, 2])
        clone = CoefficientTable.from_bytes(table.to_bytes())
        assert clone == table
        assert clone.to_bytes() == table.to_bytes()

    def test_deterministic_bytes(self):
        a = expand(8, 3, 1, [8, 2]).to_bytes()
        b = expand(8, 3, 1, [8, 2]).to_bytes()
        assert a == b

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError):
            CoefficientTable.from_bytes(b"NOPE" + b"\x00" * 64)

    def test_version_mismatch_rejected(self):
        data = bytearray(expand(6, 2, 1, [6]).to_bytes())
        data[4] = 99
        with pytest.raises(ValueError):
            CoefficientTable.from_bytes(bytes(data))

    def test_file_round_trip(self, tmp_path):
        table = expand(6, 2, 1, [6, 3, 2])
        path = tmp_path / "table.bin"
        table.write(path)
        assert CoefficientTable.read(path) == table
