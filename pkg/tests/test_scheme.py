import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from src.constellation import ConstellationKind
from src.errors import ConfigError, LengthMismatchError, PreconditionError, UnaddressablePatternError
from src.scheme import (
    SCHEME_FAMILIES,
    SchemeConfig,
    achieved_rate,
    beta,
    bit_budget,
    floor_log2_comb,
    hamming_distance,
    make_scheme,
    partition_bits,
    random_bits,
    rank_combination,
    unrank_combination,
)


@pytest.mark.parametrize("params, expected_frame_bits, expected_rate", [
    (dict(n_tx=5, n_active=2, m_rf=0, t_total=1, t_active=1, mod_order=2, quadrature=False), 4, Fraction(4)),
    (dict(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2, quadrature=True), 16, Fraction(4)),
    (dict(n_tx=1, n_active=1, m_rf=0, t_total=1, t_active=1, mod_order=2), 1, Fraction(1)),
    (dict(n_tx=1, n_active=1, m_rf=6, t_total=4, t_active=2, mod_order=2, quadrature=False), 16, Fraction(4)),
])
def test_bit_budget_examples(params, expected_frame_bits, expected_rate):
    cfg = SchemeConfig(**params)
    budget = bit_budget(cfg)
    assert budget.frame_bits == expected_frame_bits
    assert budget.frame_bits == budget.time_bits + cfg.t_active * budget.beta
    assert achieved_rate(cfg) == expected_rate


def test_bit_budget_fields_for_quadrature_mbm():
    cfg = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2)
    budget = bit_budget(cfg)
    assert budget.time_bits == 2
    assert budget.antenna_bits_per_slot == 4
    assert budget.map_bits_per_slot == 2
    assert budget.symbol_bits_per_slot == 1
    assert budget.beta == beta(cfg) == 7


def test_bit_budget_special_cases_reduce():
    """Dropping mirrors, time indexing or antennas removes exactly the matching term."""
    full = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=8, t_active=3, mod_order=4)
    no_mirrors = SchemeConfig(n_tx=4, n_active=2, m_rf=0, t_total=8, t_active=3, mod_order=4)
    no_time = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=1, t_active=1, mod_order=4)
    mbm_only = SchemeConfig(n_tx=1, n_active=1, m_rf=2, t_total=8, t_active=3, mod_order=4, quadrature=False)

    assert bit_budget(full).beta - bit_budget(no_mirrors).beta == 2
    assert bit_budget(no_time).frame_bits == 2 * floor_log2_comb(4, 2) + 2 + 2
    assert bit_budget(mbm_only).frame_bits == floor_log2_comb(8, 3) + 3 * (2 + 2)


def test_quadrature_flag_halves_antenna_term():
    gqsm = SchemeConfig(n_tx=5, n_active=2, m_rf=0, t_total=1, t_active=1, mod_order=4, quadrature=True)
    gsm = SchemeConfig(n_tx=5, n_active=2, m_rf=0, t_total=1, t_active=1, mod_order=4, quadrature=False)
    assert bit_budget(gqsm).antenna_bits_per_slot == 2 * bit_budget(gsm).antenna_bits_per_slot == 6


def test_rate_uses_cyclic_prefix_denominator():
    cfg = SchemeConfig(n_tx=1, n_active=1, m_rf=0, t_total=4, t_active=2, mod_order=4, taps=3, quadrature=False)
    assert achieved_rate(cfg) == Fraction(2 + 2 * 2, 6)


@pytest.mark.parametrize("params", [
    dict(n_tx=2, n_active=3, m_rf=0, t_total=1, t_active=1, mod_order=2),
    dict(n_tx=2, n_active=1, m_rf=0, t_total=2, t_active=3, mod_order=2),
    dict(n_tx=2, n_active=1, m_rf=0, t_total=1, t_active=1, mod_order=6),
    dict(n_tx=2, n_active=1, m_rf=-1, t_total=1, t_active=1, mod_order=2),
    dict(n_tx=0, n_active=1, m_rf=0, t_total=1, t_active=1, mod_order=2),
    dict(n_tx=2, n_active=1, m_rf=0, t_total=1, t_active=1, mod_order=8, constellation_kind=ConstellationKind.QAM),
])
def test_invalid_scheme_config(params):
    with pytest.raises(ConfigError):
        SchemeConfig(**params)


def test_detectability_of_quadrature_bpsk():
    assert not SchemeConfig(n_tx=4, n_active=2, m_rf=0, t_total=1, t_active=1, mod_order=2).is_detectable
    assert SchemeConfig(n_tx=4, n_active=2, m_rf=0, t_total=1, t_active=1, mod_order=4).is_detectable
    # no antenna bits, nothing rides on the imaginary part
    assert SchemeConfig(n_tx=2, n_active=2, m_rf=1, t_total=1, t_active=1, mod_order=2).is_detectable


@pytest.mark.parametrize("n, k, index, expected", [
    (5, 2, 0, (0, 1)),
    (5, 2, 7, (2, 3)),
    (4, 2, 3, (1, 2)),
    (6, 3, 0, (0, 1, 2)),
    (3, 0, 0, ()),
])
def test_unrank_combination(n, k, index, expected):
    assert unrank_combination(n, k, index) == expected


@pytest.mark.parametrize("n, k, combo, expected", [
    (5, 2, {0, 1}, 0),
    (5, 2, {2, 3}, 7),
    (4, 2, (1, 2), 3),
])
def test_rank_combination(n, k, combo, expected):
    assert rank_combination(n, k, combo) == expected


def test_rank_of_unaddressable_pattern():
    with pytest.raises(UnaddressablePatternError, match="rank 9"):
        rank_combination(5, 2, {3, 4})


@pytest.mark.parametrize("n, k, index", [(5, 2, 8), (5, 2, -1), (3, 4, 0)])
def test_unrank_out_of_range(n, k, index):
    with pytest.raises(PreconditionError):
        unrank_combination(n, k, index)


def test_rank_rejects_non_subsets():
    with pytest.raises(PreconditionError):
        rank_combination(5, 2, {0, 5})
    with pytest.raises(PreconditionError):
        rank_combination(5, 2, {1})


def test_rank_unrank_round_trip_exhaustive():
    for n in range(1, 9):
        for k in range(0, n + 1):
            usable = 1 << floor_log2_comb(n, k)
            seen = set()
            for index in range(usable):
                combo = unrank_combination(n, k, index)
                assert list(combo) == sorted(combo)
                assert rank_combination(n, k, combo) == index
                seen.add(combo)
            assert len(seen) == usable


def test_unrank_follows_lexicographic_order():
    n, k = 7, 3
    expected = list(itertools.combinations(range(n), k))[:1 << floor_log2_comb(n, k)]
    assert [unrank_combination(n, k, i) for i in range(len(expected))] == expected


def test_floor_log2_comb_is_exact_for_large_binomials():
    assert floor_log2_comb(128, 64) == math.comb(128, 64).bit_length() - 1 == 124
    assert floor_log2_comb(8, 4) == 6
    assert floor_log2_comb(4, 2) == 2


def test_partition_bits_worked_example():
    cfg = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2)
    raw = "10" + "0111" + "01" + "1" + "0010110"
    frame = partition_bits(cfg, raw)
    assert frame.time_field == "10"
    slot0 = frame.per_slot[0]
    assert (slot0.antenna_real_field, slot0.antenna_imag_field, slot0.map_field, slot0.symbol_field) == \
        ("01", "11", "01", "1")
    slot1 = frame.per_slot[1]
    assert slot1.join() == "0010110"
    assert frame.join() == raw


def test_partition_bits_all_zero():
    cfg = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2)
    frame = partition_bits(cfg, "0" * 16)
    assert frame.time_field == "00"
    assert all(set(slot.join()) == {"0"} for slot in frame.per_slot)


def test_partition_bits_without_quadrature_has_empty_imag_field():
    cfg = SchemeConfig(n_tx=5, n_active=2, m_rf=1, t_total=1, t_active=1, mod_order=4, quadrature=False)
    frame = partition_bits(cfg, "101" + "1" + "01")
    assert frame.time_field == ""
    assert frame.per_slot[0].antenna_imag_field == ""
    assert frame.per_slot[0].antenna_real_field == "101"


@pytest.mark.parametrize("raw", ["", "0" * 15, "0" * 17])
def test_partition_bits_wrong_length(raw):
    cfg = SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2)
    with pytest.raises(LengthMismatchError):
        partition_bits(cfg, raw)


def test_partition_join_round_trip_random():
    rng = np.random.default_rng(7)
    configs = [
        SchemeConfig(n_tx=4, n_active=2, m_rf=2, t_total=4, t_active=2, mod_order=2),
        SchemeConfig(n_tx=5, n_active=2, m_rf=3, t_total=6, t_active=3, mod_order=16,
                     constellation_kind=ConstellationKind.QAM, quadrature=False),
        SchemeConfig(n_tx=1, n_active=1, m_rf=6, t_total=4, t_active=2, mod_order=2, quadrature=False),
    ]
    for cfg in configs:
        length = bit_budget(cfg).frame_bits
        for _ in range(1000):
            raw = random_bits(rng, length)
            assert partition_bits(cfg, raw).join() == raw


def test_random_bits_is_reproducible():
    first = random_bits(np.random.default_rng(3), 64)
    second = random_bits(np.random.default_rng(3), 64)
    assert first == second
    assert len(first) == 64 and set(first) <= {"0", "1"}


def test_hamming_distance():
    assert hamming_distance("0000", "0000") == 0
    assert hamming_distance("1010", "0110") == 2
    with pytest.raises(LengthMismatchError):
        hamming_distance("01", "011")


def test_families_cover_every_special_case():
    assert {"gsm", "gqsm", "gqsm-mbm", "ti-gqsm", "ti-mbm", "ti-gsm", "ti-gsm-mbm", "ti-gqsm-mbm"} <= set(SCHEME_FAMILIES)


def test_make_scheme_sets_quadrature_from_family():
    assert make_scheme("ti-gqsm-mbm", n_tx=3, n_active=2, m_rf=3, t_total=4, t_active=2, mod_order=4).quadrature
    assert not make_scheme("ti-gsm-mbm", n_tx=5, n_active=2, m_rf=3, t_total=4, t_active=2).quadrature


@pytest.mark.parametrize("name, params", [
    ("gqsm", dict(n_tx=3, n_active=2, t_total=4, t_active=2, mod_order=4)),
    ("ti-gqsm", dict(n_tx=3, n_active=2, m_rf=1, t_total=4, t_active=2, mod_order=4)),
    ("ti-mbm", dict(n_tx=2, n_active=1, m_rf=3, t_total=4, t_active=2)),
    ("ti-mbm", dict(m_rf=0, t_total=4, t_active=2)),
    ("ti-qsm", dict(n_tx=4, n_active=2, t_total=4, t_active=2, mod_order=4)),
    ("unknown", dict()),
])
def test_make_scheme_rejects_family_violations(name, params):
    with pytest.raises(ConfigError):
        make_scheme(name, **params)
