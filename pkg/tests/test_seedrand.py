"""Seed derivation: determinism, codomains, and distributional sanity."""

import random

import pytest
from hypothesis import given, strategies as st
from scipy.stats import chi2

from trisketch.errors import EmptySlotArray, InfeasibleParams, SeedSchemaError, VertexOutOfRange
from trisketch.ffield import M61
from trisketch.seedrand import (
    Params,
    SeedBundle,
    complement,
    max_canonical_pairs,
    named_preset_of,
    normalize_master_seed,
    with_overrides,
)

SEED_A = "ab" * 32
SEED_B = "cd" * 32


def bundle(n=256, preset="reduced", seed=SEED_A, **overrides):
    params = Params.make(n, preset=preset)
    if overrides:
        params = with_overrides(params, **overrides)
    return SeedBundle(seed, params)


# -- parameter derivation ---------------------------------------------------------


def test_derived_counts_full_preset():
    p = Params.make(256, preset="full")
    assert (p.layers, p.groups, p.buckets, p.independence) == (64, 64, 128, 96)
    assert p.key_bits == 10
    assert p.p_field == M61


def test_derived_counts_reduced_preset():
    p = Params.make(256, preset="reduced")
    assert (p.layers, p.groups, p.buckets) == (16, 16, 32)


def test_derived_counts_non_power_of_two():
    # ceil(c * log2 3) computed exactly: log2 3 = 1.585, so c=2 gives 4.
    p = Params.make(3, preset="reduced")
    assert p.layers == 4
    assert p.buckets == 7


def test_modulus_ladder_scales_with_n():
    assert Params.make(256, preset="reduced").p_field == M61
    assert Params.make(4096, preset="reduced").p_field == (1 << 89) - 1
    assert Params.make(4096, preset="reduced").p_field >= 4096**7


def test_explicit_modulus_bypasses_floor():
    p = Params.make(256, preset="reduced", p_field=10007)
    assert p.p_field == 10007
    with pytest.raises(InfeasibleParams):
        Params.make(256, preset="reduced", p_field=10008)


def test_keep_rate_schedule_mass():
    p = Params.make(1024, preset="full")
    rates = [p.keep_rate(i) for i in range(1, p.layers + 1)]
    assert abs(rates[0] - 1 / 8) < 1e-12
    assert sum(rates) <= 0.5
    assert sum(r * r for r in rates) <= 0.25


def test_level_horizon_bounded():
    for n in (16, 256, 4096):
        p = Params.make(n, preset="full")
        cap = (n - 1).bit_length() + 3
        for i in (1, 2, p.layers):
            for d in (1, 2, n // 2, n - 1):
                assert p.level_horizon(d, i) <= cap
                assert p.level_horizon(d, i) <= p.key_bits


def test_preset_label_tracking():
    base = Params.make(64, preset="reduced")
    assert named_preset_of(base) == "reduced"
    assert with_overrides(base, groups_override=1).preset == "reduced"
    assert with_overrides(base, c_m=5).preset == "custom"


def test_params_field_round_trip():
    p = with_overrides(Params.make(64, preset="reduced"), c_t=5, flat_keep_rate=0.25)
    back = Params.from_fields(p.to_fields(), p.preset)
    assert back == p


def test_pinned_group_count_not_certifiable():
    p = with_overrides(Params.make(64, preset="reduced"), groups_override=2)
    with pytest.raises(SeedSchemaError):
        Params.from_fields(p.to_fields(), p.preset)


def test_params_preset_contradiction_rejected():
    fields = Params.make(64, preset="reduced").to_fields()
    fields["c_m"] = "5"
    with pytest.raises(SeedSchemaError):
        Params.from_fields(fields, "reduced")


def test_master_seed_normalization():
    assert normalize_master_seed("0xAB") == "ab".rjust(64, "0")
    assert normalize_master_seed(SEED_A) == SEED_A
    for bad in ("", "xyz", "a" * 65):
        with pytest.raises(SeedSchemaError):
            normalize_master_seed(bad)


# -- determinism and replay --------------------------------------------------------


def test_full_replay_bit_exact():
    b1 = bundle()
    b2 = bundle()
    rng = random.Random(0)
    n = b1.params.n
    for _ in range(10_000):
        x, y = rng.randrange(n), rng.randrange(n)
        i = rng.randrange(1, b1.params.layers + 1)
        r = rng.randrange(0, 5)
        t = rng.randrange(1, b1.params.groups + 1)
        delta = rng.randrange(b1.params.p_field)
        bits = rng.randrange(1 << r)
        assert b1.id_hash(x) == b2.id_hash(x)
        assert b1.sign_hash(x, y, i) == b2.sign_hash(x, y, i)
        assert b1.slot_index(x, y, i, 64) == b2.slot_index(x, y, i, 64)
        assert b1.prefix_key(i, x) == b2.prefix_key(i, x)
        assert b1.pk_offset(i, x, y) == b2.pk_offset(i, x, y)
        assert b1.keep_coin(x, y, i) == b2.keep_coin(x, y, i)
        assert b1.bucket(i, r, t, delta) == b2.bucket(i, r, t, delta)
        assert b1.probed_pairs(i, x, r, bits, t) == b2.probed_pairs(i, x, r, bits, t)


def test_keep_layers_matches_keep_coin_filter():
    b = bundle()
    rng = random.Random(1)
    for _ in range(300):
        x, y = rng.randrange(256), rng.randrange(256)
        expected = [i for i in range(1, b.params.layers + 1) if b.keep_coin(x, y, i)]
        assert b.keep_layers(x, y) == expected


# -- id hash ------------------------------------------------------------------------


def test_id_hash_nonzero_and_deterministic():
    b = bundle()
    assert b.id_hash(0) != 0
    assert b.id_hash(0) == b.id_hash(0)


def test_id_hash_range_check():
    with pytest.raises(VertexOutOfRange):
        bundle().id_hash(256)


def test_id_hash_no_collisions_at_desk_scale():
    # Degree-1 map with nonzero slope is injective below the modulus; an
    # exhaustive scan over n = 10^4 vertices must see n distinct values.
    b = bundle(n=10_000)
    values = {b.id_hash(v) for v in range(10_000)}
    assert len(values) == 10_000
    assert 0 not in values


# -- sign hash -----------------------------------------------------------------------


def test_sign_hash_deterministic():
    b = bundle()
    assert b.sign_hash(3, 5, 2) == b.sign_hash(3, 5, 2)


def test_sign_hash_balance():
    b = bundle(n=10_000)
    total = 0
    for k in range(1_000_000):
        total += b.sign_hash(k & 1023, k >> 10, 1)
    assert abs(total / 1_000_000) < 0.01


def test_sign_hash_independent_across_layers():
    b = bundle(n=10_000)
    agree = 0
    trials = 200_000
    for k in range(trials):
        x, y = k & 1023, k >> 10
        agree += b.sign_hash(x, y, 1) == b.sign_hash(x, y, 2)
    # Independent fair signs agree half the time.
    assert abs(agree / trials - 0.5) < 0.01


# -- slot hash ------------------------------------------------------------------------


def test_slot_index_single_slot():
    b = bundle()
    for k in range(20):
        assert b.slot_index(k, k + 1, 1, 1) == 0


def test_slot_index_rejects_empty():
    with pytest.raises(EmptySlotArray):
        bundle().slot_index(0, 1, 1, 0)


def test_slot_index_uniformity_chi_square():
    b = bundle(n=200_000)
    m_x = 64
    counts = [0] * m_x
    draws = 100_000
    for k in range(draws):
        counts[b.slot_index(k, k + 1, 1, m_x)] += 1
    expected = draws / m_x
    stat = sum((c - expected) ** 2 / expected for c in counts)
    p_value = chi2.sf(stat, m_x - 1)
    assert p_value > 0.001, f"chi2={stat:.1f} p={p_value:.5f}"


# -- prefix keys -----------------------------------------------------------------------


def test_prefix_key_deterministic_and_sized():
    b = bundle()
    k = b.prefix_key(1, 7)
    assert k == b.prefix_key(1, 7)
    assert 0 <= k < 1 << b.params.key_bits


def test_prefix_level_zero_always_matches():
    b = bundle()
    for v in range(10):
        assert b.prefix_key(1, v) >> b.params.key_bits == 0  # empty prefix is vacuous


def test_first_prefix_bit_agreement_over_seeds():
    params = Params.make(16, preset="reduced")
    agree = 0
    trials = 100_000
    for s in range(trials):
        b = SeedBundle(format(s, "064x"), params)
        shift = params.key_bits - 1
        agree += (b.prefix_key(1, 0) >> shift) == (b.prefix_key(1, 1) >> shift)
    assert abs(agree / trials - 0.5) < 0.02


# -- pair-key offsets -------------------------------------------------------------------


def test_pk_offset_self_is_zero():
    b = bundle()
    assert b.pk_offset(1, 9, 9) == 0


def test_pk_offset_antisymmetric():
    b = bundle()
    p = b.params.p_field
    for x, y in ((0, 1), (3, 200), (17, 42)):
        assert (b.pk_offset(1, x, y) + b.pk_offset(1, y, x)) % p == 0


# -- retention coins ---------------------------------------------------------------------


def test_keep_coin_deterministic():
    b = bundle()
    assert b.keep_coin(3, 7, 1) == b.keep_coin(3, 7, 1)


def test_keep_coin_rate_layer_one():
    b = bundle(n=10_000)
    keeps = 0
    trials = 1_000_000
    for k in range(trials):
        keeps += b.keep_coin(k & 2047, k >> 11, 1)
    assert abs(keeps / trials - 1 / 8) < 0.002


def test_keep_coin_deep_layer_never_fires():
    # At the full preset i = layers has rate 2^-(layers+2); any observable
    # keep in 10^4 draws would be evidence of a broken threshold.
    b = bundle(n=256, preset="full")
    i = b.params.layers
    assert all(b.keep_coin(k, k + 1, i) == 0 for k in range(10_000))


def test_keep_coin_kwise_mode_rate():
    b = bundle(coin_mode="kwise", n=10_000)
    keeps = 0
    trials = 100_000
    for k in range(trials):
        keeps += b.keep_coin(k & 1023, k >> 10, 1)
    assert abs(keeps / trials - 1 / 8) < 0.01


def test_flat_keep_rate_override():
    b = bundle(flat_keep_rate=0.5, n=10_000)
    keeps = sum(b.keep_coin(k & 1023, k >> 10, 3) for k in range(100_000))
    assert abs(keeps / 100_000 - 0.5) < 0.01


# -- bucket maps ---------------------------------------------------------------------------


def test_bucket_uniformity():
    b = bundle(n=2, preset="full")  # T = 16 here
    t_buckets = b.params.buckets
    assert t_buckets == 16
    rng = random.Random(5)
    counts = [0] * t_buckets
    draws = 100_000
    for _ in range(draws):
        counts[b.bucket(1, 0, 1, rng.randrange(b.params.p_field))] += 1
    for c in counts:
        assert abs(c / draws - 1 / t_buckets) < 0.01


def test_bucket_groups_independent():
    b = bundle(n=2, preset="full")
    t_buckets = b.params.buckets
    rng = random.Random(6)
    same = 0
    draws = 50_000
    for _ in range(draws):
        delta = rng.randrange(b.params.p_field)
        same += b.bucket(1, 0, 1, delta) == b.bucket(1, 0, 2, delta)
    assert abs(same / draws - 1 / t_buckets) < 0.01


def test_bucket_deterministic():
    b = bundle()
    assert b.bucket(2, 1, 3, 12345) == b.bucket(2, 1, 3, 12345)


# -- complement map -----------------------------------------------------------------------


def test_complement_examples():
    assert complement(5, 16) == 11
    assert complement(0, 16) == 0
    assert complement(8, 16) == 8


@given(st.integers(min_value=1, max_value=64), st.data())
def test_complement_is_involution(t_buckets, data):
    j = data.draw(st.integers(min_value=0, max_value=t_buckets - 1))
    assert complement(complement(j, t_buckets), t_buckets) == j


def test_max_canonical_pairs():
    assert max_canonical_pairs(16) == 9
    assert max_canonical_pairs(7) == 4


# -- probe schedule -----------------------------------------------------------------------


def test_probed_pairs_deterministic():
    b = bundle()
    assert b.probed_pairs(1, 3, 0, 0, 2) == b.probed_pairs(1, 3, 0, 0, 2)


def test_probed_pairs_are_canonical_distinct_and_full_length():
    b = bundle(n=2, preset="full")  # T = 16, c0 = 4
    t_buckets = b.params.buckets
    rng = random.Random(9)
    for _ in range(10_000):
        i = rng.randrange(1, b.params.layers + 1)
        x = rng.randrange(2)
        r = rng.randrange(0, 3)
        bits = rng.randrange(1 << r)
        t = rng.randrange(1, b.params.groups + 1)
        pairs = b.probed_pairs(i, x, r, bits, t)
        assert len(pairs) == b.params.c0
        assert len(set(pairs)) == b.params.c0
        for lo, hi in pairs:
            assert lo <= hi
            assert hi == complement(lo, t_buckets)
