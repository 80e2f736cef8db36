import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridauth.errors import BadTemplateLength
from gridauth.fuzzy import (
    BiometricTemplate,
    FEParams,
    HelperData,
    encode_repetition,
    gen,
    gen_with_secret,
    key_from_secret,
    rep,
)

import oracles

SMALL = FEParams(k=4, rho=3)


def per_block_patterns(params, max_per_block):
    """Every error vector with at most ``max_per_block`` flips in each block."""
    block_choices = [c for m in range(max_per_block + 1)
                     for c in itertools.combinations(range(params.rho), m)]
    for combo in itertools.product(block_choices, repeat=params.k):
        yield [b * params.rho + j for b, flips in enumerate(combo) for j in flips]


def test_defaults():
    fe = FEParams()
    assert (fe.k, fe.rho, fe.n, fe.tolerance) == (128, 5, 640, 2)
    with pytest.raises(ValueError):
        FEParams(k=3, rho=3)  # n = 9 is not hex-addressable


def test_gen_then_rep_same_template(rng):
    B = BiometricTemplate.random(rng, 640)
    sigma, helper = gen(B, rng)
    assert len(sigma) == 32
    assert rep(B, helper) == sigma


def test_fresh_helper_per_gen(rng):
    B = BiometricTemplate.random(rng, 640)
    (s1, h1), (s2, h2) = gen(B, rng), gen(B, rng)
    assert h1.sketch != h2.sketch and s1 != s2


def test_zero_template_sketch_is_codeword():
    w = bytes([1, 0, 1, 1])
    _, helper = gen_with_secret(BiometricTemplate(bytes(12)), w, SMALL)
    assert helper.sketch == bytes([1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    assert helper.sketch == encode_repetition(w, 3)


def test_rep_exhaustive_small_against_brute_force_decoder():
    rng = random.Random(2)
    patterns = list(per_block_patterns(SMALL, SMALL.tolerance))
    assert len(patterns) == 4 ** 4
    for w in itertools.product((0, 1), repeat=4):
        w = bytes(w)
        B = BiometricTemplate.random(rng, 12)
        sigma, helper = gen_with_secret(B, w, SMALL)
        for e in patterns:
            noisy = B.flipped(e)
            word = [a ^ b for a, b in zip(noisy.bits, helper.sketch)]
            assert oracles.nearest_codeword_decode(word, 4, 3) == w
            assert rep(noisy, helper) == sigma


def test_two_flips_in_a_block_changes_key():
    B = BiometricTemplate.random(random.Random(8), 12)
    sigma, helper = gen_with_secret(B, bytes([0, 1, 1, 0]), SMALL)
    assert rep(B.flipped([3, 5]), helper) != sigma
    assert rep(B.flipped([3]), helper) == sigma


def test_key_is_hash_of_packed_secret():
    w = bytes([1, 0, 1, 1])
    assert key_from_secret(w) == oracles.sha256(oracles.pack_bits(w))


def test_bad_lengths(rng):
    with pytest.raises(BadTemplateLength):
        gen(BiometricTemplate(bytes(10)), rng)
    _, helper = gen(BiometricTemplate(bytes(640)), rng)
    with pytest.raises(BadTemplateLength):
        rep(BiometricTemplate(bytes(639)), helper)


def test_hex_io_roundtrip(rng):
    B = BiometricTemplate.random(rng, 640)
    text = B.to_hex()
    assert len(text) == 160
    assert BiometricTemplate.from_hex(text, 640) == B
    assert BiometricTemplate.from_hex("8", 4).bits == bytes([1, 0, 0, 0])
    with pytest.raises(BadTemplateLength):
        BiometricTemplate.from_hex("abc", 640)


def test_helper_serialization(rng):
    _, helper = gen(BiometricTemplate.random(rng, 12), rng, SMALL)
    text = helper.serialize()
    assert text.startswith("12:4:3:")
    assert HelperData.deserialize(text) == helper
    with pytest.raises(BadTemplateLength):
        HelperData.deserialize("13:4:3:" + text.split(":")[3])


def test_sketch_bits_look_uniform():
    # chi-square over per-position ones counts for a fixed template
    rng = random.Random(21)
    fe = FEParams(k=16, rho=5)
    B = BiometricTemplate.random(rng, fe.n)
    trials = 2000
    ones = Counter()
    for _ in range(trials):
        _, helper = gen(B, rng, fe)
        for i, b in enumerate(helper.sketch):
            ones[i] += b
    # bits inside a block are fully correlated, so test one position per block
    chi2 = sum((ones[i * fe.rho] - trials / 2) ** 2 / (trials / 4) for i in range(fe.k))
    assert chi2 < 40.0  # chi-square, 16 dof: p < 0.001 beyond ~39.3


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(0, 2))
def test_rep_recovers_within_tolerance(r, max_flips):
    fe = FEParams(k=32, rho=5)
    B = BiometricTemplate.random(r, fe.n)
    sigma, helper = gen(B, r, fe)
    flips = []
    for blk in range(fe.k):
        flips += [blk * fe.rho + j for j in r.sample(range(fe.rho), r.randint(0, max_flips))]
    assert rep(B.flipped(flips), helper) == sigma
