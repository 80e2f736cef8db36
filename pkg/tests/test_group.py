import random

import pytest
from cryptography.hazmat.primitives.asymmetric import ec
from hypothesis import given, settings
from hypothesis import strategies as st

from gridauth.errors import (
    BadOrder,
    CurveError,
    GeneratorOffCurve,
    PointOffCurve,
    SingularCurve,
    WidthMismatch,
)
from gridauth.group import (
    IDENTITY,
    ZERO32,
    CurveParams,
    Point,
    encode_id,
    encode_point,
    encode_timestamp,
    encode_to32,
    get_profile,
    hash32,
    load_profiles,
    negate,
    point_add,
    random_scalar,
    scalar_mul,
    validate_curve,
    xor32,
)

import oracles

TOY_POINTS = oracles.enumerate_points(23, 1, 1)


def toy_curve(**kw):
    base = dict(name="t", p=23, c=1, d=1, q=7, gx=17, gy=3)
    base.update(kw)
    return CurveParams(**base)


def test_toy_discriminant_nonzero():
    # 4 + 27 = 31 = 8 (mod 23)
    assert (4 * 1 + 27 * 1) % 23 == 8
    validate_curve(toy_curve())


def test_singular_curve_rejected():
    with pytest.raises(SingularCurve):
        validate_curve(toy_curve(c=0, d=0, gx=0, gy=0))


def test_toy_point_3_10_on_curve():
    # 10^2 = 100 = 8 and 3^3 + 3 + 1 = 31 = 8 (mod 23)
    assert toy_curve().contains(Point(3, 10))


def test_point_3_10_has_composite_order():
    # frozen from brute force: the whole group is cyclic of order 28
    assert len(TOY_POINTS) + 1 == 28
    assert oracles.order((3, 10), 23, 1) == 28
    with pytest.raises(BadOrder):
        validate_curve(toy_curve(gx=3, gy=10, q=28))
    # the bundled toy generator is 4 * (3, 10), of prime order 7
    assert oracles.repeated_add(4, (3, 10), 23, 1) == (17, 3)
    assert oracles.order((17, 3), 23, 1) == 7


@pytest.mark.parametrize("kw,exc", [
    (dict(gx=3, gy=11), GeneratorOffCurve),
    (dict(q=5), BadOrder),
    (dict(q=14), BadOrder),
    (dict(p=21), CurveError),
    (dict(p=3), CurveError),
])
def test_validate_curve_rejections(kw, exc):
    with pytest.raises(exc):
        validate_curve(toy_curve(**kw))


@pytest.mark.parametrize("name", ["toy23", "p256", "secp256k1"])
def test_bundled_profiles_validate(name):
    validate_curve(get_profile(name))


def test_unknown_profile():
    with pytest.raises(CurveError):
        get_profile("nope")


def test_profile_file_roundtrip(tmp_path):
    import json
    curve = get_profile("p256")
    path = tmp_path / "profiles.json"
    path.write_text(json.dumps({"mine": curve.to_hex()}))
    loaded = load_profiles(path)["mine"]
    assert (loaded.p, loaded.q, loaded.gx) == (curve.p, curve.q, curve.gx)
    assert all(v == v.lower() and not v.startswith("0x") for v in curve.to_hex().values())


def test_identity_and_inverse_laws(toy):
    G = toy.G
    assert point_add(G, IDENTITY, toy) == G
    assert point_add(IDENTITY, G, toy) == G
    assert point_add(G, negate(G, toy), toy) == IDENTITY


def test_point_add_rejects_off_curve(toy):
    with pytest.raises(PointOffCurve):
        point_add(Point(3, 11), toy.G, toy)
    with pytest.raises(PointOffCurve):
        scalar_mul(2, Point(3, 11), toy)


def test_point_add_matches_oracle_on_all_pairs(toy):
    pts = [None] + TOY_POINTS
    for P in pts:
        for Q in pts:
            got = point_add(Point(*P) if P else IDENTITY, Point(*Q) if Q else IDENTITY, toy)
            want = oracles.chord_tangent(P, Q, 23, 1)
            assert (None if got.is_identity else (got.x, got.y)) == want


def test_scalar_mul_small_cases(toy, p256):
    for curve in (toy, p256):
        assert scalar_mul(1, curve.G, curve) == curve.G
        assert scalar_mul(2, curve.G, curve) == point_add(curve.G, curve.G, curve)
        assert scalar_mul(0, curve.G, curve) == IDENTITY
        assert scalar_mul(curve.q, curve.G, curve) == IDENTITY
        assert scalar_mul(-1, curve.G, curve) == negate(curve.G, curve)


def test_scalar_mul_nist_vector(p256):
    # 2G on P-256, published test vector
    P = scalar_mul(2, p256.G, p256)
    assert P.x == 0x7CF27B188D034F7E8A52380304B51AC3C08969E277F21B35A60B48FC47669978
    assert P.y == 0x07775510DB8ED040293D9AC69F7430DBBA7DADE63CE982299E04B79D227873D1


@pytest.mark.parametrize("name,ossl", [("p256", ec.SECP256R1()), ("secp256k1", ec.SECP256K1())])
def test_scalar_mul_matches_openssl(name, ossl):
    curve = get_profile(name)
    rng = random.Random(5)
    for _ in range(20):
        k = rng.randrange(1, curve.q)
        nums = ec.derive_private_key(k, ossl).public_key().public_numbers()
        assert scalar_mul(k, curve.G, curve) == Point(nums.x, nums.y)


def test_scalar_composition_toy(toy):
    rng = random.Random(3)
    for _ in range(50):
        a, b = rng.randrange(1, toy.q), rng.randrange(1, toy.q)
        lhs = scalar_mul(a, scalar_mul(b, toy.G, toy), toy)
        want = oracles.repeated_add(a * b % toy.q, (toy.gx, toy.gy), 23, 1)
        assert (None if lhs.is_identity else (lhs.x, lhs.y)) == want


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2 ** 256), st.integers(1, 2 ** 256))
def test_scalar_mul_commutes_p256(a, b):
    curve = get_profile("p256")
    a, b = a % curve.q or 1, b % curve.q or 1
    assert scalar_mul(a, scalar_mul(b, curve.G, curve), curve) == \
        scalar_mul(b, scalar_mul(a, curve.G, curve), curve)


def test_hash_fixed_width_and_deterministic():
    assert hash32(b"") == hash32(b"")
    assert len(hash32(b"")) == 32
    assert len(hash32(bytes(10 ** 6))) == 32
    for alg in ("sha256", "sha3_256", "blake2s"):
        assert len(hash32(b"x", alg)) == 32
    with pytest.raises(ValueError):
        hash32(b"x", "md5")


def test_hash_suffix_changes_digest():
    assert hash32(b"abc").hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert hash32(b"abc\x00").hex() == "dc1114cd074914bd872cc1f9a23ec910ea2203bc79779ab2e17da25782a624fc"


def test_xor32_basics():
    a = bytes(range(32))
    assert xor32(a, a) == ZERO32
    assert xor32(a, ZERO32) == a
    with pytest.raises(WidthMismatch):
        xor32(a, a[:31])


b32 = st.binary(min_size=32, max_size=32)


@given(b32, b32, b32)
def test_xor32_abelian_involution(a, b, c):
    assert xor32(xor32(a, b), b) == a
    assert xor32(a, b) == xor32(b, a)
    assert xor32(xor32(a, b), c) == xor32(a, xor32(b, c))


def test_encodings(p256):
    assert encode_timestamp(0) == ZERO32
    assert encode_timestamp(1) == bytes(31) + b"\x01"
    assert encode_id("meter-a") != encode_id("meter-b")
    assert encode_to32("meter-a") == encode_id("meter-a")
    assert encode_to32(5) == bytes(31) + b"\x05"
    assert encode_point(p256.G, p256) == encode_point(Point(p256.gx, p256.gy), p256)
    assert encode_point(IDENTITY, p256) != encode_point(p256.G, p256)
    assert encode_to32(p256.G, p256) == encode_point(p256.G, p256)
    with pytest.raises(WidthMismatch):
        encode_timestamp(1 << 64)
    with pytest.raises(TypeError):
        encode_to32(1.5)


def test_random_scalar_range_and_determinism(toy):
    rng = random.Random(0)
    draws = [random_scalar(rng, toy.q) for _ in range(100_000)]
    assert min(draws) == 1 and max(draws) == toy.q - 1
    def seq(seed):
        r = random.Random(seed)
        return [random_scalar(r, 2 ** 64) for _ in range(5)]
    assert seq(9) == seq(9)
    assert random_scalar(random.Random(1), 2 ** 64) != random_scalar(random.Random(2), 2 ** 64)
