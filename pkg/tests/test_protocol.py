import random
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gridauth import protocol as P
from gridauth.errors import (
    AuthenticationFailure,
    DuplicateRegistration,
    InvalidPoint,
    LocalAuthFailure,
    SingularCurve,
    StaleTimestamp,
    UnknownUser,
)
from gridauth.fuzzy import BiometricTemplate, FEParams
from gridauth.group import (
    IDENTITY,
    CurveParams,
    Point,
    encode_id,
    encode_int,
    encode_timestamp,
    get_profile,
    hash32,
    scalar_mul,
    xor32,
)

import oracles

T0 = 1_000_000


class Enrolled:
    """One server plus one enrolled device, built step by step."""

    def __init__(self, curve_name="p256", seed=0, uid="meter-7", pw="hunter2", fe=FEParams()):
        self.rng = random.Random(seed)
        self.params, self.server = P.setup(get_profile(curve_name), self.rng, fe=fe)
        self.uid, self.pw = uid, pw
        self.B = BiometricTemplate.random(self.rng, fe.n)
        self.req, self.pending = P.user_reg_request(self.params, uid, pw, self.B, T0, self.rng)
        self.resp, self.server = P.server_reg_respond(self.server, self.req, T0 + 10)
        self.dev = P.user_reg_finalize(self.pending, self.resp, self.params)

    def login(self, t=T0 + 100, pw=None, B=None):
        pw = self.pw if pw is None else pw
        B = self.B if B is None else B
        m1, sess = P.user_login_start(self.dev, self.params, self.uid, pw, B, t, self.rng)
        m2, sk_s = P.server_auth_respond(self.server, m1, t + 5, self.rng)
        sk_u = P.user_auth_finalize(sess, m2, self.params, t + 10)
        return m1, m2, sess, sk_u, sk_s


@pytest.fixture
def world():
    return Enrolled()


# setup

def test_setup_publishes_x_times_g(p256):
    params, server = P.setup(p256, random.Random(1))
    assert params.PK_S == scalar_mul(server.X, p256.G, p256)
    assert 1 <= server.X < p256.q


def test_setup_fresh_secret_per_seed(p256):
    assert P.setup(p256, random.Random(1))[1].X != P.setup(p256, random.Random(2))[1].X


def test_setup_rejects_singular_curve():
    bad = CurveParams("bad", p=23, c=0, d=0, q=7, gx=0, gy=0)
    with pytest.raises(SingularCurve):
        P.setup(bad, random.Random(0))


# registration

def test_reg_request(world):
    assert xor32(world.req.R1, encode_int(world.pending.r)) == \
        hash32(encode_id(world.pw) + world.pending.sigma)
    assert world.req.t_RG1 == T0


def test_reg_request_fresh_r(world):
    a, _ = P.user_reg_request(world.params, "u", "pw", world.B, T0, random.Random(1))
    b, _ = P.user_reg_request(world.params, "u", "pw", world.B, T0, random.Random(2))
    assert a.R1 != b.R1


def test_server_record_algebra(world):
    rec = world.server.users[world.uid]
    assert xor32(rec.R3, rec.R1) == oracles.r2_reference(world.uid, world.server.X, rec.y)
    assert rec.R1 == world.req.R1 and rec.R3 == world.resp.R3


def test_reg_stale_and_future_requests(world):
    req, _ = P.user_reg_request(world.params, "late", "pw", world.B, T0, world.rng)
    with pytest.raises(StaleTimestamp):
        P.server_reg_respond(world.server, req, T0 + world.params.delta_t + 1)
    with pytest.raises(StaleTimestamp):
        P.server_reg_respond(world.server, req, T0 - 1)
    # the window edge itself is accepted
    P.server_reg_respond(world.server, req, T0 + world.params.delta_t)


def test_duplicate_registration(world):
    req, _ = P.user_reg_request(world.params, world.uid, "pw", world.B, T0, world.rng)
    with pytest.raises(DuplicateRegistration):
        P.server_reg_respond(world.server, req, T0)


def test_counter_is_fresh_per_user(world):
    req, _ = P.user_reg_request(world.params, "second", "pw", world.B, T0, world.rng)
    _, server = P.server_reg_respond(world.server, req, T0)
    assert server.users["second"].y != server.users[world.uid].y
    # the input state is untouched
    assert "second" not in world.server.users


def test_reg_finalize(world):
    dev = world.dev
    assert xor32(dev.R4, dev.R3) == world.pending.sigma
    assert hash32(encode_id(world.uid) + encode_id(world.pw) + dev.R4) == dev.R5
    stored = {dev.R3, dev.R4, dev.R5}
    assert world.pending.sigma not in stored
    assert hash32(encode_id(world.pw)) not in stored and encode_id(world.pw) not in stored


# login

def test_login_with_noisy_biometric(world):
    noisy = world.B.flipped([0, 1, 5, 6])  # 2 flips in each of blocks 0 and 1
    *_, sk_u, sk_s = world.login(B=noisy)
    assert sk_u == sk_s


def test_login_wrong_password(world):
    with pytest.raises(LocalAuthFailure):
        world.login(pw="hunter3")


def test_login_wrong_identity(world):
    with pytest.raises(LocalAuthFailure):
        P.user_login_start(world.dev, world.params, "meter-8", world.pw, world.B, T0, world.rng)


def test_login_biometric_over_tolerance(world):
    with pytest.raises(LocalAuthFailure):
        world.login(B=world.B.flipped([10, 11, 12]))


def test_msg_a1_structure(world):
    m1, m2, sess, *_ = world.login()
    t1 = encode_timestamp(m1.t1)
    assert xor32(xor32(m1.ID_U1, sess.R1), t1) == encode_id(world.uid)
    assert m1.S1 == hash32(encode_id(world.uid) + sess.R1 + t1)
    assert m1.U_point == scalar_mul(sess.u, world.params.curve.G, world.params.curve)
    assert sess.R1 == world.req.R1


def test_honest_keys_agree_and_match_reference(world):
    m1, m2, sess, sk_u, sk_s = world.login()
    assert sk_u == sk_s
    curve = world.params.curve
    # recompute the key from its definition
    dh = scalar_mul(sess.u, m2.S_point, curve)
    r3g = scalar_mul(int.from_bytes(sess.R3, "big") % curve.q, curve.G, curve)

    def enc_pt(Q):
        n = curve.byte_len
        return oracles.sha256(Q.x.to_bytes(n, "big") + Q.y.to_bytes(n, "big"))

    want = oracles.sha256(
        oracles.sha256(world.uid.encode()) + oracles.sha256(world.params.server_id.encode())
        + m1.S1 + m2.S2 + enc_pt(r3g) + enc_pt(world.params.PK_S) + enc_pt(dh)
        + m2.t3.to_bytes(32, "big"))
    assert sk_u == want


def test_replayed_a1_outside_window(world):
    m1, *_ = world.login()
    with pytest.raises(StaleTimestamp):
        P.server_auth_respond(world.server, m1, m1.t1 + world.params.delta_t + 1, world.rng)


def test_s1_bit_flip(world):
    m1, *_ = world.login()
    bad = replace(m1, S1=bytes([m1.S1[0] ^ 1]) + m1.S1[1:])
    with pytest.raises(AuthenticationFailure):
        P.server_auth_respond(world.server, bad, m1.t1 + 1, world.rng)


def test_masked_id_bit_flip_is_unknown_user(world):
    m1, *_ = world.login()
    bad = replace(m1, ID_U1=bytes([m1.ID_U1[0] ^ 1]) + m1.ID_U1[1:])
    with pytest.raises(UnknownUser):
        P.server_auth_respond(world.server, bad, m1.t1 + 1, world.rng)


@pytest.mark.parametrize("pt", [IDENTITY, Point(1, 1)])
def test_invalid_user_point(world, pt):
    m1, *_ = world.login()
    with pytest.raises(InvalidPoint):
        P.server_auth_respond(world.server, replace(m1, U_point=pt), m1.t1 + 1, world.rng)


def test_finalize_checks(world):
    m1, m2, sess, *_ = world.login()
    bad = replace(m2, ID_S1=bytes([m2.ID_S1[5] ^ 4 if i == 5 else b for i, b in enumerate(m2.ID_S1)]))
    with pytest.raises(AuthenticationFailure):
        P.user_auth_finalize(sess, bad, world.params, m2.t3 + 1)
    with pytest.raises(StaleTimestamp):
        P.user_auth_finalize(sess, m2, world.params, m2.t3 + world.params.delta_t + 1)
    with pytest.raises(InvalidPoint):
        P.user_auth_finalize(sess, replace(m2, S_point=IDENTITY), world.params, m2.t3 + 1)


def test_lookup_among_many_users(world):
    server = world.server
    for i in range(5):
        req, _ = P.user_reg_request(world.params, "other-%d" % i, "pw", world.B, T0, world.rng)
        _, server = P.server_reg_respond(server, req, T0)
    world.server = server
    *_, sk_u, sk_s = world.login()
    assert sk_u == sk_s


def test_key_freshness(world):
    a = world.login(t=T0 + 100)
    b = world.login(t=T0 + 200)
    assert a[3] != b[3]


def test_messages_hide_identities(world):
    m1, m2, *_ = world.login()
    fields = [m1.S1, m1.ID_U1, m2.ID_S1, m2.S2]
    assert encode_id(world.uid) not in fields
    assert encode_id(world.params.server_id) not in fields


# update

def test_update_flow(world):
    B_new = BiometricTemplate.random(world.rng, 640)
    req, pend = P.user_update_request(world.dev, world.params, world.uid, world.pw, world.B,
                                      "new-pw", B_new, T0 + 50, world.rng)
    assert xor32(req.R1_star, encode_int(world.dev.r)) == hash32(encode_id("new-pw") + pend.sigma)
    resp, server = P.server_update_respond(world.server, req, T0 + 55)
    rec = server.users[world.uid]
    assert rec.y == world.server.users[world.uid].y
    assert xor32(rec.R3, rec.R1) == oracles.r2_reference(world.uid, server.X, rec.y)
    dev = P.user_update_finalize(pend, resp, world.params)
    assert xor32(dev.R4, dev.R3) == pend.sigma
    assert dev.r == world.dev.r and dev.helper != world.dev.helper

    old_dev, old_pw, old_B = world.dev, world.pw, world.B
    world.server, world.dev, world.pw, world.B = server, dev, "new-pw", B_new
    *_, sk_u, sk_s = world.login()
    assert sk_u == sk_s
    with pytest.raises(LocalAuthFailure):
        world.login(pw=old_pw, B=B_new)
    with pytest.raises(LocalAuthFailure):
        world.login(pw="new-pw", B=old_B)


def test_update_wrong_old_password(world):
    with pytest.raises(LocalAuthFailure):
        P.user_update_request(world.dev, world.params, world.uid, "nope", world.B,
                              "new-pw", world.B, T0, world.rng)


def test_update_unknown_user(world):
    req = P.UpdateRequest("ghost", bytes(32), T0)
    with pytest.raises(UnknownUser):
        P.server_update_respond(world.server, req, T0)
    with pytest.raises(StaleTimestamp):
        P.server_update_respond(world.server, replace(req, id=world.uid), T0 + 10 ** 6)


# properties

ids = st.text(st.characters(min_codepoint=33, max_codepoint=0x2FF), min_size=1, max_size=20)


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(uid=ids, pw=st.text(max_size=30), seed=st.integers(0, 2 ** 32),
       hops=st.lists(st.integers(0, 2000), min_size=4, max_size=4),
       curve=st.sampled_from(["p256", "secp256k1", "toy23"]))
def test_key_agreement_property(uid, pw, seed, hops, curve):
    rng = random.Random(seed)
    fe = FEParams(k=32, rho=5)
    params, server = P.setup(get_profile(curve), rng, fe=fe)
    B = BiometricTemplate.random(rng, fe.n)
    t = T0
    req, pend = P.user_reg_request(params, uid, pw, B, t, rng)
    resp, server = P.server_reg_respond(server, req, t + hops[0])
    dev = P.user_reg_finalize(pend, resp, params)
    t += 10_000
    m1, sess = P.user_login_start(dev, params, uid, pw, B, t, rng)
    t += hops[1]
    m2, sk_s = P.server_auth_respond(server, m1, t, rng)
    t += hops[2]
    assert P.user_auth_finalize(sess, m2, params, t) == sk_s


@settings(max_examples=30, deadline=None)
@given(pw=st.text(max_size=10), wrong=st.text(max_size=10))
def test_local_gate_iff_r5_matches(pw, wrong):
    w = Enrolled(curve_name="toy23", pw=pw, fe=FEParams(k=8, rho=3))
    if wrong == pw:
        w.login(pw=wrong)
    else:
        with pytest.raises(LocalAuthFailure):
            w.login(pw=wrong)
