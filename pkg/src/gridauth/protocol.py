"""Protocol phases as pure state transitions.

Every operation takes its inputs (state, message, clock reading ``now`` in
milliseconds, randomness source) and returns new values; nothing is
mutated in place.  ``+`` in the scheme's formulas is XOR over 32-octet
values, and ``||`` is concatenation of 32-octet encodings.
"""
from __future__ import annotations

import hmac
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from gridauth import fuzzy
from gridauth.errors import (
    AuthenticationFailure,
    DuplicateRegistration,
    InvalidPoint,
    LocalAuthFailure,
    StaleTimestamp,
    UnknownUser,
)
from gridauth.fuzzy import BiometricTemplate, FEParams, HelperData
from gridauth.group import (
    DEFAULT_HASH,
    CurveParams,
    Point,
    encode_id,
    encode_int,
    encode_point,
    encode_timestamp,
    hash32,
    random_scalar,
    scalar_mul,
    validate_curve,
    xor32,
)

DEFAULT_DELTA_T = 2_000
DEFAULT_SERVER_ID = "SG-control-center"


@dataclass(frozen=True)
class SystemParams:
    curve: CurveParams
    PK_S: Point
    hash_id: str = DEFAULT_HASH
    delta_t: int = DEFAULT_DELTA_T
    fe: FEParams = FEParams()
    server_id: str = DEFAULT_SERVER_ID


@dataclass(frozen=True)
class UserRecord:
    id: str
    R1: bytes
    R3: bytes
    y: int


@dataclass(frozen=True)
class ServerState:
    X: int
    params: SystemParams
    server_id: str
    users: Mapping[str, UserRecord] = field(default_factory=dict)
    next_counter: int = 1

    def __post_init__(self):
        object.__setattr__(self, "users", MappingProxyType(dict(self.users)))

    def with_record(self, rec: UserRecord, **changes) -> "ServerState":
        users = dict(self.users)
        users[rec.id] = rec
        return replace(self, users=users, **changes)


@dataclass(frozen=True)
class DeviceStore:
    user_id: str
    R3: bytes
    R4: bytes
    R5: bytes
    helper: HelperData
    r: int


@dataclass(frozen=True)
class RegRequest:
    id: str
    R1: bytes
    t_RG1: int


@dataclass(frozen=True)
class RegResponse:
    R3: bytes
    t: int


@dataclass(frozen=True)
class UpdateRequest:
    id: str
    R1_star: bytes
    t_RG1: int


@dataclass(frozen=True)
class UpdateResponse:
    R3_star: bytes
    t: int


@dataclass(frozen=True)
class MsgA1:
    S1: bytes
    ID_U1: bytes
    U_point: Point
    t1: int


@dataclass(frozen=True)
class MsgA2:
    ID_S1: bytes
    S2: bytes
    S_point: Point
    t3: int


@dataclass(frozen=True)
class PendingRegistration:
    id: str
    pw: str
    sigma: bytes
    helper: HelperData
    r: int


@dataclass(frozen=True)
class PendingSession:
    id: str
    u: int
    R1: bytes
    R3: bytes
    S1: bytes
    t1: int


PendingUpdate = PendingRegistration


def check_fresh(t: int, now: int, delta_t: int):
    if t > now:
        raise StaleTimestamp("timestamp %d is ahead of local clock %d" % (t, now))
    if now - t > delta_t:
        raise StaleTimestamp("message is %d ms old, window is %d ms" % (now - t, delta_t))


def _check_point(P: Point, curve: CurveParams):
    if P.is_identity or not curve.contains(P):
        raise InvalidPoint("peer point is the identity or off the curve")


def _r3_point(R3: bytes, params: SystemParams) -> Point:
    curve = params.curve
    return scalar_mul(int.from_bytes(R3, "big") % curve.q, curve.G, curve)


def _session_key(id_u: bytes, id_s: bytes, S1: bytes, S2: bytes, R3: bytes,
                 dh: Point, t3: int, params: SystemParams) -> bytes:
    curve, alg = params.curve, params.hash_id
    return hash32(
        id_u + id_s + S1 + S2
        + encode_point(_r3_point(R3, params), curve, alg)
        + encode_point(params.PK_S, curve, alg)
        + encode_point(dh, curve, alg)
        + encode_timestamp(t3),
        alg,
    )


def _server_r2(server: ServerState, user_id: str, y: int) -> bytes:
    alg = server.params.hash_id
    return hash32(encode_id(user_id, alg) + encode_int(server.X) + encode_int(y), alg)


def _local_gate(dev: DeviceStore, user_id: str, pw: str, B_noisy: BiometricTemplate,
                params: SystemParams) -> bytes:
    """Device-side credential check; returns the reproduced biometric key."""
    alg = params.hash_id
    sigma = fuzzy.rep(B_noisy, dev.helper, alg)
    R4 = xor32(dev.R3, sigma)
    R5 = hash32(encode_id(user_id, alg) + encode_id(pw, alg) + R4, alg)
    if user_id != dev.user_id or not hmac.compare_digest(R5, dev.R5):
        raise LocalAuthFailure("identity, password or biometric rejected")
    return sigma


def _masked_pw(pw: str, sigma: bytes, r: int, alg: str) -> bytes:
    return xor32(hash32(encode_id(pw, alg) + sigma, alg), encode_int(r))


# setup


def setup(curve: CurveParams, rng, server_id: str = DEFAULT_SERVER_ID,
          delta_t: int = DEFAULT_DELTA_T, hash_id: str = DEFAULT_HASH,
          fe: FEParams = FEParams()):
    """Pick the server secret and publish the system parameters."""
    validate_curve(curve)
    if delta_t < 0:
        raise ValueError("delta_t must be nonnegative")
    X = random_scalar(rng, curve.q)
    params = SystemParams(curve, scalar_mul(X, curve.G, curve), hash_id, delta_t, fe, server_id)
    return params, ServerState(X=X, params=params, server_id=server_id)


# registration


def user_reg_request(params: SystemParams, user_id: str, pw: str, B: BiometricTemplate,
                     now: int, rng):
    alg = params.hash_id
    sigma, helper = fuzzy.gen(B, rng, params.fe, alg)
    r = random_scalar(rng, params.curve.q)
    R1 = _masked_pw(pw, sigma, r, alg)
    return RegRequest(user_id, R1, now), PendingRegistration(user_id, pw, sigma, helper, r)


def server_reg_respond(server: ServerState, req: RegRequest, now: int):
    check_fresh(req.t_RG1, now, server.params.delta_t)
    if req.id in server.users:
        raise DuplicateRegistration(req.id)
    y = server.next_counter
    R3 = xor32(_server_r2(server, req.id, y), req.R1)
    state = server.with_record(UserRecord(req.id, req.R1, R3, y), next_counter=y + 1)
    return RegResponse(R3, now), state


def user_reg_finalize(pending: PendingRegistration, resp: RegResponse,
                      params: SystemParams) -> DeviceStore:
    alg = params.hash_id
    R4 = xor32(resp.R3, pending.sigma)
    R5 = hash32(encode_id(pending.id, alg) + encode_id(pending.pw, alg) + R4, alg)
    return DeviceStore(pending.id, resp.R3, R4, R5, pending.helper, pending.r)


# login and authentication


def user_login_start(dev: DeviceStore, params: SystemParams, user_id: str, pw: str,
                     B_noisy: BiometricTemplate, now: int, rng):
    alg = params.hash_id
    sigma = _local_gate(dev, user_id, pw, B_noisy, params)
    u = random_scalar(rng, params.curve.q)
    R1 = _masked_pw(pw, sigma, dev.r, alg)
    t1 = encode_timestamp(now)
    id_enc = encode_id(user_id, alg)
    S1 = hash32(id_enc + R1 + t1, alg)
    ID_U1 = xor32(xor32(id_enc, R1), t1)
    U = scalar_mul(u, params.curve.G, params.curve)
    return MsgA1(S1, ID_U1, U, now), PendingSession(user_id, u, R1, dev.R3, S1, now)


def server_auth_respond(server: ServerState, m1: MsgA1, now: int, rng):
    """Verify ``M_A1``; return ``(M_A2, SK_SU)``."""
    params = server.params
    curve, alg = params.curve, params.hash_id
    check_fresh(m1.t1, now, params.delta_t)
    _check_point(m1.U_point, curve)
    t1 = encode_timestamp(m1.t1)
    mask = xor32(m1.ID_U1, t1)
    rec = id_star = None
    # The identity travels masked, so try every record's R1.
    for cand in server.users.values():
        unmasked = xor32(mask, cand.R1)
        if hmac.compare_digest(unmasked, encode_id(cand.id, alg)):
            rec, id_star = cand, unmasked
            break
    if rec is None:
        raise UnknownUser("masked identity matches no record")
    S1_star = hash32(id_star + rec.R1 + t1, alg)
    if not hmac.compare_digest(S1_star, m1.S1):
        raise AuthenticationFailure("S1 does not verify")
    s = random_scalar(rng, curve.q)
    t3 = encode_timestamp(now)
    id_s = encode_id(server.server_id, alg)
    S2 = hash32(id_s + rec.R3 + t3, alg)
    dh = scalar_mul(s, m1.U_point, curve)
    sk = _session_key(id_star, id_s, m1.S1, S2, rec.R3, dh, now, params)
    ID_S1 = xor32(xor32(id_s, rec.R3), t3)
    return MsgA2(ID_S1, S2, scalar_mul(s, curve.G, curve), now), sk


def user_auth_finalize(pending: PendingSession, m2: MsgA2, params: SystemParams,
                       now: int) -> bytes:
    """Verify ``M_A2``; return ``SK_US``."""
    curve, alg = params.curve, params.hash_id
    check_fresh(m2.t3, now, params.delta_t)
    _check_point(m2.S_point, curve)
    t3 = encode_timestamp(m2.t3)
    id_s = xor32(xor32(m2.ID_S1, pending.R3), t3)
    S2_star = hash32(id_s + pending.R3 + t3, alg)
    if not hmac.compare_digest(S2_star, m2.S2):
        raise AuthenticationFailure("S2 does not verify")
    dh = scalar_mul(pending.u, m2.S_point, curve)
    return _session_key(encode_id(pending.id, alg), id_s, pending.S1, m2.S2, pending.R3,
                        dh, m2.t3, params)


# password and biometric update


def user_update_request(dev: DeviceStore, params: SystemParams, user_id: str, pw_old: str,
                        B_old_noisy: BiometricTemplate, pw_new: str, B_new: BiometricTemplate,
                        now: int, rng):
    alg = params.hash_id
    _local_gate(dev, user_id, pw_old, B_old_noisy, params)
    sigma, helper = fuzzy.gen(B_new, rng, params.fe, alg)
    R1_star = _masked_pw(pw_new, sigma, dev.r, alg)
    return (UpdateRequest(user_id, R1_star, now),
            PendingUpdate(user_id, pw_new, sigma, helper, dev.r))


def server_update_respond(server: ServerState, req: UpdateRequest, now: int):
    check_fresh(req.t_RG1, now, server.params.delta_t)
    rec = server.users.get(req.id)
    if rec is None:
        raise UnknownUser(req.id)
    # y is kept: the stored tuple after an update still carries the same counter
    R3_star = xor32(_server_r2(server, req.id, rec.y), req.R1_star)
    state = server.with_record(UserRecord(req.id, req.R1_star, R3_star, rec.y))
    return UpdateResponse(R3_star, now), state


def user_update_finalize(pending: PendingUpdate, resp: UpdateResponse,
                         params: SystemParams) -> DeviceStore:
    return user_reg_finalize(pending, RegResponse(resp.R3_star, resp.t), params)
