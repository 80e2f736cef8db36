"""Deterministic simulated network and Dolev-Yao adversary scenarios.

A :class:`World` owns one server, any number of enrolled user devices, a
:class:`SimClock` and an append-only :class:`Transcript`.  Protocol messages
cross the world as canonical bytes, so every adversary action (replay,
bit-flip, injection) operates on exactly what a wire would carry.  The
adversary sees public-channel payloads in full and only the length of
secure-channel payloads.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Optional, Union

from gridauth import protocol, wire
from gridauth.errors import (
    AuthenticationFailure,
    InvalidPoint,
    LocalAuthFailure,
    ProtocolError,
    StaleTimestamp,
)
from gridauth.fuzzy import BiometricTemplate, FEParams
from gridauth.group import (
    DEFAULT_HASH,
    WIDTH,
    CurveParams,
    Point,
    encode_id,
    encode_timestamp,
    get_profile,
    scalar_mul,
    xor32,
)

EPOCH_MS = 1_700_000_000_000
PUBLIC, SECURE = "public", "secure"
TO_SERVER, TO_USER = "U->S", "S->U"


class SimClock:
    def __init__(self, start: int = EPOCH_MS):
        self._now = start

    def now(self) -> int:
        return self._now

    def advance(self, delta: int) -> int:
        if delta < 0:
            raise ValueError("clock cannot run backwards")
        self._now += delta
        return self._now


@dataclass(frozen=True)
class Entry:
    direction: str
    channel: str
    kind: str
    payload: bytes
    time: int


class Transcript:
    def __init__(self):
        self._entries = []

    def append(self, entry: Entry) -> int:
        self._entries.append(entry)
        return len(self._entries) - 1

    def __getitem__(self, i) -> Entry:
        return self._entries[i]

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def since(self, start: int) -> list:
        return self._entries[start:]

    def adversary_view(self) -> list:
        """Public payloads verbatim; secure payloads reduced to their length."""
        return [
            (e.direction, e.channel, e.kind, e.payload if e.channel == PUBLIC else len(e.payload), e.time)
            for e in self._entries
        ]

    def to_bytes(self) -> bytes:
        out = bytearray()
        for e in self._entries:
            head = "%s|%s|%s|%d|%d\n" % (e.direction, e.channel, e.kind, e.time, len(e.payload))
            out += head.encode() + e.payload
        return bytes(out)

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def to_text(self) -> str:
        lines = []
        for i, e in enumerate(self._entries):
            lines.append("[%d] t=%d %s %s %s (%d octets)" % (
                i, e.time, e.direction, e.channel, e.kind, len(e.payload)))
            lines.append("    " + e.payload.hex())
        return "\n".join(lines)


# adversary capabilities


@dataclass(frozen=True)
class Record:
    pass


@dataclass(frozen=True)
class Replay:
    index: int
    at_time: int


@dataclass(frozen=True)
class Tamper:
    index: int
    field: str
    bit: int


@dataclass(frozen=True)
class Inject:
    kind: str
    payload: bytes


@dataclass(frozen=True)
class Drop:
    index: int


AdversaryAction = Union[Record, Replay, Tamper, Inject, Drop]


def flip_bit(buf: bytes, bit: int) -> bytes:
    out = bytearray(buf)
    out[bit // 8] ^= 0x80 >> (bit % 8)
    return bytes(out)


class Adversary:
    """Controls the public channel of one world."""

    def __init__(self, world: "World"):
        self.world = world
        self.recorded = []
        self.dropped = set()

    def act(self, action: AdversaryAction) -> Optional[bytes]:
        """Apply ``action``; return the bytes to deliver, if any."""
        t = self.world.transcript
        if isinstance(action, Record):
            self.recorded = [e for e in t.adversary_view()]
            return None
        if isinstance(action, Drop):
            self._public(action.index)
            self.dropped.add(action.index)
            return None
        if isinstance(action, Replay):
            entry = self._public(action.index)
            if action.at_time > self.world.clock.now():
                self.world.clock.advance(action.at_time - self.world.clock.now())
            return entry.payload
        if isinstance(action, Tamper):
            entry = self._public(action.index)
            off, length = wire.field_spans(entry.kind, self.world.params.curve)[action.field]
            if not 0 <= action.bit < 8 * length:
                raise IndexError("bit %d outside field %s" % (action.bit, action.field))
            return flip_bit(entry.payload, 8 * off + action.bit)
        if isinstance(action, Inject):
            return action.payload
        raise TypeError("unknown adversary action %r" % (action,))

    def _public(self, index: int) -> Entry:
        t = self.world.transcript
        if not 0 <= index < len(t):
            raise IndexError("transcript index %d out of range" % index)
        entry = t[index]
        if entry.channel != PUBLIC:
            raise PermissionError("secure-channel entries are opaque to the adversary")
        return entry


# the world


@dataclass
class Credentials:
    user_id: str
    pw: str
    template: BiometricTemplate


@dataclass
class Session:
    """Indices and readings of one login run."""

    user_id: str
    a1_index: int
    pending: protocol.PendingSession
    a2_index: Optional[int] = None
    a1_received: Optional[int] = None
    a2_received: Optional[int] = None
    sk_server: Optional[bytes] = None
    sk_user: Optional[bytes] = None


class World:
    def __init__(self, seed: int = 0, curve: Union[str, CurveParams] = "p256",
                 delta_t: int = protocol.DEFAULT_DELTA_T, fe: FEParams = FEParams(),
                 hash_id: str = DEFAULT_HASH, latency: int = 5, jitter: int = 3,
                 server_id: str = protocol.DEFAULT_SERVER_ID, server=None):
        self.seed = seed
        self.rng = random.Random(seed)
        self.clock = SimClock()
        self.latency, self.jitter = latency, jitter
        self.transcript = Transcript()
        if server is not None:
            self.server = server
            self.params = server.params
        else:
            if isinstance(curve, str):
                curve = get_profile(curve)
            self.params, self.server = protocol.setup(
                curve, self.rng, server_id=server_id, delta_t=delta_t, hash_id=hash_id, fe=fe)
        self.devices = {}
        self.creds = {}

    # plumbing

    def hop(self, extra: int = 0) -> int:
        jitter = self.rng.randint(0, self.jitter) if self.jitter else 0
        return self.clock.advance(self.latency + jitter + extra)

    def send(self, direction: str, channel: str, msg) -> int:
        payload = wire.encode_message(msg, self.params.curve)
        return self.transcript.append(
            Entry(direction, channel, type(msg).__name__, payload, self.clock.now()))

    def decode(self, kind: str, payload: bytes):
        return wire.decode_message(kind, payload, self.params.curve)

    def random_template(self) -> BiometricTemplate:
        return BiometricTemplate.random(self.rng, self.params.fe.n)

    def noisy(self, B: BiometricTemplate, max_flips: Optional[int] = None) -> BiometricTemplate:
        """Random reading of ``B`` with at most ``max_flips`` flips per block."""
        fe = self.params.fe
        limit = fe.tolerance if max_flips is None else max_flips
        positions = []
        for blk in range(fe.k):
            m = self.rng.randint(0, limit)
            positions += [blk * fe.rho + j for j in self.rng.sample(range(fe.rho), m)]
        return B.flipped(positions)

    def overloaded(self, B: BiometricTemplate) -> BiometricTemplate:
        """Reading with one block pushed past the correctable flip count."""
        fe = self.params.fe
        blk = self.rng.randrange(fe.k)
        bad = [blk * fe.rho + j for j in self.rng.sample(range(fe.rho), fe.tolerance + 1)]
        return B.flipped(bad)

    # phases

    def register(self, user_id: str, pw: Optional[str] = None,
                 template: Optional[BiometricTemplate] = None) -> Credentials:
        pw = pw if pw is not None else "pw-%016x" % self.rng.getrandbits(64)
        template = template if template is not None else self.random_template()
        req, pending = protocol.user_reg_request(
            self.params, user_id, pw, template, self.clock.now(), self.rng)
        i = self.send(TO_SERVER, SECURE, req)
        self.hop()
        resp, self.server = protocol.server_reg_respond(
            self.server, self.decode("RegRequest", self.transcript[i].payload), self.clock.now())
        j = self.send(TO_USER, SECURE, resp)
        self.hop()
        self.devices[user_id] = protocol.user_reg_finalize(
            pending, self.decode("RegResponse", self.transcript[j].payload), self.params)
        self.creds[user_id] = Credentials(user_id, pw, template)
        return self.creds[user_id]

    def user_send_a1(self, user_id: str, pw: Optional[str] = None,
                     template: Optional[BiometricTemplate] = None) -> Session:
        cred = self.creds[user_id]
        pw = cred.pw if pw is None else pw
        reading = self.noisy(cred.template) if template is None else template
        m1, pending = protocol.user_login_start(
            self.devices[user_id], self.params, user_id, pw, reading, self.clock.now(), self.rng)
        return Session(user_id, self.send(TO_SERVER, PUBLIC, m1), pending)

    def server_receive_a1(self, payload: bytes, now: Optional[int] = None):
        now = self.clock.now() if now is None else now
        m1 = self.decode("MsgA1", payload)
        m2, sk = protocol.server_auth_respond(self.server, m1, now, self.rng)
        return self.send(TO_USER, PUBLIC, m2), sk

    def user_receive_a2(self, session: Session, payload: bytes, now: Optional[int] = None) -> bytes:
        now = self.clock.now() if now is None else now
        m2 = self.decode("MsgA2", payload)
        return protocol.user_auth_finalize(session.pending, m2, self.params, now)

    def login(self, user_id: str, delay: int = 0, **kw) -> Session:
        """Honest run; ``delay`` is added to each network hop."""
        s = self.user_send_a1(user_id, **kw)
        s.a1_received = self.hop(delay)
        s.a2_index, s.sk_server = self.server_receive_a1(self.transcript[s.a1_index].payload)
        s.a2_received = self.hop(delay)
        s.sk_user = self.user_receive_a2(s, self.transcript[s.a2_index].payload)
        return s

    def update(self, user_id: str, pw_new: str, template_new: BiometricTemplate,
               pw_old: Optional[str] = None, reading_old: Optional[BiometricTemplate] = None):
        cred = self.creds[user_id]
        pw_old = cred.pw if pw_old is None else pw_old
        reading_old = self.noisy(cred.template) if reading_old is None else reading_old
        req, pending = protocol.user_update_request(
            self.devices[user_id], self.params, user_id, pw_old, reading_old,
            pw_new, template_new, self.clock.now(), self.rng)
        i = self.send(TO_SERVER, SECURE, req)
        self.hop()
        resp, self.server = protocol.server_update_respond(
            self.server, self.decode("UpdateRequest", self.transcript[i].payload), self.clock.now())
        j = self.send(TO_USER, SECURE, resp)
        self.hop()
        self.devices[user_id] = protocol.user_update_finalize(
            pending, self.decode("UpdateResponse", self.transcript[j].payload), self.params)
        self.creds[user_id] = Credentials(user_id, pw_new, template_new)


def run_honest_session(world: World, user_id: str, delay: int = 0):
    """Login over the public channel; return ``(transcript, SK_user, SK_server)``."""
    start = len(world.transcript)
    s = world.login(user_id, delay=delay)
    part = Transcript()
    for e in world.transcript.since(start):
        part.append(e)
    return part, s.sk_user, s.sk_server


# scenario outcomes

ACCEPTED = "Accepted"
INFO = "reported"


def rejected(kind: str) -> str:
    return "Rejected(%s)" % kind


@dataclass
class ScenarioOutcome:
    """Result of one scenario.

    ``expected`` names an outcome class; an observed rejection passes when
    its error kind is that class or a subclass (``UnknownUser`` is an
    ``AuthenticationFailure``).  ``passed`` is ``None`` for informational
    entries that record behavior without asserting it.
    """

    name: str
    family: str
    expected: str
    observed: str
    passed: Optional[bool]
    detail: str = ""
    transcript_hash: str = ""

    @property
    def informational(self) -> bool:
        return self.passed is None


_KINDS = {cls.__name__: cls for cls in (
    AuthenticationFailure, StaleTimestamp, InvalidPoint, LocalAuthFailure, ProtocolError)}


def matches(expected: str, observed: str, error: Optional[BaseException] = None) -> bool:
    if expected == observed:
        return True
    if expected.startswith("Rejected(") and error is not None:
        cls = _KINDS.get(expected[len("Rejected("):-1])
        return cls is not None and isinstance(error, cls)
    return False


def attempt(fn, *args, **kwargs):
    """Run a delivery; return ``(observed, error, value)``."""
    try:
        value = fn(*args, **kwargs)
    except ProtocolError as exc:
        return rejected(exc.kind), exc, None
    return ACCEPTED, None, value


def outcome(name, family, expected, world, fn, *args, **kwargs) -> ScenarioOutcome:
    observed, err, _ = attempt(fn, *args, **kwargs)
    return ScenarioOutcome(name, family, expected, observed, matches(expected, observed, err),
                           transcript_hash=world.transcript.digest())


# scenarios


def scenario_replay(world: World, user_id: str = "meter-0001") -> list:
    dt = world.params.delta_t
    s = world.login(user_id)
    adv = Adversary(world)
    adv.act(Record())
    out = []

    payload = adv.act(Replay(s.a1_index, world.transcript[s.a1_index].time + dt + 1))
    out.append(outcome("replay_m1_after_window", "replay", rejected("StaleTimestamp"),
                       world, world.server_receive_a1, payload))

    fresh = world.user_send_a1(user_id)
    world.hop()
    payload = adv.act(Replay(s.a2_index, world.transcript[s.a2_index].time + dt + 1))
    out.append(outcome("replay_m2_after_window", "replay", rejected("StaleTimestamp"),
                       world, world.user_receive_a2, fresh, payload))

    late = world.user_send_a1(user_id)
    world.hop(dt + 1)
    out.append(outcome("delayed_hop_beyond_window", "replay", rejected("StaleTimestamp"),
                       world, world.server_receive_a1, world.transcript[late.a1_index].payload))

    # same-window replays: the scheme has no nonce cache, so only record behavior
    s2 = world.login(user_id)
    observed, _, res = attempt(world.server_receive_a1, world.transcript[s2.a1_index].payload)
    detail = "no seen-message cache; timestamp still inside the window"
    if res is not None:
        detail += "; replayed key equals original: %s" % (res[1] == s2.sk_server)
    out.append(ScenarioOutcome("replay_m1_same_window", "replay", INFO, observed, None, detail,
                               world.transcript.digest()))
    victim = world.user_send_a1(user_id)
    world.hop()
    observed, _, sk = attempt(world.user_receive_a2, victim, world.transcript[s2.a2_index].payload)
    out.append(ScenarioOutcome(
        "replay_m2_same_window", "replay", INFO, observed, None,
        "M_A2 is not bound to the user's nonce; derived key unknown to the adversary (R3*G secret)",
        world.transcript.digest()))
    return out


def scenario_mitm(world: World, user_id: str = "meter-0001") -> list:
    dt = world.params.delta_t
    curve = world.params.curve
    out = []
    s = world.user_send_a1(user_id)
    adv = Adversary(world)
    adv.act(Drop(s.a1_index))
    payload = adv.act(Replay(s.a1_index, world.transcript[s.a1_index].time + dt + 1))
    out.append(outcome("mitm_hold_and_forward", "mitm", rejected("StaleTimestamp"),
                       world, world.server_receive_a1, payload))

    # refresh the timestamp on a captured M_A1
    s = world.user_send_a1(user_id)
    world.hop()
    old = world.decode("MsgA1", world.transcript[s.a1_index].payload)
    forged = protocol.MsgA1(old.S1, old.ID_U1, old.U_point, world.clock.now())
    payload = adv.act(Inject("MsgA1", wire.encode_message(forged, curve)))
    out.append(outcome("mitm_refresh_timestamp", "mitm", rejected("AuthenticationFailure"),
                       world, world.server_receive_a1, payload))

    # swap in the adversary's own ephemeral point
    s = world.user_send_a1(user_id)
    world.hop()
    a = world.rng.randrange(1, curve.q)
    old = world.decode("MsgA1", world.transcript[s.a1_index].payload)
    swapped = protocol.MsgA1(old.S1, old.ID_U1, scalar_mul(a, curve.G, curve), old.t1)
    observed, _, res = attempt(world.server_receive_a1, adv.act(Inject("MsgA1", wire.encode_message(swapped, curve))))
    detail = "ephemeral point is not covered by S1"
    if res is not None:
        idx, sk_s = res
        world.hop()
        _, _, sk_u = attempt(world.user_receive_a2, s, world.transcript[idx].payload)
        detail += "; keys diverge: %s (no key confirmation round)" % (sk_u != sk_s)
    out.append(ScenarioOutcome("mitm_point_substitution", "mitm", INFO, observed, None, detail,
                               world.transcript.digest()))
    return out


def find_identity_leaks(transcript: Transcript, identities, alg: str = DEFAULT_HASH) -> list:
    """Public entries containing a raw or encoded identity as contiguous bytes."""
    needles = []
    for ident in identities:
        needles += [ident.encode("utf-8"), encode_id(ident, alg)]
    leaks = []
    for i, e in enumerate(transcript):
        if e.channel != PUBLIC:
            continue
        for needle in needles:
            if needle and needle in e.payload:
                leaks.append(i)
                break
    return leaks


def scenario_anonymity(world: World, user_id: str = "meter-0001") -> list:
    world.login(user_id)
    ids = [user_id, world.server.server_id]
    leaks = find_identity_leaks(world.transcript, ids, world.params.hash_id)
    out = [ScenarioOutcome("anonymity_public_messages", "anonymity", "NoLeak",
                           "NoLeak" if not leaks else "Leak%s" % leaks, not leaks,
                           "secure-channel registration entries excluded",
                           world.transcript.digest())]
    world.transcript.append(Entry(TO_SERVER, PUBLIC, "Debug", b"debug:" + user_id.encode(),
                                  world.clock.now()))
    leaks = find_identity_leaks(world.transcript, ids, world.params.hash_id)
    out.append(ScenarioOutcome("anonymity_negative_control", "anonymity", "LeakDetected",
                               "LeakDetected" if leaks else "NoLeak", bool(leaks),
                               "a plaintext debug message must be flagged",
                               world.transcript.digest()))
    return out


def scenario_key_freshness(world: World, user_id: str = "meter-0001") -> list:
    a = world.login(user_id)
    b = world.login(user_id)
    fresh = a.sk_user != b.sk_user and a.sk_server != b.sk_server
    return [ScenarioOutcome("key_freshness_two_sessions", "key_freshness", "Distinct",
                            "Distinct" if fresh else "Repeated", fresh,
                            transcript_hash=world.transcript.digest())]


TAMPER_FIELDS = {"MsgA1": ("S1", "ID_U1", "U_point", "t1"),
                 "MsgA2": ("ID_S1", "S2", "S_point", "t3")}


def tamper_outcomes(world: World, session: Session, bits=None) -> list:
    """Flip single bits of every handshake field and deliver each mutant.

    ``bits`` maps a field name to the bit offsets to try; missing fields use
    every bit.  Mutants are delivered at the honest receive time, so a
    rejection is never caused by the adversary's own delay.
    """
    adv = Adversary(world)
    spans = {k: wire.field_spans(k, world.params.curve) for k in TAMPER_FIELDS}
    out = []
    targets = (("MsgA1", session.a1_index, session.a1_received),
               ("MsgA2", session.a2_index, session.a2_received))
    for kind, index, recv in targets:
        for name in TAMPER_FIELDS[kind]:
            width = 8 * spans[kind][name][1]
            positions = range(width) if bits is None or name not in bits else bits[name]
            for bit in positions:
                payload = adv.act(Tamper(index, name, bit))
                if kind == "MsgA1":
                    observed, err, _ = attempt(_server_side, world, payload, recv)
                else:
                    observed, err, _ = attempt(world.user_receive_a2, session, payload, recv)
                ok = observed != ACCEPTED
                out.append(ScenarioOutcome("tamper_%s_%s_bit%d" % (kind, name, bit), "message_auth",
                                           "Rejected", observed, ok))
    return out


def _server_side(world: World, payload: bytes, now: int):
    # verification only: a successful mutant must not append to the transcript
    m1 = world.decode("MsgA1", payload)
    return protocol.server_auth_respond(world.server, m1, now, random.Random(0))


def scenario_tamper(world: World, user_id: str = "meter-0001") -> list:
    s = world.login(user_id)
    spans = {k: wire.field_spans(k, world.params.curve) for k in TAMPER_FIELDS}
    bits = {}
    for kind, names in TAMPER_FIELDS.items():
        for name in names:
            width = 8 * spans[kind][name][1]
            bits[name] = sorted({0, width // 2, width - 1})
    per_bit = tamper_outcomes(world, s, bits)
    out = []
    for kind, names in TAMPER_FIELDS.items():
        for name in names:
            rows = [o for o in per_bit if o.name.startswith("tamper_%s_%s_" % (kind, name))]
            kinds = sorted({o.observed for o in rows})
            ok = all(o.passed for o in rows)
            out.append(ScenarioOutcome("tamper_%s_%s" % (kind, name), "message_auth", "Rejected",
                                       "|".join(kinds), ok, "%d bit positions" % len(rows),
                                       world.transcript.digest()))
    # an on-curve-looking but invalid replacement point
    m1 = world.decode("MsgA1", world.transcript[s.a1_index].payload)
    bad = protocol.MsgA1(m1.S1, m1.ID_U1, Point(m1.U_point.x, (m1.U_point.y + 1) % world.params.curve.p), m1.t1)
    payload = wire.encode_message(bad, world.params.curve)
    observed, err, _ = attempt(_server_side, world, payload, s.a1_received)
    out.append(ScenarioOutcome("tamper_MsgA1_U_point_off_curve", "message_auth",
                               rejected("InvalidPoint"), observed,
                               matches(rejected("InvalidPoint"), observed, err),
                               transcript_hash=world.transcript.digest()))
    return out


def scenario_impersonation(world: World, user_id: str = "meter-0001") -> list:
    curve = world.params.curve
    rng = world.rng
    s = world.login(user_id)
    captured = world.decode("MsgA1", world.transcript[s.a1_index].payload)
    adv = Adversary(world)
    out = []
    world.hop()

    def fresh_point():
        return scalar_mul(rng.randrange(1, curve.q), curve.G, curve)

    forged = protocol.MsgA1(rng.randbytes(WIDTH), rng.randbytes(WIDTH), fresh_point(), world.clock.now())
    out.append(outcome("impersonation_forged_s1", "impersonation", rejected("AuthenticationFailure"),
                       world, world.server_receive_a1,
                       adv.act(Inject("MsgA1", wire.encode_message(forged, curve)))))

    forged = protocol.MsgA1(captured.S1, captured.ID_U1, fresh_point(), world.clock.now())
    out.append(outcome("impersonation_reused_masked_id", "impersonation",
                       rejected("AuthenticationFailure"), world, world.server_receive_a1,
                       adv.act(Inject("MsgA1", wire.encode_message(forged, curve)))))

    # the adversary knows the identity string but not R1: guess a mask
    t1 = world.clock.now()
    guess = xor32(xor32(encode_id(user_id, world.params.hash_id), rng.randbytes(WIDTH)),
                  encode_timestamp(t1))
    forged = protocol.MsgA1(rng.randbytes(WIDTH), guess, fresh_point(), t1)
    out.append(outcome("impersonation_known_identity", "impersonation",
                       rejected("AuthenticationFailure"), world, world.server_receive_a1,
                       adv.act(Inject("MsgA1", wire.encode_message(forged, curve)))))
    return out


def scenario_key_agreement(world: World, user_id: str = "meter-0001") -> list:
    _, sk_u, sk_s = run_honest_session(world, user_id)
    return [ScenarioOutcome("key_agreement_honest", "key_agreement", "Equal",
                            "Equal" if sk_u == sk_s else "Different", sk_u == sk_s,
                            transcript_hash=world.transcript.digest())]


def linkable_fields(a: protocol.MsgA1, b: protocol.MsgA1) -> list:
    """Names of M_A1 fields repeated verbatim across two sessions."""
    return [n for n in ("S1", "ID_U1", "U_point") if getattr(a, n) == getattr(b, n)]


def scenario_untraceability(world: World, user_id: str = "meter-0001") -> list:
    a = world.login(user_id)
    b = world.login(user_id)
    m_a = world.decode("MsgA1", world.transcript[a.a1_index].payload)
    m_b = world.decode("MsgA1", world.transcript[b.a1_index].payload)
    same = linkable_fields(m_a, m_b)
    out = [ScenarioOutcome("untraceability_same_user", "untraceability", "AllDiffer",
                           "AllDiffer" if not same else "Repeated:" + ",".join(same), not same,
                           transcript_hash=world.transcript.digest())]
    other = unused_id(world.server, "meter-0002")
    world.register(other)
    c = world.login(other)
    m_c = world.decode("MsgA1", world.transcript[c.a1_index].payload)
    same = linkable_fields(m_a, m_c)
    out.append(ScenarioOutcome("untraceability_two_users", "untraceability", "AllDiffer",
                               "AllDiffer" if not same else "Repeated:" + ",".join(same), not same,
                               transcript_hash=world.transcript.digest()))
    return out


def scenario_local_gate(world: World, user_id: str = "meter-0001") -> list:
    cred = world.creds[user_id]
    out = [
        outcome("local_gate_wrong_password", "local_gate", rejected("LocalAuthFailure"), world,
                world.user_send_a1, user_id, pw=cred.pw + "x"),
        outcome("local_gate_biometric_beyond_tolerance", "local_gate", rejected("LocalAuthFailure"),
                world, world.user_send_a1, user_id, template=world.overloaded(cred.template)),
        outcome("local_gate_noisy_within_tolerance", "local_gate", ACCEPTED, world,
                world.user_send_a1, user_id, template=world.noisy(cred.template)),
    ]
    return out


def scenario_update(world: World, user_id: str = "meter-0001") -> list:
    old = world.creds[user_id]
    out = []
    before = world.devices[user_id]
    observed, err, _ = attempt(world.update, user_id, "new-" + old.pw, world.random_template(),
                               pw_old=old.pw + "x")
    unchanged = world.devices[user_id] == before and world.creds[user_id] == old
    o = ScenarioOutcome("update_wrong_old_password", "update", rejected("LocalAuthFailure"), observed,
                        matches(rejected("LocalAuthFailure"), observed, err) and unchanged,
                        "device state unchanged: %s" % unchanged, world.transcript.digest())
    out.append(o)
    out.append(outcome("update_refused_old_creds_still_work", "update", ACCEPTED, world,
                       world.login, user_id))

    new_pw, new_b = "rotated-" + old.pw, world.random_template()
    world.update(user_id, new_pw, new_b)
    s = world.login(user_id)
    out.append(ScenarioOutcome("update_new_credentials_login", "update", "Equal",
                               "Equal" if s.sk_user == s.sk_server else "Different",
                               s.sk_user == s.sk_server, transcript_hash=world.transcript.digest()))
    out.append(outcome("update_old_password_rejected", "update", rejected("LocalAuthFailure"), world,
                       world.user_send_a1, user_id, pw=old.pw, template=world.noisy(new_b)))
    out.append(outcome("update_old_biometric_rejected", "update", rejected("LocalAuthFailure"), world,
                       world.user_send_a1, user_id, pw=new_pw, template=world.noisy(old.template)))
    return out


SCENARIOS = (
    ("replay", scenario_replay),
    ("mitm", scenario_mitm),
    ("anonymity", scenario_anonymity),
    ("key_freshness", scenario_key_freshness),
    ("message_auth", scenario_tamper),
    ("impersonation", scenario_impersonation),
    ("key_agreement", scenario_key_agreement),
    ("untraceability", scenario_untraceability),
    ("local_gate", scenario_local_gate),
    ("update", scenario_update),
)


@dataclass
class AttackReport:
    seed: int
    profile: str
    outcomes: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [o for o in self.outcomes if o.passed is False]

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def families(self) -> list:
        seen = []
        for o in self.outcomes:
            if o.family not in seen:
                seen.append(o.family)
        return seen

    def to_kv(self) -> str:
        lines = []
        for o in self.outcomes:
            verdict = "info" if o.passed is None else ("true" if o.passed else "false")
            lines.append(" ".join([
                "scenario=%s" % o.name,
                "family=%s" % o.family,
                "expected=%s" % o.expected,
                "observed=%s" % o.observed,
                "pass=%s" % verdict,
                "seed=%d" % self.seed,
                "transcript_hash=%s" % o.transcript_hash,
            ]))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = ["attack suite  profile=%s  seed=%d" % (self.profile, self.seed), ""]
        for o in self.outcomes:
            verdict = "INFO" if o.passed is None else ("PASS" if o.passed else "FAIL")
            line = "%-4s  %-40s expected %-32s observed %s" % (verdict, o.name, o.expected, o.observed)
            if o.detail:
                line += "  (%s)" % o.detail
            lines.append(line)
        n_pass = sum(1 for o in self.outcomes if o.passed)
        n_info = sum(1 for o in self.outcomes if o.passed is None)
        lines += ["", "%d passed, %d failed, %d informational, %d families"
                  % (n_pass, len(self.failures), n_info, len(self.families))]
        return "\n".join(lines) + "\n"


def unused_id(server, base: str) -> str:
    ident, n = base, 1
    while ident in server.users:
        ident, n = "%s-%d" % (base, n), n + 1
    return ident


def run_attack_suite(seed: int = 0, server=None, **world_kw) -> AttackReport:
    """Run every scenario family, each in a fresh world seeded with ``seed``.

    With ``server`` given, scenarios run against that (loaded) server state
    and enroll simulated meters alongside its existing records.
    """
    outcomes = []
    profile = None
    for _, fn in SCENARIOS:
        world = World(seed, server=server, **world_kw)
        victim = unused_id(world.server, "meter-0001")
        world.register(victim)
        profile = world.params.curve.name
        outcomes += fn(world, victim)
    return AttackReport(seed, profile, outcomes)
