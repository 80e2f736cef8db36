"""Measured operation counts and message sizes for each protocol step."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from gridauth import protocol, wire
from gridauth.costs import KINDS, counting
from gridauth.fuzzy import BiometricTemplate, FEParams
from gridauth.group import DEFAULT_HASH, CurveParams

PHASES = (
    "setup",
    "registration.user_request",
    "registration.server_respond",
    "registration.user_finalize",
    "login.user_start",
    "login.server_respond",
    "login.user_finalize",
    "update.user_request",
    "update.server_respond",
    "update.user_finalize",
)
MESSAGES = ("RegRequest", "RegResponse", "MsgA1", "MsgA2", "UpdateRequest", "UpdateResponse")


@dataclass
class CostReport:
    profile: str
    hash_id: str
    fe: FEParams
    counts: dict = field(default_factory=dict)   # phase -> {kind: n}
    sizes: dict = field(default_factory=dict)    # message kind -> octets

    def side(self, prefix: str, phases) -> dict:
        total = dict.fromkeys(KINDS, 0)
        for ph in phases:
            for k, v in self.counts["%s.%s" % (prefix, ph)].items():
                total[k] += v
        return total

    def to_text(self) -> str:
        head = "%-30s" % "phase" + "".join("%11s" % k for k in KINDS)
        lines = ["cost report  profile=%s  hash=%s  fe=(n=%d, k=%d, rho=%d)"
                 % (self.profile, self.hash_id, self.fe.n, self.fe.k, self.fe.rho), "", head]
        for ph in PHASES:
            lines.append("%-30s" % ph + "".join("%11d" % self.counts[ph][k] for k in KINDS))
        lines += ["", "%-30s%11s" % ("message", "octets")]
        for m in MESSAGES:
            lines.append("%-30s%11d" % (m, self.sizes[m]))
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        lines = []
        for ph in PHASES:
            lines.append("phase=%s " % ph + " ".join("%s=%d" % (k, self.counts[ph][k]) for k in KINDS))
        for m in MESSAGES:
            lines.append("message=%s octets=%d" % (m, self.sizes[m]))
        return "\n".join(lines) + "\n"


def measure(curve: CurveParams, seed: int = 0, hash_id: str = DEFAULT_HASH,
            fe: FEParams = FEParams(), delta_t: int = protocol.DEFAULT_DELTA_T) -> CostReport:
    """Run one enrollment, login and update, counting operations per step.

    The server holds a single user record, so the login lookup scans once.
    """
    rng = random.Random(seed)
    rep = CostReport(curve.name, hash_id, fe)
    now = 1_000

    def run(phase, fn, *args):
        with counting() as c:
            result = fn(*args)
        rep.counts[phase] = c.snapshot()
        return result

    params, server = run("setup", lambda: protocol.setup(curve, rng, delta_t=delta_t,
                                                         hash_id=hash_id, fe=fe))
    B = BiometricTemplate.random(rng, fe.n)
    req, pend = run("registration.user_request", protocol.user_reg_request,
                    params, "meter-0001", "correct horse", B, now, rng)
    resp, server = run("registration.server_respond", protocol.server_reg_respond, server, req, now)
    dev = run("registration.user_finalize", protocol.user_reg_finalize, pend, resp, params)
    m1, sess = run("login.user_start", protocol.user_login_start,
                   dev, params, "meter-0001", "correct horse", B, now, rng)
    m2, _ = run("login.server_respond", protocol.server_auth_respond, server, m1, now, rng)
    run("login.user_finalize", protocol.user_auth_finalize, sess, m2, params, now)
    B_new = BiometricTemplate.random(rng, fe.n)
    ureq, upend = run("update.user_request", protocol.user_update_request,
                      dev, params, "meter-0001", "correct horse", B, "battery staple", B_new, now, rng)
    uresp, server = run("update.server_respond", protocol.server_update_respond, server, ureq, now)
    run("update.user_finalize", protocol.user_update_finalize, upend, uresp, params)

    for msg in (req, resp, m1, m2, ureq, uresp):
        rep.sizes[type(msg).__name__] = len(wire.encode_message(msg, curve))
    return rep
