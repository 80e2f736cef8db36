"""Short-Weierstrass curve arithmetic and fixed-width byte helpers.

Curves have the form ``y^2 = x^3 + c*x + d (mod p)`` with a generator ``G``
of prime order ``q``.  All values that get XOR-ed or hashed together are
normalised to :data:`WIDTH` octets first.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import gmpy2

from gridauth import kernels
from gridauth.costs import bump, counted
from gridauth.errors import (
    BadOrder,
    CurveError,
    GeneratorOffCurve,
    PointOffCurve,
    SingularCurve,
    WidthMismatch,
)

WIDTH = 32
ZERO32 = bytes(WIDTH)
HASHES = {
    "sha256": hashlib.sha256,
    "sha3_256": hashlib.sha3_256,
    "blake2s": hashlib.blake2s,
}
DEFAULT_HASH = "sha256"
_IDENTITY_TAG = b"gridauth/point-at-infinity"


@dataclass(frozen=True)
class Point:
    """Affine point; ``x is None`` marks the identity."""

    x: Optional[int]
    y: Optional[int]

    @property
    def is_identity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_identity:
            return "Point(identity)"
        return "Point(%#x, %#x)" % (self.x, self.y)


IDENTITY = Point(None, None)


@dataclass(frozen=True)
class CurveParams:
    name: str
    p: int
    c: int
    d: int
    q: int
    gx: int
    gy: int

    @property
    def G(self) -> Point:
        return Point(self.gx, self.gy)

    @property
    def byte_len(self) -> int:
        """Octets per field element on the wire."""
        return (self.p.bit_length() + 7) // 8

    def contains(self, P: Point) -> bool:
        if P.is_identity:
            return True
        x, y, p = P.x, P.y, self.p
        if not (0 <= x < p and 0 <= y < p):
            return False
        return (y * y - (x * x * x + self.c * x + self.d)) % p == 0

    def to_hex(self) -> dict:
        return {k: format(getattr(self, k), "x") for k in ("p", "c", "d", "q", "gx", "gy")}

    @classmethod
    def from_hex(cls, name: str, fields: dict) -> "CurveParams":
        try:
            vals = {k: int(fields[k], 16) for k in ("p", "c", "d", "q", "gx", "gy")}
        except (KeyError, TypeError, ValueError) as exc:
            raise CurveError("profile %r: bad or missing field (%s)" % (name, exc)) from None
        return cls(name=name, **vals)


def load_profiles(path=None) -> dict:
    """Read named curve profiles from a JSON file (default: bundled set)."""
    if path is None:
        text = resources.files("gridauth").joinpath("profiles.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    return {name: CurveParams.from_hex(name, fields) for name, fields in raw.items()}


def get_profile(name: str, path=None) -> CurveParams:
    profiles = load_profiles(path)
    try:
        return profiles[name]
    except KeyError:
        raise CurveError(
            "unknown curve profile %r (have: %s)" % (name, ", ".join(sorted(profiles)))
        ) from None


def validate_curve(curve: CurveParams) -> CurveParams:
    """Check every curve invariant; return the curve unchanged or raise."""
    p = curve.p
    if p <= 3 or not gmpy2.is_prime(p):
        raise CurveError("field modulus %d is not a prime > 3" % p)
    if (4 * curve.c ** 3 + 27 * curve.d ** 2) % p == 0:
        raise SingularCurve("4c^3 + 27d^2 = 0 mod p")
    if curve.G.is_identity or not curve.contains(curve.G):
        raise GeneratorOffCurve("generator is not on the curve")
    if curve.q < 2 or not gmpy2.is_prime(curve.q):
        raise BadOrder("group order q = %d is not prime" % curve.q)
    if not _mul(curve.q, curve.G, curve).is_identity:
        raise BadOrder("q * G is not the identity")
    return curve


def negate(P: Point, curve: CurveParams) -> Point:
    if P.is_identity:
        return P
    return Point(P.x, (-P.y) % curve.p)


@counted("point_add")
def point_add(P1: Point, P2: Point, curve: CurveParams) -> Point:
    for P in (P1, P2):
        if not curve.contains(P):
            raise PointOffCurve(repr(P))
    if P1.is_identity:
        return P2
    if P2.is_identity:
        return P1
    p = curve.p
    if P1.x == P2.x:
        if (P1.y + P2.y) % p == 0:
            return IDENTITY
        lam = (3 * P1.x * P1.x + curve.c) * pow(2 * P1.y, -1, p) % p
    else:
        lam = (P2.y - P1.y) * pow(P2.x - P1.x, -1, p) % p
    x3 = (lam * lam - P1.x - P2.x) % p
    return Point(x3, (lam * (P1.x - x3) - P1.y) % p)


def _mul(k: int, P: Point, curve: CurveParams) -> Point:
    if k < 0:
        k, P = -k, negate(P, curve)
    if k == 0 or P.is_identity:
        return IDENTITY
    r = kernels.ec_mul(k, P.x, P.y, curve.c, curve.p)
    return IDENTITY if r is None else Point(*r)


@counted("scalar_mul")
def scalar_mul(k: int, P: Point, curve: CurveParams) -> Point:
    """Return ``k * P``.

    ``k`` is used as given (no reduction mod q), so the result is correct
    for points outside the prime-order subgroup too.
    """
    if not curve.contains(P):
        raise PointOffCurve(repr(P))
    return _mul(int(k), P, curve)


def _digest(data: bytes, alg: str) -> bytes:
    try:
        h = HASHES[alg]
    except KeyError:
        raise ValueError("unsupported hash %r (have: %s)" % (alg, ", ".join(HASHES))) from None
    return h(data).digest()


@counted("hash")
def hash32(data: bytes, alg: str = DEFAULT_HASH) -> bytes:
    """The protocol's one-way function: a 32-octet digest."""
    return _digest(bytes(data), alg)


@counted("xor")
def xor32(a: bytes, b: bytes) -> bytes:
    if len(a) != WIDTH or len(b) != WIDTH:
        raise WidthMismatch("xor32 operands are %d and %d octets" % (len(a), len(b)))
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(WIDTH, "big")


def encode_id(s: str, alg: str = DEFAULT_HASH) -> bytes:
    """Identity strings and passphrases: digest of the UTF-8 bytes."""
    bump("encode")
    return _digest(s.encode("utf-8"), alg)


def encode_int(v: int) -> bytes:
    """Scalars and millisecond timestamps: big-endian, zero-padded."""
    bump("encode")
    if v < 0 or v.bit_length() > 8 * WIDTH:
        raise WidthMismatch("integer %d does not fit in %d octets" % (v, WIDTH))
    return v.to_bytes(WIDTH, "big")


def encode_timestamp(ms: int) -> bytes:
    if not 0 <= ms < 1 << 64:
        raise WidthMismatch("timestamp %d is not a 64-bit unsigned value" % ms)
    return encode_int(ms)


def encode_point(P: Point, curve: CurveParams, alg: str = DEFAULT_HASH) -> bytes:
    bump("encode")
    if P.is_identity:
        return _digest(_IDENTITY_TAG, alg)
    n = curve.byte_len
    return _digest(P.x.to_bytes(n, "big") + P.y.to_bytes(n, "big"), alg)


def encode_to32(v, curve: CurveParams = None, alg: str = DEFAULT_HASH) -> bytes:
    """Normalise an identity string, integer or point to :data:`WIDTH` octets."""
    if isinstance(v, str):
        return encode_id(v, alg)
    if isinstance(v, Point):
        if curve is None:
            raise TypeError("encoding a point needs its curve")
        return encode_point(v, curve, alg)
    if isinstance(v, int):
        return encode_int(v)
    raise TypeError("cannot encode %s" % type(v).__name__)


@counted("random")
def random_scalar(rng, q: int) -> int:
    """Uniform draw from ``[1, q-1]``; ``rng`` is a ``random.Random``-like source."""
    return rng.randrange(1, q)
