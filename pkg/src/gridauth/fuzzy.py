"""Code-offset fuzzy extractor over a repetition code.

``gen`` draws a fresh k-bit secret ``w``, spreads each bit over ``rho``
positions and publishes ``sketch = B xor C(w)``.  ``rep`` XORs a fresh
reading back onto the sketch and majority-decodes each block.  Recovery is
guaranteed when no block has more than ``(rho - 1) // 2`` flipped bits.
"""
from __future__ import annotations

from dataclasses import dataclass

from gridauth import kernels
from gridauth.costs import bump
from gridauth.errors import BadTemplateLength
from gridauth.group import DEFAULT_HASH, hash32

DEFAULT_K = 128
DEFAULT_RHO = 5


@dataclass(frozen=True)
class FEParams:
    k: int = DEFAULT_K
    rho: int = DEFAULT_RHO

    def __post_init__(self):
        if self.k <= 0 or self.rho <= 0:
            raise ValueError("k and rho must be positive")
        if self.n % 4:
            raise ValueError("n = k * rho must be a multiple of 4 for hex I/O")

    @property
    def n(self) -> int:
        return self.k * self.rho

    @property
    def tolerance(self) -> int:
        """Flips per block that decoding always corrects."""
        return (self.rho - 1) // 2


def _bits_from_hex(text: str, n: int) -> bytes:
    text = text.strip().lower()
    if len(text) * 4 != n:
        raise BadTemplateLength("expected %d hex digits, got %d" % (n // 4, len(text)))
    try:
        v = int(text, 16)
    except ValueError:
        raise BadTemplateLength("template is not hex") from None
    return bytes((v >> (n - 1 - i)) & 1 for i in range(n))


def _bits_to_hex(bits: bytes) -> str:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return format(v, "0%dx" % (len(bits) // 4))


def _xor_bits(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def _pack(bits: bytes) -> bytes:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v.to_bytes((len(bits) + 7) // 8, "big")


@dataclass(frozen=True)
class BiometricTemplate:
    """A binary template, one 0/1 value per byte of ``bits``."""

    bits: bytes

    def __post_init__(self):
        if any(b > 1 for b in self.bits):
            raise ValueError("template bits must be 0 or 1")

    def __len__(self):
        return len(self.bits)

    @classmethod
    def from_hex(cls, text: str, n: int) -> "BiometricTemplate":
        return cls(_bits_from_hex(text, n))

    def to_hex(self) -> str:
        return _bits_to_hex(self.bits)

    @classmethod
    def random(cls, rng, n: int) -> "BiometricTemplate":
        v = rng.getrandbits(n)
        return cls(bytes((v >> i) & 1 for i in range(n)))

    def flipped(self, positions) -> "BiometricTemplate":
        out = bytearray(self.bits)
        for i in positions:
            out[i] ^= 1
        return BiometricTemplate(bytes(out))


@dataclass(frozen=True)
class HelperData:
    sketch: bytes
    params: FEParams

    def __post_init__(self):
        if len(self.sketch) != self.params.n:
            raise BadTemplateLength("sketch has %d bits, params need %d" % (len(self.sketch), self.params.n))

    def serialize(self) -> str:
        p = self.params
        return "%d:%d:%d:%s" % (p.n, p.k, p.rho, _bits_to_hex(self.sketch))

    @classmethod
    def deserialize(cls, text: str) -> "HelperData":
        try:
            n, k, rho, sketch = text.split(":")
            params = FEParams(int(k), int(rho))
        except ValueError:
            raise BadTemplateLength("malformed helper data") from None
        if params.n != int(n):
            raise BadTemplateLength("helper data has n != k * rho")
        return cls(_bits_from_hex(sketch, params.n), params)


def encode_repetition(secret_bits: bytes, rho: int) -> bytes:
    return bytes(b for b in secret_bits for _ in range(rho))


def _check(B: BiometricTemplate, params: FEParams):
    if len(B) != params.n:
        raise BadTemplateLength("template has %d bits, expected %d" % (len(B), params.n))


def key_from_secret(secret_bits: bytes, alg: str = DEFAULT_HASH) -> bytes:
    return hash32(_pack(secret_bits), alg)


def gen_with_secret(B: BiometricTemplate, secret_bits: bytes, params: FEParams = FEParams(),
                    alg: str = DEFAULT_HASH):
    """Deterministic core of :func:`gen` for a given secret."""
    _check(B, params)
    if len(secret_bits) != params.k:
        raise ValueError("secret must have k = %d bits" % params.k)
    sketch = _xor_bits(B.bits, encode_repetition(secret_bits, params.rho))
    return key_from_secret(secret_bits, alg), HelperData(sketch, params)


def gen(B: BiometricTemplate, rng, params: FEParams = FEParams(), alg: str = DEFAULT_HASH):
    """Enroll ``B``: return ``(sigma, helper)``."""
    _check(B, params)
    bump("random")
    v = rng.getrandbits(params.k)
    w = bytes((v >> (params.k - 1 - i)) & 1 for i in range(params.k))
    return gen_with_secret(B, w, params, alg)


def rep(B_noisy: BiometricTemplate, helper: HelperData, alg: str = DEFAULT_HASH) -> bytes:
    """Reproduce ``sigma`` from a fresh reading.

    Too much noise does not raise; it yields a different key.
    """
    _check(B_noisy, helper.params)
    word = _xor_bits(B_noisy.bits, helper.sketch)
    return key_from_secret(kernels.majority_decode(word, helper.params.rho), alg)
