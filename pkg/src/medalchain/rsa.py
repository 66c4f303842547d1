"""Textbook RSA with Chaum-style multiplicative blinding.

Deliberately unhardened (no padding, no constant-time arithmetic): the keys
sign 256-bit ballot digests in a desk-scale system. Key generation is seedable
so fixtures are reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from .canon import sha256
from .errors import BadBlindingFactor, KeyTooSmall, MessageOutOfRange, SchemaViolation

MIN_KEY_BITS = 16
DEFAULT_KEY_BITS = 2048
SERIAL_BYTES = 16

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71]


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int

    def to_wire(self) -> dict:
        # The modulus travels as hex: it does not fit a JSON number.
        return {"exponent": self.e, "modulus": format(self.n, "x")}

    @classmethod
    def from_wire(cls, wire: dict) -> "RsaPublicKey":
        try:
            n = int(str(wire["modulus"]), 16)
            e = wire["exponent"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed public key: {exc}") from exc
        if not isinstance(e, int) or isinstance(e, bool) or e < 3 or n < 4:
            raise SchemaViolation("malformed public key")
        return cls(n=n, e=e)


@dataclass(frozen=True)
class RsaKeyPair:
    n: int
    e: int
    d: int
    p: int
    q: int

    @property
    def public(self) -> RsaPublicKey:
        return RsaPublicKey(n=self.n, e=self.e)

    def to_wire(self) -> dict:
        # All components as hex: none of them fit a JSON number at real sizes.
        return {field: format(getattr(self, field), "x") for field in ("d", "e", "n", "p", "q")}

    @classmethod
    def from_wire(cls, wire: dict) -> "RsaKeyPair":
        try:
            parts = {field: int(str(wire[field]), 16) for field in ("d", "e", "n", "p", "q")}
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed key pair: {exc}") from exc
        key = cls(**parts)
        if not check_keypair(key):
            raise SchemaViolation("key pair components are inconsistent")
        return key


def is_probable_prime(n: int, rng: random.Random, rounds: int = 40) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    # Miller-Rabin
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def generate_prime(bits: int, rng: random.Random) -> int:
    if bits < 3:
        raise KeyTooSmall(f"cannot generate a {bits}-bit prime")
    while True:
        # Top two bits set so the product of two such primes has full width.
        candidate = rng.getrandbits(bits) | (0b11 << (bits - 2)) | 1
        if is_probable_prime(candidate, rng):
            return candidate


def keygen(
    bits: int = DEFAULT_KEY_BITS,
    seed: Optional[int] = None,
    rng: Optional[random.Random] = None,
) -> RsaKeyPair:
    """Generate an RSA keypair with an n of exactly `bits` bits."""
    if bits < MIN_KEY_BITS:
        raise KeyTooSmall(f"key size {bits} below floor {MIN_KEY_BITS}")
    if rng is None:
        rng = random.Random(seed) if seed is not None else random.SystemRandom()
    p_bits = bits - bits // 2
    q_bits = bits // 2
    while True:
        p = generate_prime(p_bits, rng)
        q = generate_prime(q_bits, rng)
        if p == q:
            continue
        n = p * q
        if n.bit_length() != bits:
            continue
        lam = math.lcm(p - 1, q - 1)
        e = 65537
        if e >= lam or math.gcd(e, lam) != 1:
            e = next(c for c in range(3, lam, 2) if math.gcd(c, lam) == 1)
        d = pow(e, -1, lam)
        return RsaKeyPair(n=n, e=e, d=d, p=p, q=q)


def check_keypair(key: RsaKeyPair) -> bool:
    rng = random.Random(0xC0FFEE)
    if key.p * key.q != key.n or key.p == key.q:
        return False
    if not (is_probable_prime(key.p, rng) and is_probable_prime(key.q, rng)):
        return False
    lam = math.lcm(key.p - 1, key.q - 1)
    return key.e * key.d % lam == 1


def fdh(round_id: str, serial: bytes, n: int) -> int:
    """Hash a ballot serial into the signing domain.

    Digest input is the raw byte concatenation ballot-prefix + round id +
    serial (the serial's fixed width keeps the framing unambiguous), reduced
    mod n; a zero residue maps to 1 so the result is always invertible.
    """
    if len(serial) != SERIAL_BYTES:
        raise SchemaViolation(f"serial must be exactly {SERIAL_BYTES} bytes")
    digest = sha256(b"ballot" + round_id.encode("utf-8") + serial)
    return int.from_bytes(digest, "big") % n or 1


def blind(m: int, r: int, pub: RsaPublicKey) -> int:
    if not 0 < m < pub.n:
        raise MessageOutOfRange(f"message must lie in (0, n), got bit length {m.bit_length()}")
    if math.gcd(r, pub.n) != 1:
        raise BadBlindingFactor("blinding factor shares a factor with the modulus")
    return m * pow(r, pub.e, pub.n) % pub.n


def sign_blinded(blinded: int, key: RsaKeyPair) -> int:
    if not 0 < blinded < key.n:
        raise MessageOutOfRange("blinded value must lie in (0, n)")
    return pow(blinded, key.d, key.n)


def unblind(s_blind: int, r: int, pub: RsaPublicKey) -> int:
    if math.gcd(r, pub.n) != 1:
        raise BadBlindingFactor("blinding factor shares a factor with the modulus")
    return s_blind * pow(r, -1, pub.n) % pub.n


def verify_signature(m: int, s: int, pub: RsaPublicKey) -> bool:
    if not 0 <= s < pub.n:
        return False
    return pow(s, pub.e, pub.n) == m % pub.n


def new_serial(rng: Optional[random.Random] = None) -> bytes:
    source = rng if rng is not None else random.SystemRandom()
    return source.getrandbits(SERIAL_BYTES * 8).to_bytes(SERIAL_BYTES, "big")


def new_blinding_factor(n: int, rng: Optional[random.Random] = None) -> int:
    source = rng if rng is not None else random.SystemRandom()
    while True:
        r = source.randrange(2, n - 1)
        if math.gcd(r, n) == 1:
            return r
