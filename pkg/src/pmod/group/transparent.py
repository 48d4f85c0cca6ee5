"""Transparent test backend: exponent arithmetic in the clear.

Group elements are residues mod a small prime p.  The element standing for
g^a is simply a; multiplication adds exponents, exponentiation multiplies
them, and the pairing multiplies the two exponents into the target group,
so e(g^a, g^b) = e(g,g)^(ab) holds by construction.  Every element exposes
its discrete log through known_exponent, which makes this backend an exact
algebraic oracle for tests — and useless for security.
"""

from __future__ import annotations

import hashlib

from ..errors import ParameterError, SerializationError
from .base import PairingContext

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic for anything below ~3.3e24."""
    if n < 2:
        return False
    for sp in _MR_BASES:
        if n % sp == 0:
            return n == sp
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class TransparentContext(PairingContext):
    """Residues mod p with pairing (a, b) -> a*b."""

    backend_id = "transparent"
    tag = 0x01

    def __init__(self, p: int = 101):
        if not is_probable_prime(p):
            raise ParameterError("transparent group order must be prime")
        if p.bit_length() > 256:
            raise ParameterError("transparent group order must fit 32 bytes")
        super().__init__(p)

    # -- algebra: G0 and G1 are both (Z_p, +) written multiplicatively --

    def _g0_generator(self):
        return 1

    def _g0_identity(self):
        return 0

    def _g0_mul(self, a, b):
        return (a + b) % self.order

    def _g0_exp(self, a, k):
        return a * k % self.order

    def _g0_inv(self, a):
        return -a % self.order

    def _g0_is_identity(self, a):
        return a == 0

    _gt_identity = _g0_identity
    _gt_mul = _g0_mul
    _gt_exp = _g0_exp
    _gt_inv = _g0_inv
    _gt_is_identity = _g0_is_identity

    def _pair_raw(self, a, b):
        return a * b % self.order

    def _hash_to_g0_raw(self, data: bytes):
        return int.from_bytes(hashlib.sha256(data).digest(), "big") % self.order

    def _reveal(self, v, kind):
        return v

    def describe_element(self, v, kind):
        return "g^%d" % v if kind == "G0" else "e(g,g)^%d" % v

    # -- serialization ---------------------------------------------------

    def descriptor(self) -> bytes:
        return bytes([self.tag]) + self.order.to_bytes(32, "big")

    def _res_to_bytes(self, v) -> bytes:
        return v.to_bytes(32, "big")

    def _res_from_bytes(self, payload: bytes):
        if len(payload) != 32:
            raise SerializationError("transparent element must be 32 bytes")
        v = int.from_bytes(payload, "big")
        if v >= self.order:
            raise SerializationError("residue out of range")
        return v

    def g0_to_bytes(self, el) -> bytes:
        return self._res_to_bytes(el.v)

    def g0_from_bytes(self, payload, validate=True):
        from .base import G0Element

        return G0Element(self, self._res_from_bytes(payload))

    def gt_to_bytes(self, el) -> bytes:
        return self._res_to_bytes(el.v)

    def gt_from_bytes(self, payload, validate=True):
        from .base import G1Element

        return G1Element(self, self._res_from_bytes(payload))
