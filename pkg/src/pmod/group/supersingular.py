"""Production backend: supersingular curve with a symmetric Tate pairing.

G0 is the order-p subgroup of E(F_q): y^2 = x^3 + x (q = 3 mod 4); G1 is the
order-p subgroup mu_p of F_{q^2}^*.  The distortion map keeps the pairing
symmetric and non-degenerate on G0 itself, so e(g, g) generates G1 as the
interface requires.  All arithmetic is delegated to a kernel (compiled or
pure) selected at construction.

Hashing to G0 expands the label through counter-mode SHA-256 into a candidate
x-coordinate, solves the curve equation (about half the candidates work),
takes the smaller square root, and multiplies by the cofactor to land in the
order-p subgroup; the first counter that yields a non-identity point wins.
"""

from __future__ import annotations

import hashlib

from ..errors import SerializationError
from .base import G0Element, G1Element, PairingContext
from .kernel import load_kernel
from .params import CURVES, CurveParams

_UNCOMPRESSED = 0x04
_INFINITY = 0x00


def expand_to_int(label: bytes, ctr: int, nbytes: int) -> int:
    """Concatenate SHA-256 blocks until nbytes are available; big-endian int."""
    out = b""
    j = 0
    while len(out) < nbytes:
        out += hashlib.sha256(
            label + b"\x00" + ctr.to_bytes(4, "big") + j.to_bytes(4, "big")
        ).digest()
        j += 1
    return int.from_bytes(out[:nbytes], "big")


class SupersingularContext(PairingContext):
    """Pairing context over one of the embedded curve parameter sets."""

    def __init__(self, curve: str = "ss1536", kernel: str | None = None):
        try:
            params: CurveParams = CURVES[curve]
        except KeyError:
            raise ValueError("unknown curve %r (have: %s)"
                             % (curve, ", ".join(sorted(CURVES)))) from None
        self.params = params
        self.kernel = load_kernel(params.q, params.p, params.h, prefer=kernel)
        self.backend_id = curve
        self.tag = 0x02 if curve == "ss512" else 0x03
        super().__init__(params.p)

    # -- algebra ---------------------------------------------------------

    def _g0_generator(self):
        return (self.params.gx, self.params.gy)

    def _g0_identity(self):
        return None

    def _g0_mul(self, a, b):
        return self.kernel.g0_add(a, b)

    def _g0_exp(self, a, k):
        return self.kernel.g0_mul(a, k)

    def _g0_inv(self, a):
        return self.kernel.g0_neg(a)

    def _g0_is_identity(self, a):
        return a is None

    def _gt_identity(self):
        return (1, 0)

    def _gt_mul(self, a, b):
        return self.kernel.gt_mul(a, b)

    def _gt_exp(self, a, k):
        return self.kernel.gt_exp(a, k)

    def _gt_inv(self, a):
        return self.kernel.gt_inv(a)

    def _gt_is_identity(self, a):
        return a == (1, 0)

    def _pair_raw(self, a, b):
        return self.kernel.pair(a, b)

    def _hash_to_g0_raw(self, data: bytes):
        nbytes = self.params.field_bytes + 16
        for ctr in range(256):
            x = expand_to_int(data, ctr, nbytes) % self.params.q
            y = self.kernel.solve_y(x)
            if y is None:
                continue
            point = self.kernel.clear_cofactor((x, y))
            if point is not None:
                return point
        raise RuntimeError("hash-to-group failed after 256 counters")

    def describe_element(self, v, kind):
        if kind == "G0":
            return "infinity" if v is None else "(0x%x..., ...)" % (v[0] >> max(0, v[0].bit_length() - 32),)
        return "fq2(0x%x..., ...)" % (v[0] >> max(0, v[0].bit_length() - 32),)

    # -- serialization ---------------------------------------------------

    def descriptor(self) -> bytes:
        return bytes([self.tag]) + self.params.name.encode()

    def g0_to_bytes(self, el) -> bytes:
        if el.v is None:
            return bytes([_INFINITY])
        fb = self.params.field_bytes
        x, y = el.v
        return bytes([_UNCOMPRESSED]) + x.to_bytes(fb, "big") + y.to_bytes(fb, "big")

    def g0_from_bytes(self, payload, validate=True):
        fb = self.params.field_bytes
        if len(payload) == 1 and payload[0] == _INFINITY:
            return G0Element(self, None)
        if len(payload) != 1 + 2 * fb or payload[0] != _UNCOMPRESSED:
            raise SerializationError("malformed curve point")
        x = int.from_bytes(payload[1:1 + fb], "big")
        y = int.from_bytes(payload[1 + fb:], "big")
        point = (x, y)
        if validate:
            if not self.kernel.g0_is_on_curve(point):
                raise SerializationError("point not on curve")
            if not self.kernel.in_subgroup(point):
                raise SerializationError("point outside the prime-order subgroup")
        return G0Element(self, point)

    def gt_to_bytes(self, el) -> bytes:
        fb = self.params.field_bytes
        a, b = el.v
        return a.to_bytes(fb, "big") + b.to_bytes(fb, "big")

    def gt_from_bytes(self, payload, validate=True):
        fb = self.params.field_bytes
        if len(payload) != 2 * fb:
            raise SerializationError("malformed target-group element")
        u = (int.from_bytes(payload[:fb], "big"), int.from_bytes(payload[fb:], "big"))
        if validate and not self.kernel.gt_is_valid(u):
            raise SerializationError("element outside mu_p")
        return G1Element(self, u)
