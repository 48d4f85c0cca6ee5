#!/usr/bin/env python3
"""Regenerate the supersingular curve parameter sets embedded in pmod.group.params.

The curve family is y^2 = x^3 + x over F_q with q = h*p - 1 prime, q = 3 mod 4,
so the curve is supersingular with #E(F_q) = q + 1 = h*p, embedding degree 2,
and carries a distortion map (x, y) -> (-x, iy) into E(F_{q^2}).  G0 is the
order-p subgroup; the search is deterministic from the set's seed label, so
running this script always reproduces the shipped constants.

Usage: python3 scripts/gen_params.py   (prints a params.py body to stdout)
"""

import hashlib
import random

import gmpy2


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


def find_p(bits_p: int) -> int:
    """Solinas-form group order 2^(bits_p-1) + 2^b + 1: sparse binary expansion
    keeps the Miller loop short on add-steps.  Deterministic: largest such b."""
    a = bits_p - 1
    for b in range(a - 1, 1, -1):
        p = (1 << a) + (1 << b) + 1
        if gmpy2.is_prime(p, 50):
            return int(p)
    raise RuntimeError("no Solinas prime at this size")


def find_field(p: int, bits_q: int, seed: str):
    """Random cofactor h = 0 mod 4 with q = h*p - 1 prime of bits_q bits.

    h is drawn from a seeded rng (not minimized) so q has no special form."""
    r = random.Random(seed + "/cofactor")
    bits_h = bits_q - p.bit_length() + 1
    while True:
        h = r.getrandbits(bits_h) | (1 << (bits_h - 1))
        h += (-h) % 4
        q = h * p - 1
        if q.bit_length() != bits_q:
            continue
        if q % 4 == 3 and h % p != 0 and gmpy2.is_prime(q, 50):
            return h, q


def sqrt_q3mod4(v: int, q: int):
    y = pow(v, (q + 1) // 4, q)
    return y if (y * y) % q == v % q else None


def ec_add(P, Q, q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return None
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    return (x3, (lam * (x1 - x3) - y1) % q)


def ec_mul(P, k, q):
    R = None
    A = P
    while k:
        if k & 1:
            R = ec_add(R, A, q)
        A = ec_add(A, A, q)
        k >>= 1
    return R


def find_generator(q: int, h: int, p: int, seed: str):
    label = (seed + "/generator").encode()
    nbytes = (q.bit_length() + 7) // 8 + 16
    for ctr in range(1000):
        x = expand_to_int(label, ctr, nbytes) % q
        v = (x * x * x + x) % q
        if v == 0:
            continue
        y = sqrt_q3mod4(v, q)
        if y is None:
            continue
        y = min(y, q - y)
        G = ec_mul((x, y), h, q)
        if G is None:
            continue
        assert ec_mul(G, p, q) is None, "generator order must divide p"
        return G
    raise RuntimeError("generator search exhausted")


def make_set(name: str, bits_q: int, bits_p: int):
    seed = "pmod/%s/v1" % name
    p = find_p(bits_p)
    h, q = find_field(p, bits_q, seed)
    gx, gy = find_generator(q, h, p, seed)
    assert (q + 1) % p == 0 and (q + 1) % (p * p) != 0
    assert q % 4 == 3 and gmpy2.is_prime(p, 50) and gmpy2.is_prime(q, 50)
    assert (gy * gy) % q == (gx * gx * gx + gx) % q
    print('    "%s": CurveParams(' % name)
    print('        name="%s",' % name)
    print("        q=0x%x," % q)
    print("        p=0x%x,"% p)
    print("        h=0x%x," % h)
    print("        gx=0x%x," % gx)
    print("        gy=0x%x," % gy)
    print("    ),")


if __name__ == "__main__":
    make_set("ss512", 512, 160)
    make_set("ss1536", 1536, 256)
