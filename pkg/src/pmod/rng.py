"""Random sources.

All key material and blinding factors in this package are drawn through a
RandomSource so that tests and the CLI's insecure --seed mode can make every
artifact reproducible.  Production paths use SystemRandomSource (os.urandom);
SeededRandomSource wraps a deterministic Mersenne Twister and must never be
used for real keys.
"""

from __future__ import annotations

import os
import random
from typing import Protocol, runtime_checkable


@runtime_checkable
class RandomSource(Protocol):
    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        ...

    def randbytes(self, n: int) -> bytes:
        """n uniform bytes."""
        ...


class SystemRandomSource:
    """Cryptographically secure source backed by the OS."""

    def __init__(self):
        self._sr = random.SystemRandom()

    def randbelow(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self._sr.randrange(bound)

    def randbytes(self, n: int) -> bytes:
        return os.urandom(n)


class SeededRandomSource:
    """Deterministic source for tests and explicitly-insecure seeded runs."""

    def __init__(self, seed):
        self._r = random.Random(seed)

    def randbelow(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self._r.randrange(bound)

    def randbytes(self, n: int) -> bytes:
        return self._r.randbytes(n)


class ScriptedRandomSource:
    """Replays a fixed script of values; tests use it to pin every random
    draw in a trace (e.g. force specific exponents).  randbelow() pops the
    next scripted integer, randbytes() the next scripted byte string; an
    exhausted or out-of-range script is a test bug and raises."""

    def __init__(self, values=(), byte_values=()):
        self._values = list(values)
        self._bytes = list(byte_values)

    def randbelow(self, bound: int) -> int:
        if not self._values:
            raise IndexError("scripted random source exhausted")
        v = self._values.pop(0)
        if not 0 <= v < bound:
            raise ValueError("scripted value %d outside [0, %d)" % (v, bound))
        return v

    def randbytes(self, n: int) -> bytes:
        if not self._bytes:
            raise IndexError("scripted random source exhausted (bytes)")
        b = self._bytes.pop(0)
        if len(b) != n:
            raise ValueError("scripted bytes have length %d, need %d" % (len(b), n))
        return b


def default_source() -> RandomSource:
    return SystemRandomSource()
