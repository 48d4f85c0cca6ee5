"""Bilinear group contract shared by the transparent and production backends.

A PairingContext owns a symmetric pairing setting: a cyclic group G0 of prime
order p with generator g, the target group G1, and e: G0 x G0 -> G1 with
e(g, g) generating G1.  Elements are immutable handles bound to their context;
mixing contexts raises BackendMismatch.

Operation counting: every G0/G1 exponentiation and multiplication increments
the context's counters by one (division counts as one multiplication), each
pairing evaluation increments the pairing counter, and hash-to-group calls are
tracked in their own bucket, deliberately excluded from the G0 total.
Counters are the only mutable state on a context and are lock-guarded.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from ..errors import BackendMismatch
from ..rng import RandomSource


@dataclass(frozen=True)
class OpCounters:
    """Snapshot of a context's operation counts."""

    f_g0: int = 0      # G0 exponentiations + multiplications
    f_g1: int = 0      # G1 exponentiations + multiplications (and divisions)
    pairings: int = 0
    hashes: int = 0    # hash_to_g0 calls; never part of f_g0

    def __sub__(self, other: "OpCounters") -> "OpCounters":
        return OpCounters(
            self.f_g0 - other.f_g0,
            self.f_g1 - other.f_g1,
            self.pairings - other.pairings,
            self.hashes - other.hashes,
        )


class G0Element:
    """Immutable element of the source group."""

    __slots__ = ("ctx", "v")

    def __init__(self, ctx: "PairingContext", v):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "v", v)

    def __setattr__(self, *_):
        raise AttributeError("group elements are immutable")

    def __mul__(self, other: "G0Element") -> "G0Element":
        self.ctx._require_same(other, G0Element)
        self.ctx._tick("f_g0")
        return G0Element(self.ctx, self.ctx._g0_mul(self.v, other.v))

    def __truediv__(self, other: "G0Element") -> "G0Element":
        self.ctx._require_same(other, G0Element)
        self.ctx._tick("f_g0")
        return G0Element(self.ctx, self.ctx._g0_mul(self.v, self.ctx._g0_inv(other.v)))

    def __pow__(self, k: int) -> "G0Element":
        self.ctx._tick("f_g0")
        return G0Element(self.ctx, self.ctx._g0_exp(self.v, k % self.ctx.order))

    def inverse(self) -> "G0Element":
        return G0Element(self.ctx, self.ctx._g0_inv(self.v))

    def is_identity(self) -> bool:
        return self.ctx._g0_is_identity(self.v)

    @property
    def known_exponent(self) -> int:
        """Discrete log relative to g.  Transparent backend only."""
        return self.ctx._reveal(self.v, "G0")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, G0Element)
            and other.ctx is self.ctx
            and other.v == self.v
        )

    def __hash__(self):
        return hash((id(self.ctx), "G0", self.v))

    def __repr__(self):
        return "G0Element(%s)" % (self.ctx.describe_element(self.v, "G0"),)


class G1Element:
    """Immutable element of the target group."""

    __slots__ = ("ctx", "v")

    def __init__(self, ctx: "PairingContext", v):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "v", v)

    def __setattr__(self, *_):
        raise AttributeError("group elements are immutable")

    def __mul__(self, other: "G1Element") -> "G1Element":
        self.ctx._require_same(other, G1Element)
        self.ctx._tick("f_g1")
        return G1Element(self.ctx, self.ctx._gt_mul(self.v, other.v))

    def __truediv__(self, other: "G1Element") -> "G1Element":
        self.ctx._require_same(other, G1Element)
        self.ctx._tick("f_g1")
        return G1Element(self.ctx, self.ctx._gt_mul(self.v, self.ctx._gt_inv(other.v)))

    def __pow__(self, k: int) -> "G1Element":
        self.ctx._tick("f_g1")
        return G1Element(self.ctx, self.ctx._gt_exp(self.v, k % self.ctx.order))

    def inverse(self) -> "G1Element":
        return G1Element(self.ctx, self.ctx._gt_inv(self.v))

    def is_identity(self) -> bool:
        return self.ctx._gt_is_identity(self.v)

    @property
    def known_exponent(self) -> int:
        """Discrete log relative to e(g, g).  Transparent backend only."""
        return self.ctx._reveal(self.v, "G1")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, G1Element)
            and other.ctx is self.ctx
            and other.v == self.v
        )

    def __hash__(self):
        return hash((id(self.ctx), "G1", self.v))

    def __repr__(self):
        return "G1Element(%s)" % (self.ctx.describe_element(self.v, "G1"),)


class PairingContext:
    """Backend-independent face of a symmetric bilinear group."""

    backend_id: str = "?"
    tag: int = 0  # one-byte backend tag used in serialized elements

    def __init__(self, order: int):
        self.order = order
        self._lock = threading.Lock()
        self._f_g0 = 0
        self._f_g1 = 0
        self._pairings = 0
        self._hashes = 0
        self._h2g_cache: dict = {}

    # -- counters ------------------------------------------------------

    def _tick(self, bucket: str, n: int = 1):
        with self._lock:
            if bucket == "f_g0":
                self._f_g0 += n
            elif bucket == "f_g1":
                self._f_g1 += n
            elif bucket == "pairings":
                self._pairings += n
            else:
                self._hashes += n

    def counters(self) -> OpCounters:
        with self._lock:
            return OpCounters(self._f_g0, self._f_g1, self._pairings, self._hashes)

    def reset_counters(self):
        with self._lock:
            self._f_g0 = self._f_g1 = self._pairings = self._hashes = 0

    # -- shared API ----------------------------------------------------

    def _require_same(self, other, cls):
        if not isinstance(other, cls) or other.ctx is not self:
            raise BackendMismatch(
                "cannot combine %r with element of %r" % (self.backend_id, other)
            )

    def generator(self) -> G0Element:
        return G0Element(self, self._g0_generator())

    def gt_generator(self) -> G1Element:
        """e(g, g); computed once, no counter charge."""
        v = getattr(self, "_gt_gen_v", None)
        if v is None:
            v = self._pair_raw(self._g0_generator(), self._g0_generator())
            self._gt_gen_v = v
        return G1Element(self, v)

    def identity_g0(self) -> G0Element:
        return G0Element(self, self._g0_identity())

    def identity_gt(self) -> G1Element:
        return G1Element(self, self._gt_identity())

    def random_scalar(self, rng: RandomSource, nonzero: bool = False) -> int:
        s = rng.randbelow(self.order)
        while nonzero and s == 0:
            s = rng.randbelow(self.order)
        return s

    def random_gt(self, rng: RandomSource) -> G1Element:
        """Uniform element of G1 (a fresh KEM payload); costs one G1 op."""
        return self.gt_generator() ** self.random_scalar(rng)

    def pair(self, a: G0Element, b: G0Element) -> G1Element:
        self._require_same(a, G0Element)
        self._require_same(b, G0Element)
        self._tick("pairings")
        return G1Element(self, self._pair_raw(a.v, b.v))

    def hash_to_g0(self, label) -> G0Element:
        """Deterministic map from a label to G0; cached, never counted as f_g0."""
        data = label.encode() if isinstance(label, str) else bytes(label)
        self._tick("hashes")
        v = self._h2g_cache.get(data)
        if v is None:
            v = self._hash_to_g0_raw(data)
            if len(self._h2g_cache) >= 4096:
                self._h2g_cache.clear()
            self._h2g_cache[data] = v
        return G0Element(self, v)

    # -- hooks every backend provides -----------------------------------

    def descriptor(self) -> bytes:
        raise NotImplementedError

    def describe_element(self, v, kind: str) -> str:
        return repr(v)

    def _reveal(self, v, kind: str) -> int:
        raise NotImplementedError(
            "%s does not expose discrete logs" % (self.backend_id,)
        )

    def _g0_generator(self):
        raise NotImplementedError

    def _g0_identity(self):
        raise NotImplementedError

    def _g0_mul(self, a, b):
        raise NotImplementedError

    def _g0_exp(self, a, k: int):
        raise NotImplementedError

    def _g0_inv(self, a):
        raise NotImplementedError

    def _g0_is_identity(self, a) -> bool:
        raise NotImplementedError

    def _gt_identity(self):
        raise NotImplementedError

    def _gt_mul(self, a, b):
        raise NotImplementedError

    def _gt_exp(self, a, k: int):
        raise NotImplementedError

    def _gt_inv(self, a):
        raise NotImplementedError

    def _gt_is_identity(self, a) -> bool:
        raise NotImplementedError

    def _pair_raw(self, a, b):
        raise NotImplementedError

    def _hash_to_g0_raw(self, data: bytes):
        raise NotImplementedError

    # -- element serialization ------------------------------------------

    def g0_to_bytes(self, el: G0Element) -> bytes:
        raise NotImplementedError

    def g0_from_bytes(self, payload: bytes, validate: bool = True) -> G0Element:
        raise NotImplementedError

    def gt_to_bytes(self, el: G1Element) -> bytes:
        raise NotImplementedError

    def gt_from_bytes(self, payload: bytes, validate: bool = True) -> G1Element:
        raise NotImplementedError
