"""One-way chain of level keys.

Level 1 holds a random 32-byte root; each deeper level is the SHA-256 of the
one above (the bare hash, no domain separator, so the chain is bit-exactly
reproducible from the root).  Knowing sk_i therefore yields sk_{i+1}..sk_k
but nothing above i, which is the whole access-control story: derivation
only ever runs downward, and chain_from refuses to go up.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import ParameterError
from .rng import default_source

KEY_BYTES = 32


@dataclass(frozen=True)
class LevelKey:
    level: int
    key_bytes: bytes

    def __post_init__(self):
        if self.level < 1:
            raise ParameterError("level must be at least 1")
        if not isinstance(self.key_bytes, bytes) or len(self.key_bytes) != KEY_BYTES:
            raise ParameterError("level key must be exactly %d bytes" % KEY_BYTES)

    def __repr__(self):
        return "LevelKey(level=%d, key_bytes=<%d bytes>)" % (self.level, KEY_BYTES)


def generate_root(rng=None) -> LevelKey:
    rng = rng if rng is not None else default_source()
    return LevelKey(1, rng.randbytes(KEY_BYTES))


def chain_from(key: LevelKey, target_level: int) -> LevelKey:
    """Derive the key for target_level by hashing downward from `key`.

    chain_from(x, x.level) is x itself; anything above x.level is refused.
    """
    if target_level < key.level:
        raise ParameterError(
            "cannot derive level %d from level %d: the chain is one-way downward"
            % (target_level, key.level)
        )
    material = key.key_bytes
    for _ in range(target_level - key.level):
        material = hashlib.sha256(material).digest()
    return LevelKey(target_level, material)
