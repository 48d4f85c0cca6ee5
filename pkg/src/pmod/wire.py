"""Binary wire format shared by every serialized artifact.

Artifacts are a fixed 5-byte header (4-byte magic + version) followed by a
flat sequence of tagged entries:

    [kind:1][backend:1][length:4 big-endian][payload]

Kinds: 0x00 group descriptor, 0x01 G0 element, 0x02 G1 element, 0x03 scalar
(32-byte big-endian residue), 0x04 opaque blob (JSON or nested records).
The uniform framing lets element_census() count group elements in any
artifact without understanding its layout, which is how the storage
accounting is verified against serialized bytes rather than in-memory
structures.

Public keys carry their group descriptor in a G0-kind slot: the group
description is one of the public key's counted components, so it occupies
(and is tallied as) a G0 position.  All other artifacts carry the
descriptor under kind 0x00, which the census ignores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SerializationError

WIRE_VERSION = 1

KIND_DESCRIPTOR = 0x00
KIND_G0 = 0x01
KIND_G1 = 0x02
KIND_SCALAR = 0x03
KIND_BLOB = 0x04

_KNOWN_KINDS = frozenset(
    (KIND_DESCRIPTOR, KIND_G0, KIND_G1, KIND_SCALAR, KIND_BLOB)
)

SCALAR_BYTES = 32
_MAX_ENTRY = 1 << 30

MAGIC_PUBLIC_KEY = b"PMPK"
MAGIC_MASTER_KEY = b"PMMK"
MAGIC_PRIVATE_KEY = b"PMSK"
MAGIC_CIPHERTEXT = b"PMCT"
MAGIC_BUNDLE = b"PMBD"

_MAGICS = frozenset(
    (MAGIC_PUBLIC_KEY, MAGIC_MASTER_KEY, MAGIC_PRIVATE_KEY,
     MAGIC_CIPHERTEXT, MAGIC_BUNDLE)
)


def canonical_json(obj) -> bytes:
    """Deterministic JSON encoding (sorted keys, no whitespace)."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


class Writer:
    """Appends header and entries; getvalue() yields the artifact bytes."""

    def __init__(self, magic: bytes | None = None):
        self._parts: list[bytes] = []
        if magic is not None:
            if magic not in _MAGICS:
                raise ValueError("unknown artifact magic %r" % (magic,))
            self._parts.append(magic + bytes([WIRE_VERSION]))

    def put_entry(self, kind: int, backend: int, payload: bytes) -> None:
        if len(payload) > _MAX_ENTRY:
            raise SerializationError("entry payload too large")
        self._parts.append(
            bytes([kind, backend]) + len(payload).to_bytes(4, "big") + payload
        )

    def put_descriptor(self, ctx, *, as_g0_slot: bool = False) -> None:
        kind = KIND_G0 if as_g0_slot else KIND_DESCRIPTOR
        self.put_entry(kind, ctx.tag, ctx.descriptor())

    def put_g0(self, el) -> None:
        self.put_entry(KIND_G0, el.ctx.tag, el.ctx.g0_to_bytes(el))

    def put_g1(self, el) -> None:
        self.put_entry(KIND_G1, el.ctx.tag, el.ctx.gt_to_bytes(el))

    def put_scalar(self, value: int) -> None:
        if not 0 <= value < (1 << (8 * SCALAR_BYTES)):
            raise SerializationError("scalar out of range")
        self.put_entry(KIND_SCALAR, 0, value.to_bytes(SCALAR_BYTES, "big"))

    def put_blob(self, data: bytes) -> None:
        self.put_entry(KIND_BLOB, 0, data)

    def put_json(self, obj) -> None:
        self.put_blob(canonical_json(obj))

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    """Strict sequential reader; every anomaly is a SerializationError."""

    def __init__(self, data: bytes, magic: bytes | None = None):
        self._data = data
        self._pos = 0
        if magic is not None:
            head = self._take(5)
            if head[:4] != magic:
                raise SerializationError(
                    "bad magic: expected %r, found %r" % (magic, head[:4])
                )
            if head[4] != WIRE_VERSION:
                raise SerializationError(
                    "unsupported format version %d" % head[4]
                )

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise SerializationError("truncated artifact")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def entry(self, expected_kind: int) -> tuple[int, bytes]:
        head = self._take(6)
        kind, backend = head[0], head[1]
        if kind != expected_kind:
            raise SerializationError(
                "expected entry kind %#04x, found %#04x" % (expected_kind, kind)
            )
        length = int.from_bytes(head[2:6], "big")
        if length > _MAX_ENTRY:
            raise SerializationError("entry payload too large")
        return backend, self._take(length)

    def descriptor(self, *, as_g0_slot: bool = False) -> bytes:
        kind = KIND_G0 if as_g0_slot else KIND_DESCRIPTOR
        backend, payload = self.entry(kind)
        if not payload or payload[0] != backend:
            raise SerializationError("descriptor does not match its backend tag")
        return payload

    def g0(self, ctx):
        backend, payload = self.entry(KIND_G0)
        if backend != ctx.tag:
            raise SerializationError("element backend tag mismatch")
        return ctx.g0_from_bytes(payload)

    def g1(self, ctx):
        backend, payload = self.entry(KIND_G1)
        if backend != ctx.tag:
            raise SerializationError("element backend tag mismatch")
        return ctx.gt_from_bytes(payload)

    def scalar(self) -> int:
        _, payload = self.entry(KIND_SCALAR)
        if len(payload) != SCALAR_BYTES:
            raise SerializationError("scalar payload must be 32 bytes")
        return int.from_bytes(payload, "big")

    def blob(self) -> bytes:
        _, payload = self.entry(KIND_BLOB)
        return payload

    def json_blob(self):
        raw = self.blob()
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SerializationError("malformed JSON blob: %s" % exc) from None

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise SerializationError(
                "%d trailing bytes after artifact" % (len(self._data) - self._pos)
            )


@dataclass(frozen=True)
class ElementCounts:
    g0: int = 0
    g1: int = 0
    zp: int = 0

    def __add__(self, other: "ElementCounts") -> "ElementCounts":
        return ElementCounts(
            self.g0 + other.g0, self.g1 + other.g1, self.zp + other.zp
        )


def element_census(data: bytes) -> ElementCounts:
    """Count G0/G1/Zp entries in an artifact by scanning its framing.

    Descriptor and blob entries are structural and not counted; nested
    artifacts inside blobs are not entered (census them separately).
    """
    pos = 0
    if len(data) >= 5 and data[:4] in _MAGICS:
        pos = 5
    g0 = g1 = zp = 0
    while pos < len(data):
        if pos + 6 > len(data):
            raise SerializationError("truncated entry header")
        kind = data[pos]
        if kind not in _KNOWN_KINDS:
            raise SerializationError("unknown entry kind %#04x" % kind)
        length = int.from_bytes(data[pos + 2 : pos + 6], "big")
        pos += 6
        if pos + length > len(data):
            raise SerializationError("truncated entry payload")
        pos += length
        if kind == KIND_G0:
            g0 += 1
        elif kind == KIND_G1:
            g1 += 1
        elif kind == KIND_SCALAR:
            zp += 1
    return ElementCounts(g0, g1, zp)
