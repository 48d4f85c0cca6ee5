"""End-to-end leveled encryption: one file in, one self-contained bundle out.

Encryption walks the hierarchy spec top-down: partition the file, derive the
level-key chain from a fresh root, seal part i under sk_i, and for every
level encapsulate a fresh target-group element z_i under that level's access
tree, wrapping sk_i with AES-GCM under SHA-256(z_i bytes || level).  Each
level is therefore self-contained: satisfying tree i alone yields sk_i, and
the hash chain extends that to every deeper level.

Decryption resolves the user's privilege as the smallest satisfied level
index — a pure policy scan, no pairing work — then runs a single ABE
decryption there and walks the chain down for the rest.

Random draws, in order, for reproducible bundles: 32 root-key bytes, then
per level: one scalar for z_i, the ABE encrypt draws, 12 wrap-nonce bytes,
12 part-nonce bytes.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import cached_property

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .abe import AbeCiphertext, PrivateKey, PublicKey, decrypt as abe_decrypt, encrypt as abe_encrypt
from .errors import (
    IntegrityError,
    NoLevelSatisfied,
    ParameterError,
    SerializationError,
)
from .group.base import G1Element, PairingContext
from .keychain import KEY_BYTES, LevelKey, chain_from, generate_root
from .partitioner import (
    EncryptedPart,
    PartitionPlan,
    decrypt_part,
    encrypt_part,
    merge_parts,
    partition,
)
from .policy import AccessTree, parse_policy, satisfies
from .rng import default_source
from .wire import MAGIC_BUNDLE, Reader, Writer, canonical_json

_WRAP_NONCE = 12


# --------------------------------------------------------------------------
# hierarchy spec (JSON or a small TOML subset)

@dataclass(frozen=True)
class LevelPolicy:
    index: int
    policy: str
    label: str = ""

    @cached_property
    def tree(self) -> AccessTree:
        return parse_policy(self.policy, level_hint=self.index)


@dataclass(frozen=True)
class HierarchySpec:
    levels: tuple
    plan: PartitionPlan

    def __post_init__(self):
        if [lp.index for lp in self.levels] != list(range(1, len(self.levels) + 1)):
            raise ParameterError("level indices must run 1..k in order")
        if len(self.levels) != self.plan.k:
            raise ParameterError(
                "%d levels but the partition plan has %d groups"
                % (len(self.levels), self.plan.k)
            )
        for lp in self.levels:
            lp.tree  # parse now so a bad policy fails fast

    @property
    def k(self) -> int:
        return len(self.levels)

    def trees(self) -> tuple:
        return tuple(lp.tree for lp in self.levels)

    def to_json(self) -> dict:
        return {
            "levels": [
                {"index": lp.index, "policy": lp.policy, "label": lp.label}
                for lp in self.levels
            ],
            "partition": self.plan.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "HierarchySpec":
        if not isinstance(obj, dict) or "levels" not in obj or "partition" not in obj:
            raise SerializationError("spec needs 'levels' and 'partition'")
        raw_levels = obj["levels"]
        if not isinstance(raw_levels, list) or not raw_levels:
            raise SerializationError("'levels' must be a non-empty list")
        levels = []
        for entry in raw_levels:
            if not isinstance(entry, dict):
                raise SerializationError("level entries must be objects")
            levels.append(
                LevelPolicy(
                    entry.get("index"),
                    entry.get("policy"),
                    entry.get("label", ""),
                )
            )
        plan = PartitionPlan.from_json(obj["partition"])
        try:
            return cls(tuple(levels), plan)
        except (ParameterError, TypeError) as exc:
            raise SerializationError("invalid hierarchy spec: %s" % exc) from None

    def spec_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_json())).hexdigest()

    @classmethod
    def loads(cls, text) -> "HierarchySpec":
        """Parse spec text, accepting JSON or the TOML subset."""
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SerializationError("malformed JSON spec: %s" % exc) from None
        else:
            obj = _parse_toml_subset(text)
        return cls.from_json(obj)

    @classmethod
    def load(cls, path) -> "HierarchySpec":
        with open(path, "rb") as fh:
            return cls.loads(fh.read())


def _parse_toml_subset(text: str) -> dict:
    """Just enough TOML for spec files: [table], [[array-of-tables]],
    key = string | integer | boolean | single-line (nested) array."""
    root: dict = {}
    current: dict = root
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[["):
            if not line.endswith("]]"):
                raise SerializationError("line %d: unterminated table header" % lineno)
            name = line[2:-2].strip()
            slot = root.setdefault(name, [])
            if not isinstance(slot, list):
                raise SerializationError("line %d: %r is not a table array" % (lineno, name))
            current = {}
            slot.append(current)
        elif line.startswith("["):
            if not line.endswith("]"):
                raise SerializationError("line %d: unterminated table header" % lineno)
            name = line[1:-1].strip()
            slot = root.setdefault(name, {})
            if not isinstance(slot, dict):
                raise SerializationError("line %d: %r is not a table" % (lineno, name))
            current = slot
        else:
            key, eq, rest = line.partition("=")
            if not eq:
                raise SerializationError("line %d: expected key = value" % lineno)
            value, end = _toml_value(rest.strip(), 0, lineno)
            if rest.strip()[end:].strip():
                raise SerializationError("line %d: trailing characters" % lineno)
            current[key.strip()] = value
    return root


def _toml_value(s: str, i: int, lineno: int):
    if i >= len(s):
        raise SerializationError("line %d: missing value" % lineno)
    ch = s[i]
    if ch == '"':
        out = []
        i += 1
        while i < len(s):
            c = s[i]
            if c == "\\":
                if i + 1 >= len(s):
                    break
                esc = s[i + 1]
                out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                i += 2
                continue
            if c == '"':
                return "".join(out), i + 1
            out.append(c)
            i += 1
        raise SerializationError("line %d: unterminated string" % lineno)
    if ch == "[":
        items = []
        i += 1
        while True:
            while i < len(s) and s[i] in " \t":
                i += 1
            if i >= len(s):
                raise SerializationError("line %d: unterminated array" % lineno)
            if s[i] == "]":
                return items, i + 1
            value, i = _toml_value(s, i, lineno)
            items.append(value)
            while i < len(s) and s[i] in " \t":
                i += 1
            if i < len(s) and s[i] == ",":
                i += 1
    m = []
    while i < len(s) and s[i] not in ",] \t#":
        m.append(s[i])
        i += 1
    token = "".join(m)
    if token == "true":
        return True, i
    if token == "false":
        return False, i
    try:
        return int(token), i
    except ValueError:
        raise SerializationError("line %d: unsupported value %r" % (lineno, token)) from None


# --------------------------------------------------------------------------
# bundles

@dataclass(frozen=True)
class LevelRecord:
    level: int
    kem_ct: AbeCiphertext
    wrapped_key: bytes
    part: EncryptedPart


@dataclass(frozen=True)
class LevelBundle:
    manifest: dict
    records: tuple

    def __post_init__(self):
        if self.manifest.get("k") != len(self.records):
            raise ParameterError("manifest level count does not match records")
        for i, record in enumerate(self.records, start=1):
            if record.level != i or record.part.level != i:
                raise ParameterError("records must be ordered by level 1..k")

    @property
    def k(self) -> int:
        return len(self.records)

    @cached_property
    def plan(self) -> PartitionPlan:
        return PartitionPlan.from_json(self.manifest.get("partition"))

    def to_bytes(self) -> bytes:
        w = Writer(MAGIC_BUNDLE)
        w.put_json(self.manifest)
        for record in self.records:
            w.put_blob(record.kem_ct.to_bytes())
            w.put_blob(record.wrapped_key)
            w.put_blob(record.part.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, ctx: PairingContext | None = None) -> "LevelBundle":
        r = Reader(data, MAGIC_BUNDLE)
        manifest = r.json_blob()
        if not isinstance(manifest, dict) or not isinstance(manifest.get("k"), int):
            raise SerializationError("malformed bundle manifest")
        records = []
        for level in range(1, manifest["k"] + 1):
            kem_ct = AbeCiphertext.from_bytes(r.blob(), ctx)
            wrapped = r.blob()
            part = EncryptedPart.from_bytes(r.blob())
            records.append(LevelRecord(level, kem_ct, wrapped, part))
        r.expect_end()
        try:
            return cls(manifest, tuple(records))
        except ParameterError as exc:
            raise SerializationError(str(exc)) from None


@dataclass(frozen=True)
class DecryptionResult:
    achieved_level: int
    parts: dict  # level -> plaintext part bytes

    def merge(self, plan: PartitionPlan) -> bytes:
        return merge_parts(self.parts, plan)


# --------------------------------------------------------------------------
# key wrapping

def _wrap_key_bytes(z: G1Element, level: int) -> bytes:
    material = z.ctx.gt_to_bytes(z) + level.to_bytes(4, "big")
    return hashlib.sha256(material).digest()


def _wrap_aad(level: int) -> bytes:
    return b"PMWK" + level.to_bytes(4, "big")


def _wrap(sk: LevelKey, z: G1Element, rng) -> bytes:
    nonce = rng.randbytes(_WRAP_NONCE)
    sealed = AESGCM(_wrap_key_bytes(z, sk.level)).encrypt(
        nonce, sk.key_bytes, _wrap_aad(sk.level)
    )
    return nonce + sealed


def _unwrap(wrapped: bytes, z: G1Element, level: int) -> LevelKey:
    if len(wrapped) != _WRAP_NONCE + KEY_BYTES + 16:
        raise SerializationError("wrapped level key has the wrong length")
    try:
        key_bytes = AESGCM(_wrap_key_bytes(z, level)).decrypt(
            wrapped[:_WRAP_NONCE], wrapped[_WRAP_NONCE:], _wrap_aad(level)
        )
    except InvalidTag:
        raise IntegrityError("level %d key unwrap failed authentication" % level) from None
    return LevelKey(level, key_bytes)


# --------------------------------------------------------------------------
# the two end-to-end operations

def pmod_encrypt(
    pk: PublicKey,
    file_bytes: bytes,
    spec: HierarchySpec,
    rng=None,
    timestamp: int | None = None,
) -> LevelBundle:
    rng = rng if rng is not None else default_source()
    ctx = pk.ctx
    parts = partition(file_bytes, spec.plan)
    root = generate_root(rng)
    created = datetime.fromtimestamp(
        int(time.time()) if timestamp is None else int(timestamp), timezone.utc
    ).strftime("%Y-%m-%dT%H:%M:%SZ")
    manifest = {
        "k": spec.k,
        "backend": ctx.backend_id,
        "spec_hash": spec.spec_hash(),
        "created_at": created,
        "partition": spec.plan.to_json(),
        "labels": [lp.label for lp in spec.levels],
    }
    records = []
    for level_policy, part in zip(spec.levels, parts):
        level = level_policy.index
        sk_i = chain_from(root, level)
        z = ctx.random_gt(rng)
        kem_ct = abe_encrypt(pk, z, level_policy.tree, rng)
        wrapped = _wrap(sk_i, z, rng)
        sealed_part = encrypt_part(part, sk_i, rng)
        records.append(LevelRecord(level, kem_ct, wrapped, sealed_part))
    return LevelBundle(manifest, tuple(records))


def pmod_decrypt(bundle: LevelBundle, sk: PrivateKey) -> DecryptionResult:
    """Resolve the highest privilege (= smallest satisfied level), run one
    ABE decryption there, then chain downward for the remaining parts."""
    chosen = None
    for record in bundle.records:
        if satisfies(record.kem_ct.tree, sk.attribute_set) is not None:
            chosen = record
            break
    if chosen is None:
        raise NoLevelSatisfied("no level's access tree is satisfied")
    z = abe_decrypt(chosen.kem_ct, sk)
    level_key = _unwrap(chosen.wrapped_key, z, chosen.level)
    parts = {}
    for record in bundle.records[chosen.level - 1 :]:
        parts[record.level] = decrypt_part(
            record.part, chain_from(level_key, record.level)
        )
    return DecryptionResult(chosen.level, parts)
