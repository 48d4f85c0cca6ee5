"""Sensitivity-ordered file partitioning plus per-level authenticated
encryption.

A tabular file is canonicalized (UTF-8, LF, minimal quoting) and split into
k parts, group 1 being the most sensitive.  Three plan modes cover the usual
shapes: the fields of a single record, clusters of whole records, or column
groups across all records.  Groups must tile the file in its own order
(columns left to right, rows top to bottom), which is what makes
partition -> merge the identity on canonical bytes.

Each part is then sealed with AES-256-GCM under its level key.  The level
index and a plaintext digest ride along as associated data, so a ciphertext
moved to a different level, or decrypted with any other chain key, fails
authentication rather than yielding bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from typing import Mapping

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import IntegrityError, ParameterError, PartitionError, SerializationError
from .keychain import LevelKey
from .rng import default_source

MODE_SINGLE_RECORD = "single_record_fields"
MODE_RECORD_CLUSTERS = "record_clusters"
MODE_COLUMN_GROUPS = "column_groups"
MODES = (MODE_SINGLE_RECORD, MODE_RECORD_CLUSTERS, MODE_COLUMN_GROUPS)

PART_VERSION = 1
NONCE_BYTES = 12
TAG_BYTES = 16
DIGEST_BYTES = 32


# --------------------------------------------------------------------------
# canonical CSV

def _parse_csv(data: bytes) -> tuple[list, list]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise PartitionError("input is not UTF-8: %s" % exc) from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise PartitionError("input has no header row")
    header, body = rows[0], rows[1:]
    width = len(header)
    if width == 0 or any(not name for name in header):
        raise PartitionError("header names must be non-empty")
    if len(set(header)) != width:
        raise PartitionError("duplicate column names in header")
    for i, row in enumerate(body):
        if len(row) != width:
            raise PartitionError(
                "row %d has %d fields, header has %d" % (i + 1, len(row), width)
            )
    return header, body


def _serialize_csv(header: list, body: list) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buf.getvalue().encode("utf-8")


def canonicalize_csv(data: bytes) -> bytes:
    """Re-serialize to the canonical byte form all round-trip guarantees
    are stated against."""
    return _serialize_csv(*_parse_csv(data))


# --------------------------------------------------------------------------
# partition plans

@dataclass(frozen=True)
class PartitionPlan:
    """k ordered groups; group 1 is the most sensitive.

    column modes: groups are tuples of column names, concatenating to the
    header left to right.  record_clusters: groups are (start, stop) row
    ranges, contiguous from row 0.  Coverage against a concrete file is
    checked at partition time.
    """

    mode: str
    groups: tuple

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError("unknown partition mode %r" % (self.mode,))
        if not self.groups:
            raise ParameterError("plan needs at least one group")
        if self.mode == MODE_RECORD_CLUSTERS:
            expected_start = 0
            for g in self.groups:
                if (
                    not isinstance(g, tuple)
                    or len(g) != 2
                    or not all(isinstance(v, int) for v in g)
                ):
                    raise ParameterError("row group must be a (start, stop) pair")
                start, stop = g
                if start != expected_start or stop <= start:
                    raise ParameterError(
                        "row ranges must be contiguous ascending from 0"
                    )
                expected_start = stop
        else:
            seen = set()
            for g in self.groups:
                if not isinstance(g, tuple) or not g:
                    raise ParameterError("column group must be a non-empty tuple")
                for name in g:
                    if not isinstance(name, str) or not name:
                        raise ParameterError("column names must be non-empty strings")
                    if name in seen:
                        raise ParameterError("column %r appears in two groups" % name)
                    seen.add(name)

    @property
    def k(self) -> int:
        return len(self.groups)

    def to_json(self) -> dict:
        return {"mode": self.mode, "groups": [list(g) for g in self.groups]}

    @classmethod
    def from_json(cls, obj) -> "PartitionPlan":
        if not isinstance(obj, dict):
            raise SerializationError("partition plan must be an object")
        mode = obj.get("mode")
        raw_groups = obj.get("groups")
        if not isinstance(raw_groups, list):
            raise SerializationError("partition plan needs a group list")
        try:
            return cls(mode, tuple(tuple(g) for g in raw_groups))
        except (ParameterError, TypeError) as exc:
            raise SerializationError("invalid partition plan: %s" % exc) from None


def partition(data: bytes, plan: PartitionPlan) -> list:
    """Split canonicalized CSV bytes into plan.k parts (canonical CSV each)."""
    header, body = _parse_csv(data)
    if plan.mode == MODE_RECORD_CLUSTERS:
        if plan.groups[-1][1] != len(body):
            raise PartitionError(
                "row ranges cover %d rows, file has %d" % (plan.groups[-1][1], len(body))
            )
        return [_serialize_csv(header, body[start:stop]) for start, stop in plan.groups]

    flat = [name for group in plan.groups for name in group]
    unknown = [name for name in flat if name not in header]
    if unknown:
        raise PartitionError("unknown columns: %s" % ", ".join(sorted(unknown)))
    if flat != header:
        raise PartitionError(
            "groups must tile the header in order: plan %r vs header %r"
            % (flat, header)
        )
    if plan.mode == MODE_SINGLE_RECORD and len(body) != 1:
        raise PartitionError(
            "single_record_fields requires exactly one data row, found %d" % len(body)
        )
    parts = []
    offset = 0
    for group in plan.groups:
        columns = slice(offset, offset + len(group))
        offset += len(group)
        parts.append(
            _serialize_csv(list(group), [row[columns] for row in body])
        )
    return parts


def merge_parts(parts: Mapping[int, bytes], plan: PartitionPlan) -> bytes:
    """Reassemble a contiguous suffix of parts {i..k} into one CSV view.

    With every part present this is partition's exact inverse; with a
    suffix, the view simply contains the recovered columns (or rows) and
    nothing of the redacted groups.
    """
    if not parts:
        raise PartitionError("no parts to merge")
    levels = sorted(parts)
    if levels != list(range(levels[0], plan.k + 1)):
        raise PartitionError(
            "parts must form a contiguous suffix ending at level %d, got %s"
            % (plan.k, levels)
        )
    parsed = {level: _parse_csv(parts[level]) for level in levels}

    if plan.mode == MODE_RECORD_CLUSTERS:
        header = parsed[levels[0]][0]
        body = []
        for level in levels:
            part_header, part_body = parsed[level]
            if part_header != header:
                raise PartitionError("part %d header does not match" % level)
            start, stop = plan.groups[level - 1]
            if len(part_body) != stop - start:
                raise PartitionError(
                    "part %d has %d rows, plan expects %d"
                    % (level, len(part_body), stop - start)
                )
            body.extend(part_body)
        return _serialize_csv(header, body)

    header: list = []
    columns: list = []
    row_count = None
    for level in levels:
        part_header, part_body = parsed[level]
        if part_header != list(plan.groups[level - 1]):
            raise PartitionError(
                "part %d columns %r do not match plan group %r"
                % (level, part_header, list(plan.groups[level - 1]))
            )
        if row_count is None:
            row_count = len(part_body)
        elif len(part_body) != row_count:
            raise PartitionError("parts disagree on row count")
        header.extend(part_header)
        columns.append(part_body)
    body = [
        [value for part_body in columns for value in part_body[i]]
        for i in range(row_count)
    ]
    return _serialize_csv(header, body)


# --------------------------------------------------------------------------
# per-level AEAD

def _associated_data(version: int, level: int, digest: bytes) -> bytes:
    return b"PMEF" + bytes([version]) + level.to_bytes(4, "big") + digest


@dataclass(frozen=True)
class EncryptedPart:
    level: int
    nonce: bytes
    tag: bytes
    plaintext_digest: bytes
    ciphertext: bytes
    version: int = PART_VERSION

    def __post_init__(self):
        if len(self.nonce) != NONCE_BYTES:
            raise ParameterError("nonce must be %d bytes" % NONCE_BYTES)
        if len(self.tag) != TAG_BYTES:
            raise ParameterError("tag must be %d bytes" % TAG_BYTES)
        if len(self.plaintext_digest) != DIGEST_BYTES:
            raise ParameterError("digest must be %d bytes" % DIGEST_BYTES)

    def to_bytes(self) -> bytes:
        return (
            bytes([self.version])
            + self.level.to_bytes(4, "big")
            + self.nonce
            + self.tag
            + self.plaintext_digest
            + self.ciphertext
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncryptedPart":
        fixed = 1 + 4 + NONCE_BYTES + TAG_BYTES + DIGEST_BYTES
        if len(data) < fixed:
            raise SerializationError("encrypted part truncated")
        if data[0] != PART_VERSION:
            raise SerializationError("unsupported part version %d" % data[0])
        level = int.from_bytes(data[1:5], "big")
        pos = 5
        nonce = data[pos : pos + NONCE_BYTES]
        pos += NONCE_BYTES
        tag = data[pos : pos + TAG_BYTES]
        pos += TAG_BYTES
        digest = data[pos : pos + DIGEST_BYTES]
        pos += DIGEST_BYTES
        return cls(level, nonce, tag, digest, data[pos:], data[0])


def encrypt_part(part: bytes, key: LevelKey, rng=None) -> EncryptedPart:
    rng = rng if rng is not None else default_source()
    nonce = rng.randbytes(NONCE_BYTES)
    digest = hashlib.sha256(part).digest()
    sealed = AESGCM(key.key_bytes).encrypt(
        nonce, part, _associated_data(PART_VERSION, key.level, digest)
    )
    return EncryptedPart(
        key.level, nonce, sealed[-TAG_BYTES:], digest, sealed[:-TAG_BYTES]
    )


def decrypt_part(ep: EncryptedPart, key: LevelKey) -> bytes:
    try:
        plaintext = AESGCM(key.key_bytes).decrypt(
            ep.nonce,
            ep.ciphertext + ep.tag,
            _associated_data(ep.version, ep.level, ep.plaintext_digest),
        )
    except InvalidTag:
        raise IntegrityError(
            "part at level %d: authentication failed" % ep.level
        ) from None
    if hashlib.sha256(plaintext).digest() != ep.plaintext_digest:
        raise IntegrityError("part at level %d: digest mismatch" % ep.level)
    return plaintext


# --------------------------------------------------------------------------
# synthetic fixture data

_SYNTH_COLUMNS = (
    "age", "workclass", "education", "marital_status", "occupation",
    "relationship", "race", "hours_per_week", "income",
)
_SYNTH_VOCAB = {
    "workclass": ("Private", "Self-emp", "Federal-gov", "Local-gov", "State-gov"),
    "education": ("Bachelors", "HS-grad", "Masters", "Doctorate", "Some-college"),
    "marital_status": ("Married", "Never-married", "Divorced", "Widowed"),
    "occupation": ("Tech-support", "Sales", "Exec-managerial", "Craft-repair", "Farming"),
    "relationship": ("Husband", "Wife", "Own-child", "Unmarried", "Not-in-family"),
    "race": ("White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"),
    "income": ("<=50K", ">50K"),
}


def synthetic_csv(rows: int, rng=None) -> bytes:
    """Census-shaped 9-column fixture table (canonical CSV bytes)."""
    rng = rng if rng is not None else default_source()
    body = []
    for _ in range(rows):
        record = []
        for name in _SYNTH_COLUMNS:
            if name == "age":
                record.append(str(17 + rng.randbelow(74)))
            elif name == "hours_per_week":
                record.append(str(1 + rng.randbelow(99)))
            else:
                vocab = _SYNTH_VOCAB[name]
                record.append(vocab[rng.randbelow(len(vocab))])
        body.append(record)
    return _serialize_csv(list(_SYNTH_COLUMNS), body)


def table_shaped_plan(k: int, header=None) -> PartitionPlan:
    """Column plan over a 9-column table in the reference shapes: sizes
    (2,3,4) for k=3, (1,1,1,2,2,2) for k=6, all-singletons for k=9."""
    header = list(header) if header is not None else list(_SYNTH_COLUMNS)
    shapes = {3: (2, 3, 4), 6: (1, 1, 1, 2, 2, 2), 9: (1,) * 9}
    if k not in shapes:
        raise ParameterError("reference shapes exist for k in {3, 6, 9}")
    if len(header) != 9:
        raise ParameterError("reference shapes need a 9-column header")
    groups = []
    offset = 0
    for size in shapes[k]:
        groups.append(tuple(header[offset : offset + size]))
        offset += size
    return PartitionPlan(MODE_COLUMN_GROUPS, tuple(groups))
