import random

import pytest
from hypothesis import given, strategies as st

from pmod.errors import IntegrityError, ParameterError, PartitionError
from pmod.keychain import LevelKey
from pmod.partitioner import (
    EncryptedPart,
    PartitionPlan,
    canonicalize_csv,
    decrypt_part,
    encrypt_part,
    merge_parts,
    partition,
    synthetic_csv,
    table_shaped_plan,
)
from pmod.rng import SeededRandomSource


CSV = b"a,b,c\n1,2,3\n4,5,6\n7,8,9\n"


# --------------------------------------------------------------------------
# canonical form

def test_canonicalize_is_idempotent():
    once = canonicalize_csv(CSV)
    assert canonicalize_csv(once) == once


def test_canonicalize_normalizes_line_endings():
    assert canonicalize_csv(b"a,b\r\n1,2\r\n") == b"a,b\n1,2\n"


def test_canonicalize_minimal_quoting():
    data = canonicalize_csv(b'a,b\n"1","x y"\n')
    assert data == b"a,b\n1,x y\n"
    keeps = canonicalize_csv(b'a,b\n"1,5",2\n')
    assert keeps == b'a,b\n"1,5",2\n'


@pytest.mark.parametrize("bad", [
    b"a,b\n1\n",              # ragged row
    b"a,a\n1,2\n",            # duplicate header
    b"a,\n1,2\n",             # empty header cell
    b"",                      # no header at all
])
def test_malformed_csv_rejected(bad):
    with pytest.raises(PartitionError):
        canonicalize_csv(bad)


# --------------------------------------------------------------------------
# plans

def test_record_plan_must_be_contiguous_from_zero():
    PartitionPlan("record_clusters", ((0, 2), (2, 3)))
    with pytest.raises(ParameterError):
        PartitionPlan("record_clusters", ((1, 2), (2, 3)))
    with pytest.raises(ParameterError):
        PartitionPlan("record_clusters", ((0, 2), (3, 4)))
    with pytest.raises(ParameterError):
        PartitionPlan("record_clusters", ((0, 2), (2, 2)))


def test_column_plan_groups_validated():
    PartitionPlan("column_groups", (("a",), ("b", "c")))
    with pytest.raises(ParameterError):
        PartitionPlan("column_groups", ((), ("a",)))
    with pytest.raises(ParameterError):
        PartitionPlan("column_groups", (("a",), ("a",)))


def test_unknown_mode_rejected():
    with pytest.raises(ParameterError):
        PartitionPlan("diagonal", ((0, 1),))


def test_plan_json_round_trip():
    for plan in (
        PartitionPlan("record_clusters", ((0, 2), (2, 4))),
        PartitionPlan("column_groups", (("a", "b"), ("c",))),
        PartitionPlan("single_record_fields", (("a",), ("b", "c"))),
    ):
        assert PartitionPlan.from_json(plan.to_json()).groups == plan.groups


# --------------------------------------------------------------------------
# partition / merge round trips

def test_record_clusters_round_trip():
    plan = PartitionPlan("record_clusters", ((0, 1), (1, 3)))
    parts = partition(CSV, plan)
    assert len(parts) == 2
    assert merge_parts({1: parts[0], 2: parts[1]}, plan) == CSV


def test_column_groups_round_trip():
    plan = PartitionPlan("column_groups", (("a",), ("b", "c")))
    parts = partition(CSV, plan)
    assert parts[0].startswith(b"a\n")
    assert parts[1].startswith(b"b,c\n")
    assert merge_parts({1: parts[0], 2: parts[1]}, plan) == CSV


def test_single_record_round_trip():
    one = b"a,b,c\n1,2,3\n"
    plan = PartitionPlan("single_record_fields", (("a", "b"), ("c",)))
    parts = partition(one, plan)
    assert merge_parts({1: parts[0], 2: parts[1]}, plan) == one


def test_column_groups_must_tile_header_in_order():
    plan = PartitionPlan("column_groups", (("b",), ("a", "c")))
    with pytest.raises(PartitionError):
        partition(CSV, plan)
    missing = PartitionPlan("column_groups", (("a",), ("b",)))
    with pytest.raises(PartitionError):
        partition(CSV, missing)


def test_record_plan_must_cover_all_rows():
    plan = PartitionPlan("record_clusters", ((0, 2),))
    with pytest.raises(PartitionError):
        partition(CSV, plan)


def test_single_record_demands_one_row():
    plan = PartitionPlan("single_record_fields", (("a", "b", "c"),))
    with pytest.raises(PartitionError):
        partition(CSV, plan)


def test_suffix_merge_gives_partial_view():
    plan = PartitionPlan("column_groups", (("a",), ("b",), ("c",)))
    parts = partition(CSV, plan)
    view = merge_parts({2: parts[1], 3: parts[2]}, plan)
    assert view == b"b,c\n2,3\n5,6\n8,9\n"


def test_merge_requires_contiguous_suffix():
    plan = PartitionPlan("record_clusters", ((0, 1), (1, 2), (2, 3)))
    parts = partition(CSV, plan)
    with pytest.raises(PartitionError):
        merge_parts({1: parts[0], 3: parts[2]}, plan)
    with pytest.raises(PartitionError):
        merge_parts({1: parts[0], 2: parts[1]}, plan)
    with pytest.raises(PartitionError):
        merge_parts({}, plan)


def test_merge_validates_part_shape():
    plan = PartitionPlan("record_clusters", ((0, 1), (1, 3)))
    parts = partition(CSV, plan)
    with pytest.raises(PartitionError):
        merge_parts({1: parts[0], 2: b"x,y\n1,2\n"}, plan)


@given(seed=st.integers(0, 10**9))
def test_random_partitions_are_exact_inverses(seed):
    rnd = random.Random(seed)
    rows = rnd.randint(1, 8)
    cols = rnd.randint(1, 6)
    header = [f"c{i}" for i in range(cols)]
    body = [
        [str(rnd.randint(0, 99)) for _ in range(cols)] for _ in range(rows)
    ]
    data = canonicalize_csv(
        ("\n".join([",".join(header)] + [",".join(r) for r in body]) + "\n").encode()
    )
    if rnd.random() < 0.5:
        cuts = sorted(rnd.sample(range(1, rows + 1), rnd.randint(0, rows - 1) if rows > 1 else 0))
        bounds = [0] + cuts + [rows]
        plan = PartitionPlan(
            "record_clusters",
            tuple((a, b) for a, b in zip(bounds, bounds[1:]) if a != b),
        )
    else:
        cuts = sorted(rnd.sample(range(1, cols), rnd.randint(0, cols - 1)))
        bounds = [0] + cuts + [cols]
        plan = PartitionPlan(
            "column_groups",
            tuple(tuple(header[a:b]) for a, b in zip(bounds, bounds[1:])),
        )
    parts = partition(data, plan)
    assert merge_parts(dict(enumerate(parts, start=1)), plan) == data


# --------------------------------------------------------------------------
# AEAD sealing

KEY = LevelKey(2, b"\x11" * 32)


def test_encrypt_part_round_trip():
    sealed = encrypt_part(b"payload bytes", KEY, SeededRandomSource(800))
    assert decrypt_part(sealed, KEY) == b"payload bytes"
    assert sealed.level == 2


def test_wrong_key_fails():
    sealed = encrypt_part(b"payload", KEY, SeededRandomSource(801))
    with pytest.raises(IntegrityError):
        decrypt_part(sealed, LevelKey(2, b"\x22" * 32))


def test_wrong_level_fails_via_associated_data():
    sealed = encrypt_part(b"payload", KEY, SeededRandomSource(802))
    moved = EncryptedPart(
        3, sealed.nonce, sealed.tag, sealed.plaintext_digest, sealed.ciphertext
    )
    with pytest.raises(IntegrityError):
        decrypt_part(moved, LevelKey(3, KEY.key_bytes))


def test_tampered_fields_fail():
    sealed = encrypt_part(b"payload", KEY, SeededRandomSource(803))
    flip = lambda b: bytes([b[0] ^ 1]) + b[1:]
    for mutated in (
        EncryptedPart(2, sealed.nonce, sealed.tag, sealed.plaintext_digest,
                      flip(sealed.ciphertext)),
        EncryptedPart(2, sealed.nonce, flip(sealed.tag), sealed.plaintext_digest,
                      sealed.ciphertext),
        EncryptedPart(2, sealed.nonce, sealed.tag, flip(sealed.plaintext_digest),
                      sealed.ciphertext),
        EncryptedPart(2, flip(sealed.nonce), sealed.tag, sealed.plaintext_digest,
                      sealed.ciphertext),
    ):
        with pytest.raises(IntegrityError):
            decrypt_part(mutated, KEY)


def test_encrypted_part_serialization():
    sealed = encrypt_part(b"payload", KEY, SeededRandomSource(804))
    back = EncryptedPart.from_bytes(sealed.to_bytes())
    assert back == sealed
    # cutting into the fixed header is detected immediately ...
    with pytest.raises(Exception):
        EncryptedPart.from_bytes(sealed.to_bytes()[:30])
    # ... and a truncated ciphertext tail is caught by the AEAD tag
    shortened = EncryptedPart.from_bytes(sealed.to_bytes()[:-1])
    with pytest.raises(IntegrityError):
        decrypt_part(shortened, KEY)


# --------------------------------------------------------------------------
# fixtures for the documented hierarchy shapes

def test_synthetic_csv_shape():
    data = synthetic_csv(5, SeededRandomSource(805))
    lines = data.decode().strip().split("\n")
    assert len(lines) == 6
    assert lines[0].count(",") == 8  # nine columns
    assert data == synthetic_csv(5, SeededRandomSource(805))


@pytest.mark.parametrize("k,shape", [
    (3, (2, 3, 4)),
    (6, (1, 1, 1, 2, 2, 2)),
    (9, (1,) * 9),
])
def test_table_shaped_plans(k, shape):
    plan = table_shaped_plan(k)
    assert plan.k == k
    assert tuple(len(g) for g in plan.groups) == shape
    data = canonicalize_csv(synthetic_csv(4, SeededRandomSource(806)))
    parts = partition(data, plan)
    assert merge_parts(dict(enumerate(parts, start=1)), plan) == data


def test_table_shaped_plan_rejects_other_k():
    with pytest.raises(ParameterError):
        table_shaped_plan(4)
