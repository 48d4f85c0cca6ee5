import pytest

from pmod.errors import SerializationError
from pmod.rng import SeededRandomSource
from pmod.wire import (
    ElementCounts,
    KIND_BLOB,
    KIND_G0,
    MAGIC_CIPHERTEXT,
    Reader,
    Writer,
    canonical_json,
    element_census,
)


def test_round_trip_all_kinds(tctx):
    rng = SeededRandomSource(200)
    x = tctx.generator() ** 17
    z = tctx.random_gt(rng)
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_descriptor(tctx)
    w.put_g0(x)
    w.put_g1(z)
    w.put_scalar(123456789)
    w.put_blob(b"opaque payload")
    w.put_json({"b": 2, "a": [1, 2]})
    raw = w.getvalue()

    r = Reader(raw, MAGIC_CIPHERTEXT)
    assert r.descriptor() == tctx.descriptor()
    assert r.g0(tctx) == x
    assert r.g1(tctx) == z
    assert r.scalar() == 123456789
    assert r.blob() == b"opaque payload"
    assert r.json_blob() == {"b": 2, "a": [1, 2]}
    r.expect_end()


def test_magic_checked():
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_blob(b"x")
    raw = w.getvalue()
    with pytest.raises(SerializationError):
        Reader(raw, b"PMPK")
    with pytest.raises(SerializationError):
        Reader(b"XX", MAGIC_CIPHERTEXT)


def test_bad_magic_for_writer():
    with pytest.raises(ValueError):
        Writer(b"NOPE")


def test_truncation_detected(tctx):
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_g0(tctx.generator())
    raw = w.getvalue()
    for cut in (len(raw) - 1, len(raw) - 10, 6):
        r = Reader(raw[:cut], MAGIC_CIPHERTEXT)
        with pytest.raises(SerializationError):
            r.g0(tctx)


def test_trailing_bytes_detected():
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_blob(b"x")
    r = Reader(w.getvalue() + b"\x00", MAGIC_CIPHERTEXT)
    r.blob()
    with pytest.raises(SerializationError):
        r.expect_end()


def test_kind_mismatch_detected(tctx):
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_blob(b"x")
    r = Reader(w.getvalue(), MAGIC_CIPHERTEXT)
    with pytest.raises(SerializationError):
        r.g0(tctx)


def test_backend_byte_checked(tctx, ss512):
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_g0(tctx.generator())
    r = Reader(w.getvalue(), MAGIC_CIPHERTEXT)
    with pytest.raises(SerializationError):
        r.g0(ss512)


def test_scalar_width_enforced():
    w = Writer()
    w.put_entry(0x03, 0x01, b"\x01" * 31)
    r = Reader(w.getvalue())
    with pytest.raises(SerializationError):
        r.scalar()


def test_canonical_json_is_stable():
    a = canonical_json({"b": 1, "a": {"y": 2, "x": 3}})
    b = canonical_json({"a": {"x": 3, "y": 2}, "b": 1})
    assert a == b
    assert b" " not in a


def test_element_counts_add():
    a = ElementCounts(1, 2, 3) + ElementCounts(4, 5, 6)
    assert (a.g0, a.g1, a.zp) == (5, 7, 9)


def test_census_counts_by_kind(tctx):
    rng = SeededRandomSource(201)
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_descriptor(tctx)
    w.put_g0(tctx.generator())
    w.put_g0(tctx.generator() ** 2)
    w.put_g1(tctx.random_gt(rng))
    w.put_scalar(5)
    w.put_blob(b"ignored")
    c = element_census(w.getvalue())
    assert (c.g0, c.g1, c.zp) == (2, 1, 1)


def test_census_descriptor_as_g0_slot(tctx):
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_descriptor(tctx, as_g0_slot=True)
    c = element_census(w.getvalue())
    assert (c.g0, c.g1, c.zp) == (1, 0, 0)


def test_census_rejects_junk():
    with pytest.raises(SerializationError):
        element_census(b"\xff\x01\x00\x00\x00\x01A")
    w = Writer(MAGIC_CIPHERTEXT)
    w.put_entry(KIND_G0, 0x01, b"xy")
    with pytest.raises(SerializationError):
        element_census(w.getvalue()[:-1])


def test_blob_kind_matches_constant():
    w = Writer()
    w.put_blob(b"z")
    backend, payload = Reader(w.getvalue()).entry(KIND_BLOB)
    assert payload == b"z"
