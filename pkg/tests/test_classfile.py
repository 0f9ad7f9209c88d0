from __future__ import annotations

import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gavstamp import mutf8
from gavstamp.classfile import (
    TAG_LONG,
    TAG_UTF8,
    ConstantPool,
    ConstantPoolEntry,
    parse_class,
    serialize_class,
    intern_utf8,
)
from gavstamp.errors import (
    BadMagic,
    IndexOutOfPool,
    PoolOverflow,
    TrailingData,
    TruncatedInput,
    UnknownConstantTag,
    UnsupportedMajorVersion,
)


def test_minimal_class_parses(corpus):
    cf = parse_class(corpus["empty_v52.class"])
    assert cf.major_version == 52
    assert cf.class_name == "fix/v52/Empty52"
    assert not cf.fields and not cf.methods


def test_round_trip_is_byte_identical(corpus):
    for name, data in corpus.items():
        assert serialize_class(parse_class(data)) == data, name


def test_parse_of_serialize_is_structurally_equal(corpus):
    for data in corpus.values():
        cf = parse_class(data)
        assert parse_class(serialize_class(cf)) == cf


def test_bad_magic():
    with pytest.raises(BadMagic):
        parse_class(b"\xca\xfe\xba\xbf" + b"\x00" * 20)


def test_truncated_input_reports_offset(corpus):
    data = corpus["plain_v52.class"]
    with pytest.raises(TruncatedInput) as exc_info:
        parse_class(data[: len(data) // 2])
    assert exc_info.value.offset <= len(data) // 2


def test_trailing_bytes_rejected(corpus):
    with pytest.raises(TrailingData):
        parse_class(corpus["plain_v52.class"] + b"\x00")


def test_unknown_constant_tag(corpus):
    data = bytearray(corpus["empty_v52.class"])
    data[10] = 2  # first pool entry's tag; 2 is unassigned
    with pytest.raises(UnknownConstantTag) as exc_info:
        parse_class(bytes(data))
    assert exc_info.value.tag == 2
    assert exc_info.value.offset == 10


@pytest.mark.parametrize("major", [44, 69, 1000])
def test_unsupported_major_version(corpus, major):
    data = bytearray(corpus["empty_v52.class"])
    struct.pack_into(">H", data, 6, major)
    with pytest.raises(UnsupportedMajorVersion):
        parse_class(bytes(data))


def test_dangling_reference_rejected(corpus):
    data = bytearray(corpus["empty_v52.class"])
    cf = parse_class(bytes(data))
    # find this_class offset: it sits right after the pool and access flags
    serialized = serialize_class(cf)
    offset = serialized.index(struct.pack(">H", cf.this_class),
                              8)  # skip the header before searching
    patched = bytearray(serialized)
    struct.pack_into(">H", patched, offset, 0x7FFF)
    with pytest.raises(IndexOutOfPool):
        parse_class(bytes(patched))


def test_wrong_tag_reference_rejected(corpus):
    cf = parse_class(corpus["empty_v52.class"])
    # point this_class at a Utf8 entry instead of a Class entry
    utf8_index = next(i for i, e in cf.pool.entries() if e.tag == TAG_UTF8)
    cf.this_class = utf8_index
    with pytest.raises(IndexOutOfPool):
        parse_class(serialize_class(cf))


# -- interning -----------------------------------------------------------------

def test_intern_appends_at_tail(corpus):
    cf = parse_class(corpus["plain_v52.class"])
    before = len(cf.pool)
    index = intern_utf8(cf, "org.apache.pdfbox")
    assert index == before + 1
    assert len(cf.pool) == before + 1
    assert cf.pool.utf8(index) == "org.apache.pdfbox"


def test_intern_is_idempotent(corpus):
    cf = parse_class(corpus["plain_v52.class"])
    first = intern_utf8(cf, "group")
    size = len(cf.pool)
    assert intern_utf8(cf, "group") == first
    assert len(cf.pool) == size


def test_intern_finds_existing_entry(corpus):
    cf = parse_class(corpus["plain_v52.class"])
    existing = next(i for i, e in cf.pool.entries()
                    if e.tag == TAG_UTF8 and e.payload == b"greet")
    size = len(cf.pool)
    assert intern_utf8(cf, "greet") == existing
    assert len(cf.pool) == size


def test_intern_after_two_slot_entries(corpus):
    cf = parse_class(corpus["constants_v52.class"])
    assert any(e.tag == TAG_LONG for _, e in cf.pool.entries())
    index = intern_utf8(cf, "fresh-entry")
    assert index == len(cf.pool)
    # the appended entry must survive a round trip at the same index
    reparsed = parse_class(serialize_class(cf))
    assert reparsed.pool.utf8(index) == "fresh-entry"


def test_intern_dedup_is_exact_bytes():
    pool = ConstantPool()
    nfc = pool.intern_utf8("é")         # precomposed
    nfd = pool.intern_utf8("é")        # decomposed; different bytes
    assert nfc != nfd


@given(st.lists(st.text(max_size=20), min_size=1, max_size=30))
def test_intern_indices_stable(texts):
    pool = ConstantPool()
    first_pass = [pool.intern_utf8(t) for t in texts]
    second_pass = [pool.intern_utf8(t) for t in texts]
    assert first_pass == second_pass
    for text, index in zip(texts, first_pass):
        assert pool.utf8(index) == text


# -- pool capacity ----------------------------------------------------------------

def test_pool_add_overflow():
    pool = ConstantPool()
    entry = ConstantPoolEntry(TAG_UTF8, b"x")
    for _ in range(65534):
        pool.add(entry)
    with pytest.raises(PoolOverflow):
        pool.add(entry)


def test_serialize_oversized_pool_overflows(corpus):
    cf = parse_class(corpus["empty_v52.class"])
    slots = [ConstantPoolEntry(TAG_UTF8, b"x")] * 65536
    cf.pool = ConstantPool(slots)
    with pytest.raises(PoolOverflow):
        serialize_class(cf)


def test_utf8_payload_round_trips_exotic_encodings(corpus):
    cf = parse_class(corpus["exotic_v52.class"])
    payloads = [e.payload for _, e in cf.pool.entries() if e.tag == TAG_UTF8]
    assert any(b"\xc0\x80" in p for p in payloads), "2-byte NUL encoding present"
    assert any(b"\xed\xa0" in p for p in payloads), "surrogate-pair encoding present"
    assert serialize_class(cf) == corpus["exotic_v52.class"]
    texts = [mutf8.decode(p) for p in payloads]
    assert "nul\x00nul" in texts
    assert any("\U0001F600" in t for t in texts)
