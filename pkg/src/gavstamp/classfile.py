"""JVM class-file parsing and serialization.

The model keeps every payload as raw bytes: constant-pool entries hold the
bytes after their tag (for Utf8, after the length prefix as well), and
attributes the toolchain does not interpret are carried verbatim. An
unmodified parse therefore serializes back to the exact input bytes.

Format reference: the class-file chapter of the JVM specification.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

from . import mutf8
from .errors import (
    AttributeTooLarge,
    BadMagic,
    ClassFileError,
    IndexOutOfPool,
    PoolOverflow,
    TrailingData,
    TruncatedInput,
    UnknownConstantTag,
    UnsupportedMajorVersion,
)

MAGIC = 0xCAFEBABE

# Major versions accepted by the parser: JDK 1.0 through 24.
MIN_MAJOR_VERSION = 45
MAX_MAJOR_VERSION = 68

TAG_UTF8 = 1
TAG_INTEGER = 3
TAG_FLOAT = 4
TAG_LONG = 5
TAG_DOUBLE = 6
TAG_CLASS = 7
TAG_STRING = 8
TAG_FIELDREF = 9
TAG_METHODREF = 10
TAG_INTERFACE_METHODREF = 11
TAG_NAME_AND_TYPE = 12
TAG_METHOD_HANDLE = 15
TAG_METHOD_TYPE = 16
TAG_DYNAMIC = 17
TAG_INVOKE_DYNAMIC = 18
TAG_MODULE = 19
TAG_PACKAGE = 20

TAG_NAMES = {
    TAG_UTF8: "Utf8",
    TAG_INTEGER: "Integer",
    TAG_FLOAT: "Float",
    TAG_LONG: "Long",
    TAG_DOUBLE: "Double",
    TAG_CLASS: "Class",
    TAG_STRING: "String",
    TAG_FIELDREF: "Fieldref",
    TAG_METHODREF: "Methodref",
    TAG_INTERFACE_METHODREF: "InterfaceMethodref",
    TAG_NAME_AND_TYPE: "NameAndType",
    TAG_METHOD_HANDLE: "MethodHandle",
    TAG_METHOD_TYPE: "MethodType",
    TAG_DYNAMIC: "Dynamic",
    TAG_INVOKE_DYNAMIC: "InvokeDynamic",
    TAG_MODULE: "Module",
    TAG_PACKAGE: "Package",
}

_TWO_SLOT_TAGS = frozenset({TAG_LONG, TAG_DOUBLE})

# Payload size in bytes for every fixed-width tag (Utf8 is variable).
_FIXED_PAYLOAD = {
    TAG_INTEGER: 4,
    TAG_FLOAT: 4,
    TAG_LONG: 8,
    TAG_DOUBLE: 8,
    TAG_CLASS: 2,
    TAG_STRING: 2,
    TAG_FIELDREF: 4,
    TAG_METHODREF: 4,
    TAG_INTERFACE_METHODREF: 4,
    TAG_NAME_AND_TYPE: 4,
    TAG_METHOD_HANDLE: 3,
    TAG_METHOD_TYPE: 2,
    TAG_DYNAMIC: 4,
    TAG_INVOKE_DYNAMIC: 4,
    TAG_MODULE: 2,
    TAG_PACKAGE: 2,
}


@dataclass(frozen=True)
class ConstantPoolEntry:
    """One pool entry: its tag and the raw bytes following the tag.

    For Utf8 entries the payload excludes the u2 length prefix, so
    `payload` is exactly the modified-UTF-8 string data. Indices stored
    inside payloads stay as indices; nothing is resolved eagerly.
    """

    tag: int
    payload: bytes

    @property
    def text(self) -> str:
        if self.tag != TAG_UTF8:
            raise ValueError(f"entry is {TAG_NAMES.get(self.tag, self.tag)}, not Utf8")
        return mutf8.decode(self.payload)

    def u16(self, offset: int = 0) -> int:
        return struct.unpack_from(">H", self.payload, offset)[0]


@dataclass(frozen=True)
class AttributeRecord:
    name_index: int
    payload: bytes


@dataclass(frozen=True)
class MemberInfo:
    """A field_info or method_info structure."""

    access_flags: int
    name_index: int
    descriptor_index: int
    attributes: tuple[AttributeRecord, ...]


class ConstantPool:
    """The 1-indexed constant pool.

    Long and Double entries occupy two slots; the second slot is a phantom
    stored as None and can never be referenced.
    """

    def __init__(self, slots: list[ConstantPoolEntry | None] | None = None):
        self._slots: list[ConstantPoolEntry | None] = list(slots) if slots else []

    def __len__(self) -> int:
        return len(self._slots)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstantPool) and self._slots == other._slots

    def copy(self) -> "ConstantPool":
        return ConstantPool(self._slots)

    def get(self, index: int) -> ConstantPoolEntry | None:
        if 1 <= index <= len(self._slots):
            return self._slots[index - 1]
        return None

    def entry(self, index: int, expect_tag: int | None = None) -> ConstantPoolEntry:
        got = self.get(index)
        if got is None:
            raise IndexOutOfPool(index)
        if expect_tag is not None and got.tag != expect_tag:
            raise IndexOutOfPool(
                index,
                f"expected {TAG_NAMES[expect_tag]}, found {TAG_NAMES.get(got.tag, got.tag)}",
            )
        return got

    def utf8(self, index: int) -> str:
        return self.entry(index, TAG_UTF8).text

    def entries(self):
        """Yield (index, entry) pairs, skipping phantom slots."""
        for i, slot in enumerate(self._slots, start=1):
            if slot is not None:
                yield i, slot

    def add(self, entry: ConstantPoolEntry) -> int:
        width = 2 if entry.tag in _TWO_SLOT_TAGS else 1
        # the count field is nslots + 1 and must fit in 16 bits
        if len(self._slots) + width + 1 > 0xFFFF:
            raise PoolOverflow()
        self._slots.append(entry)
        if width == 2:
            self._slots.append(None)
        return len(self._slots) - width + 1

    def find_utf8(self, data: bytes) -> int | None:
        """Exact-bytes lookup of a Utf8 payload; no Unicode normalization."""
        for i, slot in enumerate(self._slots, start=1):
            if slot is not None and slot.tag == TAG_UTF8 and slot.payload == data:
                return i
        return None

    def intern_utf8(self, text: str) -> int:
        data = mutf8.encode(text)
        if len(data) > 0xFFFF:
            raise ValueError("string too long for a Utf8 entry")
        found = self.find_utf8(data)
        if found is not None:
            return found
        return self.add(ConstantPoolEntry(TAG_UTF8, data))


@dataclass
class ClassFile:
    minor_version: int
    major_version: int
    pool: ConstantPool
    access_flags: int
    this_class: int
    super_class: int
    interfaces: tuple[int, ...] = ()
    fields: tuple[MemberInfo, ...] = ()
    methods: tuple[MemberInfo, ...] = ()
    attributes: tuple[AttributeRecord, ...] = ()

    @property
    def class_name(self) -> str:
        """Internal (slash-separated) name of this class."""
        name_index = self.pool.entry(self.this_class, TAG_CLASS).u16()
        return self.pool.utf8(name_index)


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedInput(self.pos, self.pos + n - len(self.data))
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u1(self) -> int:
        return self.take(1)[0]

    def u2(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u4(self) -> int:
        return struct.unpack(">I", self.take(4))[0]


def parse_class(data: bytes) -> ClassFile:
    """Parse a complete class file; every input byte must be accounted for."""
    r = _Reader(data)
    magic = r.u4()
    if magic != MAGIC:
        raise BadMagic(magic)
    minor = r.u2()
    major = r.u2()
    if not MIN_MAJOR_VERSION <= major <= MAX_MAJOR_VERSION:
        raise UnsupportedMajorVersion(major)

    pool = _parse_pool(r)
    access_flags = r.u2()
    this_class = r.u2()
    super_class = r.u2()
    interfaces = tuple(r.u2() for _ in range(r.u2()))
    fields = _parse_members(r)
    methods = _parse_members(r)
    attributes = _parse_attributes(r)

    if r.pos != len(data):
        raise TrailingData(r.pos, len(data) - r.pos)

    cf = ClassFile(
        minor_version=minor,
        major_version=major,
        pool=pool,
        access_flags=access_flags,
        this_class=this_class,
        super_class=super_class,
        interfaces=interfaces,
        fields=fields,
        methods=methods,
        attributes=attributes,
    )
    _validate_references(cf)
    return cf


def _parse_pool(r: _Reader) -> ConstantPool:
    count = r.u2()
    slots: list[ConstantPoolEntry | None] = []
    index = 1
    while index < count:
        tag_offset = r.pos
        tag = r.u1()
        if tag == TAG_UTF8:
            payload = r.take(r.u2())
        elif tag in _FIXED_PAYLOAD:
            payload = r.take(_FIXED_PAYLOAD[tag])
        else:
            raise UnknownConstantTag(tag, tag_offset)
        slots.append(ConstantPoolEntry(tag, payload))
        if tag in _TWO_SLOT_TAGS:
            slots.append(None)
            index += 2
        else:
            index += 1
    if index != count:
        raise ClassFileError("long/double constant overruns the declared pool count")
    return ConstantPool(slots)


def _parse_members(r: _Reader) -> tuple[MemberInfo, ...]:
    members = []
    for _ in range(r.u2()):
        access_flags = r.u2()
        name_index = r.u2()
        descriptor_index = r.u2()
        members.append(MemberInfo(access_flags, name_index, descriptor_index, _parse_attributes(r)))
    return tuple(members)


def _parse_attributes(r: _Reader) -> tuple[AttributeRecord, ...]:
    attrs = []
    for _ in range(r.u2()):
        name_index = r.u2()
        attrs.append(AttributeRecord(name_index, r.take(r.u4())))
    return tuple(attrs)


# which tags each pool-internal u16 must point at: (offset, expected tags)
_POOL_REFS: dict[int, tuple[tuple[int, tuple[int, ...]], ...]] = {
    TAG_CLASS: ((0, (TAG_UTF8,)),),
    TAG_STRING: ((0, (TAG_UTF8,)),),
    TAG_FIELDREF: ((0, (TAG_CLASS,)), (2, (TAG_NAME_AND_TYPE,))),
    TAG_METHODREF: ((0, (TAG_CLASS,)), (2, (TAG_NAME_AND_TYPE,))),
    TAG_INTERFACE_METHODREF: ((0, (TAG_CLASS,)), (2, (TAG_NAME_AND_TYPE,))),
    TAG_NAME_AND_TYPE: ((0, (TAG_UTF8,)), (2, (TAG_UTF8,))),
    TAG_METHOD_TYPE: ((0, (TAG_UTF8,)),),
    # bootstrap_method_attr_index is a table index, not a pool index
    TAG_DYNAMIC: ((2, (TAG_NAME_AND_TYPE,)),),
    TAG_INVOKE_DYNAMIC: ((2, (TAG_NAME_AND_TYPE,)),),
    TAG_MODULE: ((0, (TAG_UTF8,)),),
    TAG_PACKAGE: ((0, (TAG_UTF8,)),),
}

_HANDLE_REF_TAGS = (TAG_FIELDREF, TAG_METHODREF, TAG_INTERFACE_METHODREF)


def _validate_references(cf: ClassFile) -> None:
    pool = cf.pool

    def expect(index: int, tags: tuple[int, ...], context: str) -> None:
        got = pool.get(index)
        if got is None:
            raise IndexOutOfPool(index, context)
        if got.tag not in tags:
            wanted = "/".join(TAG_NAMES[t] for t in tags)
            raise IndexOutOfPool(index, f"{context}: expected {wanted}, found "
                                        f"{TAG_NAMES.get(got.tag, got.tag)}")

    for index, entry in pool.entries():
        for offset, tags in _POOL_REFS.get(entry.tag, ()):
            expect(entry.u16(offset), tags, f"pool entry #{index}")
        if entry.tag == TAG_METHOD_HANDLE:
            expect(entry.u16(1), _HANDLE_REF_TAGS, f"pool entry #{index}")

    expect(cf.this_class, (TAG_CLASS,), "this_class")
    if cf.super_class != 0:
        expect(cf.super_class, (TAG_CLASS,), "super_class")
    for iface in cf.interfaces:
        expect(iface, (TAG_CLASS,), "interface")
    for kind, members in (("field", cf.fields), ("method", cf.methods)):
        for m in members:
            expect(m.name_index, (TAG_UTF8,), f"{kind} name")
            expect(m.descriptor_index, (TAG_UTF8,), f"{kind} descriptor")
            for a in m.attributes:
                expect(a.name_index, (TAG_UTF8,), f"{kind} attribute name")
    for a in cf.attributes:
        expect(a.name_index, (TAG_UTF8,), "class attribute name")


def serialize_class(cf: ClassFile) -> bytes:
    """Serialize back to class-file bytes; inverse of parse_class."""
    out = bytearray()
    out += struct.pack(">IHH", MAGIC, cf.minor_version, cf.major_version)

    nslots = len(cf.pool)
    if nslots + 1 > 0xFFFF:
        raise PoolOverflow()
    out += struct.pack(">H", nslots + 1)
    for _, entry in cf.pool.entries():
        out.append(entry.tag)
        if entry.tag == TAG_UTF8:
            out += struct.pack(">H", len(entry.payload))
        out += entry.payload

    out += struct.pack(">HHH", cf.access_flags, cf.this_class, cf.super_class)
    out += struct.pack(">H", len(cf.interfaces))
    for iface in cf.interfaces:
        out += struct.pack(">H", iface)
    for members in (cf.fields, cf.methods):
        out += struct.pack(">H", len(members))
        for m in members:
            out += struct.pack(">HHH", m.access_flags, m.name_index, m.descriptor_index)
            _write_attributes(out, m.attributes)
    _write_attributes(out, cf.attributes)
    return bytes(out)


def _write_attributes(out: bytearray, attrs: tuple[AttributeRecord, ...]) -> None:
    out += struct.pack(">H", len(attrs))
    for a in attrs:
        if len(a.payload) > 0xFFFFFFFF:
            raise AttributeTooLarge(len(a.payload))
        out += struct.pack(">HI", a.name_index, len(a.payload))
        out += a.payload


def intern_utf8(cf: ClassFile, text: str) -> int:
    """Return the index of a Utf8 entry for `text`, appending one if absent.

    Existing entries and their indices are never disturbed.
    """
    return cf.pool.intern_utf8(text)


def copy_class(cf: ClassFile) -> ClassFile:
    """Shallow copy with an independent pool, for copy-then-modify operations."""
    return replace(cf, pool=cf.pool.copy())
