"""Inject and read the provenance annotation on a class.

The coordinate triple is stored as one runtime-visible annotation whose
three string elements are named group, artefact, and version. The element
name "artefact" (with the e) is part of the wire contract: readers built
against the original annotation class expect that exact spelling.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, replace

from . import mutf8
from .classfile import TAG_UTF8, AttributeRecord, ClassFile, copy_class
from .coordinates import GavCoordinate
from .errors import AlreadyAnnotated, MalformedAnnotation

RUNTIME_VISIBLE_ANNOTATIONS = "RuntimeVisibleAnnotations"

DEFAULT_ANNOTATION_DESCRIPTOR = "Lio/github/chainsproject/classport/commons/ClassportInfo;"

ELEMENT_GROUP = "group"
ELEMENT_ARTIFACT = "artefact"
ELEMENT_VERSION = "version"

# Fixed framing cost of one injection in the worst case (no entry reused,
# attribute newly created), excluding the descriptor and coordinate string
# bytes: pool headers for 8 new Utf8 entries, the three element names, the
# attribute name, the attribute header and the annotation body.
INJECTION_BASE_OVERHEAD = 96

_STRING_TAG = ord("s")
_CONST_TAGS = frozenset(ord(c) for c in "BCDFIJSZs")


class OnExisting(enum.Enum):
    """What inject_annotation does when a matching annotation already exists."""

    ERROR = "error"
    REPLACE = "replace"


@dataclass(frozen=True)
class ElementValue:
    """One element_value union member, kept at the index level."""

    tag: int
    indices: tuple[int, ...] = ()
    nested: "Annotation | None" = None
    values: "tuple[ElementValue, ...] | None" = None


@dataclass(frozen=True)
class Annotation:
    type_index: int
    pairs: tuple[tuple[int, ElementValue], ...]


@dataclass(frozen=True)
class AnnotationRecord:
    """Interpreted view of a string-only annotation (the provenance shape)."""

    type_descriptor: str
    pairs: tuple[tuple[str, str], ...]


def gav_record(gav: GavCoordinate, descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR) -> AnnotationRecord:
    return AnnotationRecord(
        type_descriptor=descriptor,
        pairs=(
            (ELEMENT_GROUP, gav.group),
            (ELEMENT_ARTIFACT, gav.artifact),
            (ELEMENT_VERSION, gav.version),
        ),
    )


# -- attribute payload codec --------------------------------------------------

class _PayloadReader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u1(self) -> int:
        return self._unpack(">B", 1)

    def u2(self) -> int:
        return self._unpack(">H", 2)

    def _unpack(self, fmt: str, size: int) -> int:
        if self.pos + size > len(self.data):
            raise MalformedAnnotation("annotation attribute payload truncated")
        value = struct.unpack_from(fmt, self.data, self.pos)[0]
        self.pos += size
        return value


def parse_annotations_payload(payload: bytes) -> tuple[Annotation, ...]:
    """Decode a RuntimeVisibleAnnotations attribute payload in full."""
    r = _PayloadReader(payload)
    annotations = tuple(_read_annotation(r) for _ in range(r.u2()))
    if r.pos != len(payload):
        raise MalformedAnnotation("trailing bytes in annotations attribute")
    return annotations


def _read_annotation(r: _PayloadReader) -> Annotation:
    type_index = r.u2()
    pairs = []
    for _ in range(r.u2()):
        name_index = r.u2()
        pairs.append((name_index, _read_element_value(r)))
    return Annotation(type_index, tuple(pairs))


def _read_element_value(r: _PayloadReader) -> ElementValue:
    tag = r.u1()
    if tag in _CONST_TAGS or tag == ord("c"):
        return ElementValue(tag, (r.u2(),))
    if tag == ord("e"):
        return ElementValue(tag, (r.u2(), r.u2()))
    if tag == ord("@"):
        return ElementValue(tag, nested=_read_annotation(r))
    if tag == ord("["):
        values = tuple(_read_element_value(r) for _ in range(r.u2()))
        return ElementValue(tag, values=values)
    raise MalformedAnnotation(f"unknown element_value tag {tag}")


def serialize_annotations_payload(annotations: tuple[Annotation, ...]) -> bytes:
    out = bytearray(struct.pack(">H", len(annotations)))
    for a in annotations:
        _write_annotation(out, a)
    return bytes(out)


def _write_annotation(out: bytearray, a: Annotation) -> None:
    out += struct.pack(">HH", a.type_index, len(a.pairs))
    for name_index, value in a.pairs:
        out += struct.pack(">H", name_index)
        _write_element_value(out, value)


def _write_element_value(out: bytearray, v: ElementValue) -> None:
    out.append(v.tag)
    if v.nested is not None:
        _write_annotation(out, v.nested)
    elif v.values is not None:
        out += struct.pack(">H", len(v.values))
        for item in v.values:
            _write_element_value(out, item)
    else:
        for index in v.indices:
            out += struct.pack(">H", index)


# -- class-level operations ---------------------------------------------------

def class_annotations(cf: ClassFile) -> tuple[Annotation, ...]:
    """All annotations from the class's runtime-visible attribute(s), in order."""
    collected: list[Annotation] = []
    for attr in _visible_annotation_attrs(cf):
        collected.extend(parse_annotations_payload(attr.payload))
    return tuple(collected)


def _visible_annotation_attrs(cf: ClassFile) -> list[AttributeRecord]:
    found = []
    for attr in cf.attributes:
        entry = cf.pool.get(attr.name_index)
        if entry is not None and entry.tag == TAG_UTF8 and entry.text == RUNTIME_VISIBLE_ANNOTATIONS:
            found.append(attr)
    return found


def _annotation_descriptor(cf: ClassFile, a: Annotation) -> str | None:
    entry = cf.pool.get(a.type_index)
    if entry is None or entry.tag != TAG_UTF8:
        return None
    return entry.text


def inject_annotation(
    cf: ClassFile,
    gav: GavCoordinate,
    descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR,
    on_existing: OnExisting = OnExisting.ERROR,
) -> ClassFile:
    """Return a copy of `cf` carrying the coordinate annotation.

    Existing pool entries keep their indices (new ones are only appended),
    annotations of other types are preserved, and the result has exactly one
    runtime-visible-annotations attribute regardless of how many the input
    had. `cf` itself is left untouched.
    """
    _check_descriptor(descriptor)
    out = copy_class(cf)

    existing_attrs = _visible_annotation_attrs(out)
    kept: list[Annotation] = []
    for attr in existing_attrs:
        for a in parse_annotations_payload(attr.payload):
            if _annotation_descriptor(out, a) == descriptor:
                if on_existing is OnExisting.ERROR:
                    raise AlreadyAnnotated(descriptor)
                continue  # REPLACE drops the old instance
            kept.append(a)

    pool = out.pool
    new_annotation = Annotation(
        type_index=pool.intern_utf8(descriptor),
        pairs=tuple(
            (pool.intern_utf8(name), ElementValue(_STRING_TAG, (pool.intern_utf8(value),)))
            for name, value in ((ELEMENT_GROUP, gav.group),
                                (ELEMENT_ARTIFACT, gav.artifact),
                                (ELEMENT_VERSION, gav.version))
        ),
    )
    payload = serialize_annotations_payload(tuple(kept) + (new_annotation,))

    if existing_attrs:
        merged = AttributeRecord(existing_attrs[0].name_index, payload)
        new_attrs = []
        for attr in out.attributes:
            if attr is existing_attrs[0]:
                new_attrs.append(merged)
            elif attr not in existing_attrs:
                new_attrs.append(attr)
        attributes = tuple(new_attrs)
    else:
        name_index = pool.intern_utf8(RUNTIME_VISIBLE_ANNOTATIONS)
        attributes = out.attributes + (AttributeRecord(name_index, payload),)

    return replace(out, attributes=attributes)


def read_annotation(cf: ClassFile, descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR) -> GavCoordinate | None:
    """Extract the coordinate from the first descriptor-matching annotation.

    Returns None when no matching annotation exists. A matching annotation
    that lacks any of the three string elements is malformed, not absent.
    """
    for a in class_annotations(cf):
        if _annotation_descriptor(cf, a) != descriptor:
            continue
        elements: dict[str, str] = {}
        for name_index, value in a.pairs:
            entry = cf.pool.get(name_index)
            if entry is None or entry.tag != TAG_UTF8:
                raise MalformedAnnotation("element name index does not resolve to Utf8")
            name = entry.text
            if name not in (ELEMENT_GROUP, ELEMENT_ARTIFACT, ELEMENT_VERSION):
                continue
            if value.tag != _STRING_TAG:
                raise MalformedAnnotation(f"element {name} is not a string constant")
            const = cf.pool.get(value.indices[0])
            if const is None or const.tag != TAG_UTF8:
                raise MalformedAnnotation(f"element {name} value index does not resolve to Utf8")
            elements[name] = const.text
        missing = [n for n in (ELEMENT_GROUP, ELEMENT_ARTIFACT, ELEMENT_VERSION) if n not in elements]
        if missing:
            raise MalformedAnnotation(f"annotation missing element(s): {', '.join(missing)}")
        return GavCoordinate(
            group=elements[ELEMENT_GROUP],
            artifact=elements[ELEMENT_ARTIFACT],
            version=elements[ELEMENT_VERSION],
        )
    return None


def _check_descriptor(descriptor: str) -> None:
    if not (descriptor.startswith("L") and descriptor.endswith(";") and len(descriptor) > 2):
        raise ValueError(f"not an object field descriptor: {descriptor!r}")


def injection_growth_bound(gav: GavCoordinate, descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR) -> int:
    """Worst-case byte growth of serialize(inject(cf)) over serialize(cf)."""
    return INJECTION_BASE_OVERHEAD + len(mutf8.encode(descriptor)) + sum(
        len(mutf8.encode(s)) for s in (gav.group, gav.artifact, gav.version)
    )
