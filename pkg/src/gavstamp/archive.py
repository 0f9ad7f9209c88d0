"""Rewrite dependency archives: annotate classes, strip signing material.

Output archives are deterministic: entry timestamps are pinned to a fixed
epoch, metadata fields are pinned, and every entry is re-compressed with
one fixed method and level. Byte-size accounting in reports uses
uncompressed entry sizes, so growth is attributable to annotation material
alone.
"""

from __future__ import annotations

import logging
import zipfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .annotations import (
    DEFAULT_ANNOTATION_DESCRIPTOR,
    OnExisting,
    inject_annotation,
)
from .classfile import parse_class, serialize_class
from .coordinates import GavCoordinate
from .errors import ClassFileError, CorruptArchive, MalformedManifest

log = logging.getLogger(__name__)

MANIFEST_PATH = "META-INF/MANIFEST.MF"

# Fixed DOS timestamp for every output entry (ZIP's epoch).
FIXED_ENTRY_TIME = (1980, 1, 1, 0, 0, 0)
_COMPRESS_LEVEL = 6

_SIGNATURE_SUFFIXES = (".sf", ".rsa", ".dsa", ".ec")


class EntryKind(Enum):
    CLASS = "class"
    MANIFEST = "manifest"
    SIGNATURE = "signature"
    OTHER = "other"


def classify_entry(name: str) -> EntryKind:
    """Classify one archive entry path.

    Precedence on pathological names: manifest (exact match), then
    signature patterns, then the .class suffix, then other.
    """
    if name == MANIFEST_PATH:
        return EntryKind.MANIFEST
    if _is_signature_entry(name):
        return EntryKind.SIGNATURE
    if name.endswith(".class"):
        return EntryKind.CLASS
    return EntryKind.OTHER


def _is_signature_entry(name: str) -> bool:
    # signature files live directly under META-INF/, never in subdirectories
    if not name.startswith("META-INF/"):
        return False
    rest = name[len("META-INF/"):]
    if "/" in rest or not rest:
        return False
    if rest.upper().startswith("SIG-"):
        return True
    return rest.lower().endswith(_SIGNATURE_SUFFIXES)


@dataclass
class JarReport:
    """Per-archive embedding tally; byte counts are uncompressed sums."""

    gav: GavCoordinate
    classes_total: int = 0
    classes_annotated: int = 0
    classes_skipped: int = 0
    signature_entries_removed: int = 0
    bytes_before: int = 0
    bytes_after: int = 0


# -- manifest sanitization ------------------------------------------------------

def sanitize_manifest(data: bytes) -> bytes:
    """Drop signature-related attributes from a JAR manifest.

    Removes attributes whose name ends in -Digest or -Digest-Manifest and
    the Magic attribute (case-insensitive, per manifest conventions), then
    drops per-entry sections left with nothing but their Name header.
    Retained content keeps its original bytes, wrapping included.
    """
    sections = _split_sections(data)
    out = bytearray()
    for i, section in enumerate(sections):
        kept = [record for record in section.records if not _is_signature_attribute(record.name)]
        if i > 0 and len(kept) == 1 and kept[0].name.lower() == b"name":
            continue
        for record in kept:
            for line in record.lines:
                out += line
        out += section.trailer
    return bytes(out)


def _is_signature_attribute(name: bytes) -> bool:
    lowered = name.lower()
    return (
        lowered.endswith(b"-digest")
        or lowered.endswith(b"-digest-manifest")
        or lowered == b"magic"
    )


@dataclass
class _Record:
    name: bytes
    lines: list[bytes]


@dataclass
class _Section:
    records: list[_Record]
    trailer: bytes  # the blank line(s) closing the section, verbatim


def _split_sections(data: bytes) -> list[_Section]:
    sections: list[_Section] = []
    records: list[_Record] = []
    trailer = bytearray()
    for number, line in enumerate(data.splitlines(keepends=True), start=1):
        stripped = line.rstrip(b"\r\n")
        if not stripped:
            trailer += line
            continue
        if trailer:
            sections.append(_Section(records, bytes(trailer)))
            records, trailer = [], bytearray()
        if line.startswith(b" "):
            if not records:
                raise MalformedManifest(number, "continuation line with no preceding attribute")
            records[-1].lines.append(line)
            continue
        name, sep, _ = stripped.partition(b":")
        if not sep:
            raise MalformedManifest(number, "attribute line without a colon")
        records.append(_Record(name, [line]))
    if records or trailer:
        sections.append(_Section(records, bytes(trailer)))
    return sections


# -- archive rewriting ---------------------------------------------------------

def _fresh_info(name: str) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=FIXED_ENTRY_TIME)
    info.create_system = 3  # unix, regardless of host platform
    if name.endswith("/"):
        info.external_attr = (0o40755 << 16) | 0x10
        info.compress_type = zipfile.ZIP_STORED
    else:
        info.external_attr = 0o644 << 16
        info.compress_type = zipfile.ZIP_DEFLATED
    return info


def _write_entry(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    zf.writestr(_fresh_info(name), data, compresslevel=_COMPRESS_LEVEL)


def is_module_descriptor(name: str) -> bool:
    return name.rsplit("/", 1)[-1] == "module-info.class"


def process_jar(
    src: Path | str,
    dst: Path | str,
    gav: GavCoordinate,
    *,
    descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR,
    on_existing: OnExisting = OnExisting.ERROR,
    lenient: bool = True,
) -> JarReport:
    """Rewrite one dependency archive with every class annotated as `gav`.

    Signature entries are dropped, the manifest is sanitized, everything
    else is copied byte-identically in the original entry order.
    """
    report = JarReport(gav=gav)
    try:
        src_zip = zipfile.ZipFile(src)
    except (zipfile.BadZipFile, OSError) as exc:
        raise CorruptArchive(str(src), str(exc)) from None

    Path(dst).parent.mkdir(parents=True, exist_ok=True)
    with src_zip, zipfile.ZipFile(dst, "w") as out:
        for info in src_zip.infolist():
            name = info.filename
            report.bytes_before += info.file_size
            if name.endswith("/"):
                _write_entry(out, name, b"")
                continue
            try:
                data = src_zip.read(info)
            except zipfile.BadZipFile as exc:
                raise CorruptArchive(str(src), f"{name}: {exc}") from None

            kind = classify_entry(name)
            if kind is EntryKind.SIGNATURE:
                report.signature_entries_removed += 1
                continue
            if kind is EntryKind.MANIFEST:
                data = sanitize_manifest(data)
            elif kind is EntryKind.CLASS:
                report.classes_total += 1
                if is_module_descriptor(name):
                    report.classes_skipped += 1
                else:
                    try:
                        cf = inject_annotation(parse_class(data), gav,
                                               descriptor=descriptor, on_existing=on_existing)
                        data = serialize_class(cf)
                        report.classes_annotated += 1
                    except ClassFileError as exc:
                        if not lenient:
                            raise
                        log.warning("%s: %s copied without annotation: %s", src, name, exc)
                        report.classes_skipped += 1
            _write_entry(out, name, data)
            report.bytes_after += len(data)
    return report


def merge_archives(inputs: list[Path | str], output: Path | str) -> None:
    """Union of input archives; first occurrence wins on duplicate names.

    Signature entries never survive the merge.
    """
    if not inputs:
        raise ValueError("merge_archives needs at least one input")
    seen: set[str] = set()
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(output, "w") as out:
        for src in inputs:
            try:
                src_zip = zipfile.ZipFile(src)
            except (zipfile.BadZipFile, OSError) as exc:
                raise CorruptArchive(str(src), str(exc)) from None
            with src_zip:
                for info in src_zip.infolist():
                    name = info.filename
                    if classify_entry(name) is EntryKind.SIGNATURE:
                        continue
                    if name in seen:
                        log.warning("duplicate entry %s: keeping the copy from an earlier input", name)
                        continue
                    seen.add(name)
                    data = b"" if name.endswith("/") else src_zip.read(info)
                    _write_entry(out, name, data)
