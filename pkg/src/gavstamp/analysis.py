"""Read embedded provenance back out, statically and from load traces.

Static side: index every class in a set of archives by its embedded
coordinate and compare against the expected dependency set. Dynamic side:
parse a class-load trace, attribute each loaded class through the index,
and aggregate the coordinates actually touched by the run.

Detection granularity is the class load. The JVM loads classes that are
referenced without ever executing them (type checks, declared exceptions),
so a load-derived dependency set can be a strict superset of the executed
set; reports carry that label.
"""

from __future__ import annotations

import logging
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import DEFAULT_ANNOTATION_DESCRIPTOR, read_annotation
from .archive import is_module_descriptor
from .classfile import parse_class
from .coordinates import GavCoordinate
from .depmanifest import RUNTIME_SCOPES, DependencyManifest, Scope
from .errors import ClassFileError, CorruptArchive, UntriggeredNotSubset, ZeroBaseline

log = logging.getLogger(__name__)

DETECTION_GRANULARITY = "class-load"

_VERSIONED_PREFIX = re.compile(r"^META-INF/versions/\d+/")


def entry_to_binary_name(entry_name: str) -> str:
    """Archive entry path to class binary name; inner classes keep '$'."""
    name = _VERSIONED_PREFIX.sub("", entry_name)
    return name[:-len(".class")].replace("/", ".")


@dataclass
class AnnotationIndex:
    """Class binary name to coordinate, for every class found in the archives."""

    by_class: dict[str, GavCoordinate] = field(default_factory=dict)
    unannotated: set[str] = field(default_factory=set)
    parse_failures: dict[str, str] = field(default_factory=dict)

    def gavs(self) -> frozenset[GavCoordinate]:
        return frozenset(self.by_class.values())

    @property
    def class_total(self) -> int:
        return len(self.by_class) + len(self.unannotated)


def scan_annotations(
    archives: list[Path | str],
    *,
    descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR,
    lenient: bool = True,
) -> AnnotationIndex:
    """Build an AnnotationIndex from archives, deterministically.

    Archives are visited sorted by path, entries in archive order; the
    first occurrence of a class name wins. Module descriptors are excluded
    from both sides of the index.
    """
    index = AnnotationIndex()
    for archive in sorted(archives, key=str):
        try:
            src = zipfile.ZipFile(archive)
        except (zipfile.BadZipFile, OSError) as exc:
            raise CorruptArchive(str(archive), str(exc)) from None
        with src:
            for info in src.infolist():
                name = info.filename
                if name.endswith("/") or not name.endswith(".class"):
                    continue
                if is_module_descriptor(name):
                    continue
                binary_name = entry_to_binary_name(name)
                if binary_name in index.by_class or binary_name in index.unannotated:
                    continue
                try:
                    gav = read_annotation(parse_class(src.read(info)), descriptor)
                except ClassFileError as exc:
                    if not lenient:
                        raise
                    log.warning("%s: %s unreadable: %s", archive, name, exc)
                    index.parse_failures[binary_name] = str(exc)
                    index.unannotated.add(binary_name)
                    continue
                if gav is None:
                    index.unannotated.add(binary_name)
                else:
                    index.by_class[binary_name] = gav
    return index


@dataclass
class CompletenessReport:
    dep_found: int
    dep_expected: int
    class_annotated: int
    class_total: int
    missing_gavs: frozenset[GavCoordinate]
    extra_gavs: frozenset[GavCoordinate]

    @property
    def complete(self) -> bool:
        return self.dep_found == self.dep_expected and self.class_annotated == self.class_total


def verify_completeness(
    index: AnnotationIndex,
    expected: DependencyManifest,
    scopes: frozenset[Scope] = RUNTIME_SCOPES,
) -> CompletenessReport:
    """Compare embedded coordinates against the expected runtime set."""
    expected_gavs = frozenset(e.gav for e in expected.filtered(scopes).entries)
    found = index.gavs()
    return CompletenessReport(
        dep_found=len(found & expected_gavs),
        dep_expected=len(expected_gavs),
        class_annotated=len(index.by_class),
        class_total=index.class_total,
        missing_gavs=expected_gavs - found,
        extra_gavs=found - expected_gavs,
    )


# -- load traces ---------------------------------------------------------------

@dataclass(frozen=True)
class LoadEvent:
    class_name: str
    source: str | None = None


@dataclass
class ParsedLoadLog:
    events: list[LoadEvent]
    ignored_lines: int = 0


_UNIFIED = re.compile(r"\[class,load\]\s+(\S+)\s+source:\s+(\S+)")
_LEGACY = re.compile(r"\[Loaded\s+(\S+)\s+from\s+([^\]]+)\]")


def parse_load_log(text: str) -> ParsedLoadLog:
    """Extract load events from trace output, skipping unrelated noise."""
    parsed = ParsedLoadLog(events=[])
    for line in text.splitlines():
        if not line.strip():
            continue
        match = _UNIFIED.search(line) or _LEGACY.search(line)
        if match:
            parsed.events.append(LoadEvent(match.group(1), match.group(2).strip()))
        else:
            parsed.ignored_lines += 1
    return parsed


@dataclass
class RuntimeDependencySet:
    """Coordinates attributed from a trace, in first-seen order."""

    gavs: tuple[GavCoordinate, ...] = ()
    unattributed: set[str] = field(default_factory=set)
    granularity: str = DETECTION_GRANULARITY

    def __len__(self) -> int:
        return len(self.gavs)


def introspect(events: list[LoadEvent], index: AnnotationIndex) -> RuntimeDependencySet:
    """Map loaded classes to the set of dependencies the run touched.

    A class with no index entry (platform classes, generated proxies) is
    reported as unattributed, never guessed from its package name.
    """
    seen: dict[GavCoordinate, None] = {}
    unattributed: set[str] = set()
    for event in events:
        gav = index.by_class.get(event.class_name)
        if gav is None:
            unattributed.add(event.class_name)
        else:
            seen.setdefault(gav, None)
    return RuntimeDependencySet(gavs=tuple(seen), unattributed=unattributed)


def write_runtime_csv(deps: RuntimeDependencySet, *, sort: bool = False) -> str:
    """One group,artifact,version row per coordinate, no header."""
    rows = [gav.csv_row for gav in deps.gavs]
    if sort:
        rows.sort()
    return "".join(row + "\n" for row in rows)


# -- evaluation metrics ----------------------------------------------------------

@dataclass
class ConfusionReport:
    """Detection counts against a ground truth.

    Negative counts need the operator to say which ground-truth entries the
    workload genuinely never triggers; without that, tn and fn stay None
    (unadjudicated).
    """

    tp: int
    fp: int
    tn: int | None
    fn: int | None
    detected: frozenset[GavCoordinate]
    ground_truth: frozenset[GavCoordinate]
    untriggered: frozenset[GavCoordinate] | None

    @property
    def adjudicated(self) -> bool:
        return self.tn is not None


def classify_detection(
    detected: frozenset[GavCoordinate] | set[GavCoordinate],
    ground_truth: frozenset[GavCoordinate] | set[GavCoordinate],
    untriggered: frozenset[GavCoordinate] | set[GavCoordinate] | None = None,
) -> ConfusionReport:
    detected = frozenset(detected)
    ground_truth = frozenset(ground_truth)
    if untriggered is not None:
        untriggered = frozenset(untriggered)
        if not untriggered <= ground_truth:
            raise UntriggeredNotSubset()
    tp = len(detected & ground_truth)
    fp = len(detected - ground_truth)
    if untriggered is None:
        tn = fn = None
    else:
        undetected = ground_truth - detected
        tn = len(untriggered & undetected)
        fn = len(undetected - untriggered)
    return ConfusionReport(tp=tp, fp=fp, tn=tn, fn=fn, detected=detected,
                           ground_truth=ground_truth, untriggered=untriggered)


def size_overhead(before: int, after: int) -> float:
    """Growth percentage, to one decimal place."""
    if before <= 0:
        raise ZeroBaseline()
    return round((after - before) / before * 100, 1)
