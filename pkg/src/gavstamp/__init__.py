"""Embed dependency coordinates into JVM class files and read them back.

The build-time half rewrites dependency archives so every class carries a
runtime-visible annotation naming its group, artifact, and version. The
analysis half reads those annotations back: statically, to verify that an
artifact is completely annotated, and dynamically, to map a class-load
trace of a real execution onto the set of dependencies actually used.
"""

from .annotations import (
    DEFAULT_ANNOTATION_DESCRIPTOR,
    OnExisting,
    inject_annotation,
    injection_growth_bound,
    read_annotation,
)
from .archive import (
    EntryKind,
    JarReport,
    classify_entry,
    merge_archives,
    process_jar,
    sanitize_manifest,
)
from .analysis import (
    AnnotationIndex,
    CompletenessReport,
    ConfusionReport,
    LoadEvent,
    RuntimeDependencySet,
    classify_detection,
    introspect,
    parse_load_log,
    scan_annotations,
    size_overhead,
    verify_completeness,
    write_runtime_csv,
)
from .classfile import ClassFile, intern_utf8, parse_class, serialize_class
from .coordinates import GavCoordinate
from .depmanifest import (
    RUNTIME_SCOPES,
    DependencyEntry,
    DependencyManifest,
    Scope,
    parse_csv_manifest,
    parse_dependency_list,
    resolve_artifact_path,
)
from .embedder import EmbedReport, embed_all
from .errors import GavstampError

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ANNOTATION_DESCRIPTOR",
    "RUNTIME_SCOPES",
    "AnnotationIndex",
    "ClassFile",
    "CompletenessReport",
    "ConfusionReport",
    "DependencyEntry",
    "DependencyManifest",
    "EmbedReport",
    "EntryKind",
    "GavCoordinate",
    "GavstampError",
    "JarReport",
    "LoadEvent",
    "OnExisting",
    "RuntimeDependencySet",
    "Scope",
    "classify_detection",
    "classify_entry",
    "embed_all",
    "inject_annotation",
    "injection_growth_bound",
    "intern_utf8",
    "introspect",
    "merge_archives",
    "parse_class",
    "parse_csv_manifest",
    "parse_dependency_list",
    "parse_load_log",
    "process_jar",
    "read_annotation",
    "resolve_artifact_path",
    "sanitize_manifest",
    "scan_annotations",
    "serialize_class",
    "size_overhead",
    "verify_completeness",
    "write_runtime_csv",
]
