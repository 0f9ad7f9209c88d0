"""Ingest the resolved dependency universe.

Consumes the colon-separated dependency-list text that build tools print,
or a plain CSV of coordinates, and resolves coordinates to archives in a
local repository directory layout. Dependency resolution itself (version
mediation) happens upstream; this module only reads its result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .coordinates import GavCoordinate
from .errors import ArtifactNotFound, ConflictingVersions, MalformedRow


class Scope(Enum):
    COMPILE = "compile"
    RUNTIME = "runtime"
    PROVIDED = "provided"
    TEST = "test"
    SYSTEM = "system"


# Scopes whose archives end up on the runtime classpath and get embedded.
RUNTIME_SCOPES = frozenset({Scope.COMPILE, Scope.RUNTIME, Scope.SYSTEM})


@dataclass(frozen=True)
class DependencyEntry:
    gav: GavCoordinate
    scope: Scope = Scope.RUNTIME
    path: Path | None = None
    classifier: str | None = None


@dataclass(frozen=True)
class DependencyManifest:
    """The resolved dependency set; one version per (group, artifact)."""

    entries: tuple[DependencyEntry, ...]

    def __post_init__(self) -> None:
        versions: dict[tuple[str, str], str] = {}
        for entry in self.entries:
            key = (entry.gav.group, entry.gav.artifact)
            seen = versions.setdefault(key, entry.gav.version)
            if seen != entry.gav.version:
                raise ConflictingVersions(key[0], key[1], (seen, entry.gav.version))

    def __len__(self) -> int:
        return len(self.entries)

    def filtered(self, scopes: frozenset[Scope] = RUNTIME_SCOPES) -> "DependencyManifest":
        return DependencyManifest(tuple(e for e in self.entries if e.scope in scopes))

    def runtime_entries(self) -> tuple[DependencyEntry, ...]:
        return self.filtered().entries

    def gavs(self) -> tuple[GavCoordinate, ...]:
        return tuple(e.gav for e in self.entries)


_SCOPE_NAMES = "|".join(s.value for s in Scope)
_TOKEN = r"[A-Za-z0-9_.\-]+"
_DEP_PATTERN = re.compile(
    rf"(?<![\w.:\-])"
    rf"(?P<group>{_TOKEN}):(?P<artifact>{_TOKEN}):(?P<packaging>{_TOKEN}):"
    rf"(?:(?P<classifier>{_TOKEN}):)?"
    rf"(?P<version>{_TOKEN}):(?P<scope>{_SCOPE_NAMES})(?![\w\-])"
)


def parse_dependency_list(text: str) -> DependencyManifest:
    """Parse dependency-list output into a manifest.

    Lines that do not contain a group:artifact:packaging[:classifier]:version:scope
    coordinate are ignored, so raw build logs can be fed in unfiltered.
    Exact duplicates collapse; two versions of one artifact are an error.
    """
    entries: dict[tuple[str, str], DependencyEntry] = {}
    for line in text.splitlines():
        match = _DEP_PATTERN.search(line)
        if not match:
            continue
        gav = GavCoordinate(match["group"], match["artifact"], match["version"])
        key = (gav.group, gav.artifact)
        previous = entries.get(key)
        if previous is not None:
            if previous.gav.version != gav.version:
                raise ConflictingVersions(gav.group, gav.artifact,
                                          (previous.gav.version, gav.version))
            continue
        entries[key] = DependencyEntry(
            gav=gav,
            scope=Scope(match["scope"]),
            classifier=match["classifier"],
        )
    return DependencyManifest(tuple(entries.values()))


def parse_csv_manifest(text: str) -> DependencyManifest:
    """Parse "group,artifact,version[,path]" rows; scope defaults to runtime."""
    entries: dict[tuple[str, str], DependencyEntry] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (3, 4):
            raise MalformedRow(number, line)
        try:
            gav = GavCoordinate(parts[0], parts[1], parts[2])
        except ValueError:
            raise MalformedRow(number, line) from None
        path = Path(parts[3]) if len(parts) == 4 and parts[3] else None
        key = (gav.group, gav.artifact)
        previous = entries.get(key)
        if previous is not None:
            if previous.gav.version != gav.version:
                raise ConflictingVersions(gav.group, gav.artifact,
                                          (previous.gav.version, gav.version))
            continue
        entries[key] = DependencyEntry(gav=gav, path=path)
    return DependencyManifest(tuple(entries.values()))


def resolve_artifact_path(
    repo_root: Path | str,
    gav: GavCoordinate,
    classifier: str | None = None,
) -> Path:
    """Locate the archive for a coordinate in a local repository layout."""
    suffix = f"-{classifier}" if classifier else ""
    path = (
        Path(repo_root)
        / gav.group.replace(".", "/")
        / gav.artifact
        / gav.version
        / f"{gav.artifact}-{gav.version}{suffix}.jar"
    )
    if not path.is_file():
        raise ArtifactNotFound(str(path))
    return path
