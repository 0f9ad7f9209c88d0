"""End-to-end embedding: dependency archives plus the project's own classes.

Each runtime-scoped dependency archive is rewritten into an augmented
repository that mirrors the input layout, so a downstream build can be
pointed at it. Project class files are annotated in place, with the
originals preserved under a sibling backup directory.
"""

from __future__ import annotations

import logging
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import DEFAULT_ANNOTATION_DESCRIPTOR, OnExisting, inject_annotation
from .archive import JarReport, is_module_descriptor, process_jar
from .classfile import parse_class, serialize_class
from .coordinates import GavCoordinate
from .depmanifest import RUNTIME_SCOPES, DependencyEntry, DependencyManifest, Scope, resolve_artifact_path
from .errors import AlreadyAnnotated, ArtifactNotFound, ClassFileError, EmbedFailure, GavstampError

log = logging.getLogger(__name__)

BACKUP_SUFFIX = ".orig"


@dataclass
class EmbedReport:
    project_gav: GavCoordinate
    repo_dir: Path
    per_jar: list[JarReport] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)
    dependencies_expected: int = 0
    project_classes_total: int = 0
    project_classes_annotated: int = 0
    project_classes_skipped: int = 0
    project_bytes_before: int = 0
    project_bytes_after: int = 0
    wall_time: float = 0.0

    @property
    def dependencies_embedded(self) -> int:
        return len(self.per_jar)

    @property
    def classes_total(self) -> int:
        return sum(r.classes_total for r in self.per_jar) + self.project_classes_total

    @property
    def classes_annotated(self) -> int:
        return sum(r.classes_annotated for r in self.per_jar) + self.project_classes_annotated

    @property
    def bytes_before(self) -> int:
        return sum(r.bytes_before for r in self.per_jar) + self.project_bytes_before

    @property
    def bytes_after(self) -> int:
        return sum(r.bytes_after for r in self.per_jar) + self.project_bytes_after

    @property
    def space_overhead_percent(self) -> float:
        if self.bytes_before == 0:
            return 0.0
        return (self.bytes_after - self.bytes_before) / self.bytes_before * 100

    @property
    def complete(self) -> bool:
        return not self.failures and self.dependencies_embedded == self.dependencies_expected

    def totals(self) -> dict[str, object]:
        return {
            "dependencies_embedded": self.dependencies_embedded,
            "dependencies_expected": self.dependencies_expected,
            "classes_annotated": self.classes_annotated,
            "classes_total": self.classes_total,
            "space_overhead_percent": round(self.space_overhead_percent, 1),
        }


def augmented_jar_path(out_dir: Path, entry: DependencyEntry) -> Path:
    gav = entry.gav
    suffix = f"-{entry.classifier}" if entry.classifier else ""
    return (
        out_dir
        / gav.group.replace(".", "/")
        / gav.artifact
        / gav.version
        / f"{gav.artifact}-{gav.version}{suffix}.jar"
    )


def embed_all(
    manifest: DependencyManifest,
    project_classes: Path | str,
    project_gav: GavCoordinate,
    out_dir: Path | str,
    *,
    repo_root: Path | str | None = None,
    descriptor: str = DEFAULT_ANNOTATION_DESCRIPTOR,
    on_existing: OnExisting = OnExisting.ERROR,
    scopes: frozenset[Scope] = RUNTIME_SCOPES,
    strict: bool = False,
    jobs: int = 1,
) -> EmbedReport:
    """Embed every runtime-scoped dependency and the project's classes.

    In lenient mode a failing archive is recorded and the rest proceed;
    strict mode raises EmbedFailure if any archive failed. A class that is
    already annotated always aborts the run: it signals a pipeline that is
    embedding twice.
    """
    out_dir = Path(out_dir)
    project_classes = Path(project_classes)
    started = time.perf_counter()

    wanted = manifest.filtered(scopes).entries
    report = EmbedReport(project_gav=project_gav, repo_dir=out_dir,
                         dependencies_expected=len(wanted))

    work: list[tuple[DependencyEntry, Path, Path]] = []
    for entry in wanted:
        try:
            if entry.path is not None:
                src = entry.path
                if not src.is_file():
                    raise ArtifactNotFound(str(src))
            elif repo_root is not None:
                src = resolve_artifact_path(repo_root, entry.gav, entry.classifier)
            else:
                raise ArtifactNotFound(
                    f"{entry.gav}: no explicit path and no repository root configured")
        except ArtifactNotFound as exc:
            if strict:
                raise
            report.failures.append((str(entry.gav), str(exc)))
            continue
        work.append((entry, Path(src), augmented_jar_path(out_dir, entry)))

    def run_one(item: tuple[DependencyEntry, Path, Path]) -> JarReport | GavstampError:
        entry, src, dst = item
        try:
            return process_jar(src, dst, entry.gav, descriptor=descriptor,
                               on_existing=on_existing, lenient=not strict)
        except AlreadyAnnotated:
            raise
        except GavstampError as exc:
            return exc

    if jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, work))
    else:
        outcomes = [run_one(item) for item in work]

    for (entry, src, _), outcome in zip(work, outcomes):
        if isinstance(outcome, JarReport):
            report.per_jar.append(outcome)
        else:
            log.warning("embedding %s failed: %s", src, outcome)
            report.failures.append((str(entry.gav), str(outcome)))

    _embed_project_classes(project_classes, project_gav, report,
                           descriptor=descriptor, on_existing=on_existing, strict=strict)

    report.wall_time = time.perf_counter() - started
    if strict and report.failures:
        raise EmbedFailure(report.failures)
    return report


def _embed_project_classes(
    project_classes: Path,
    project_gav: GavCoordinate,
    report: EmbedReport,
    *,
    descriptor: str,
    on_existing: OnExisting,
    strict: bool,
) -> None:
    if not project_classes.is_dir():
        return
    backup_root = project_classes.with_name(project_classes.name + BACKUP_SUFFIX)
    for path in sorted(project_classes.rglob("*.class")):
        report.project_classes_total += 1
        data = path.read_bytes()
        report.project_bytes_before += len(data)
        if is_module_descriptor(path.as_posix()):
            report.project_classes_skipped += 1
            report.project_bytes_after += len(data)
            continue
        try:
            annotated = serialize_class(
                inject_annotation(parse_class(data), project_gav,
                                  descriptor=descriptor, on_existing=on_existing))
        except AlreadyAnnotated:
            raise
        except ClassFileError as exc:
            if strict:
                raise
            log.warning("%s left unannotated: %s", path, exc)
            report.project_classes_skipped += 1
            report.project_bytes_after += len(data)
            continue
        backup = backup_root / path.relative_to(project_classes)
        if not backup.exists():
            backup.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy2(path, backup)
        path.write_bytes(annotated)
        report.project_classes_annotated += 1
        report.project_bytes_after += len(annotated)
