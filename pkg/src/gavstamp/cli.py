"""Command-line entry point.

Subcommands follow the pipeline's phases: embed provenance, verify the
result statically, introspect a class-load trace, or dump one class file.
Exit codes are stable for CI: 0 success, 1 operation failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .analysis import (
    introspect,
    parse_load_log,
    scan_annotations,
    verify_completeness,
    write_runtime_csv,
)
from .annotations import DEFAULT_ANNOTATION_DESCRIPTOR, OnExisting, read_annotation
from .classfile import parse_class
from .coordinates import GavCoordinate
from .depmanifest import (
    DependencyManifest,
    Scope,
    parse_csv_manifest,
    parse_dependency_list,
)
from .embedder import EmbedReport, embed_all
from .errors import GavstampError

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gavstamp",
        description="Embed dependency coordinates into JVM class files and read them back.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="annotate dependency archives and project classes")
    _add_manifest_args(embed)
    embed.add_argument("--repo", type=Path, help="local repository root to resolve archives in")
    embed.add_argument("--classes", type=Path, required=True, help="project class directory")
    embed.add_argument("--project-gav", required=True, metavar="G:A:V",
                       help="coordinate stamped onto the project's own classes")
    embed.add_argument("--out", type=Path, required=True, help="augmented repository directory")
    embed.add_argument("--descriptor", default=DEFAULT_ANNOTATION_DESCRIPTOR)
    embed.add_argument("--force", action="store_true",
                       help="replace an existing provenance annotation instead of failing")
    embed.add_argument("--strict", action="store_true",
                       help="abort on the first failing archive or class")
    embed.add_argument("--scopes", default="compile,runtime,system",
                       help="comma-separated dependency scopes to embed")
    embed.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    embed.add_argument("--report", type=Path, help="machine-readable report path")

    verify = sub.add_parser("verify", help="check embedding completeness against a ground truth")
    _add_manifest_args(verify)
    _add_index_args(verify)
    verify.add_argument("--descriptor", default=DEFAULT_ANNOTATION_DESCRIPTOR)
    verify.add_argument("--scopes", default="compile,runtime,system")

    intro = sub.add_parser("introspect", help="map a class-load log to the dependencies used")
    intro.add_argument("--log", required=True, help="load-log path, or - for stdin")
    _add_index_args(intro)
    intro.add_argument("--csv", type=Path, help="output CSV path (defaults to stdout)")
    intro.add_argument("--sorted", action="store_true", help="sort rows instead of first-seen order")
    intro.add_argument("--descriptor", default=DEFAULT_ANNOTATION_DESCRIPTOR)

    inspect = sub.add_parser("inspect-class", help="dump one class file's provenance")
    inspect.add_argument("classfile", type=Path)
    inspect.add_argument("--descriptor", default=DEFAULT_ANNOTATION_DESCRIPTOR)
    return parser


def _add_manifest_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--deps", type=Path, help="dependency-list text file")
    parser.add_argument("--manifest-csv", type=Path, help="group,artifact,version[,path] file")


def _add_index_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--archives", type=Path, nargs="*", default=[],
                        help="archives to scan")
    parser.add_argument("--repo-dir", type=Path,
                        help="directory scanned recursively for *.jar")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {
        "embed": cmd_embed,
        "verify": cmd_verify,
        "introspect": cmd_introspect,
        "inspect-class": cmd_inspect_class,
    }[args.command]
    try:
        return handler(args, parser)
    except GavstampError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _load_manifest(args: argparse.Namespace, parser: argparse.ArgumentParser) -> DependencyManifest:
    if bool(args.deps) == bool(args.manifest_csv):
        parser.error("exactly one of --deps or --manifest-csv is required")
    if args.deps:
        return parse_dependency_list(args.deps.read_text())
    return parse_csv_manifest(args.manifest_csv.read_text())


def _parse_scopes(text: str, parser: argparse.ArgumentParser) -> frozenset[Scope]:
    try:
        return frozenset(Scope(part.strip()) for part in text.split(",") if part.strip())
    except ValueError:
        parser.error(f"unknown scope in {text!r}")


def _collect_archives(args: argparse.Namespace, parser: argparse.ArgumentParser) -> list[Path]:
    archives = list(args.archives)
    if args.repo_dir:
        if not args.repo_dir.is_dir():
            parser.error(f"not a directory: {args.repo_dir}")
        archives.extend(sorted(args.repo_dir.rglob("*.jar")))
    if not archives:
        parser.error("no archives given (use --archives and/or --repo-dir)")
    return archives


def cmd_embed(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    manifest = _load_manifest(args, parser)
    scopes = _parse_scopes(args.scopes, parser)
    needs_repo = any(e.path is None for e in manifest.filtered(scopes).entries)
    if needs_repo and args.repo is None:
        parser.error("--repo is required when the manifest has no explicit archive paths")
    if args.repo is not None and not args.repo.is_dir():
        parser.error(f"not a directory: {args.repo}")
    if not args.classes.is_dir():
        parser.error(f"not a directory: {args.classes}")
    try:
        project_gav = GavCoordinate.parse(args.project_gav)
    except ValueError as exc:
        parser.error(str(exc))

    report = embed_all(
        manifest,
        args.classes,
        project_gav,
        args.out,
        repo_root=args.repo,
        descriptor=args.descriptor,
        on_existing=OnExisting.REPLACE if args.force else OnExisting.ERROR,
        scopes=scopes,
        strict=args.strict,
        jobs=max(1, args.jobs),
    )

    report_path = args.report or (args.out / "embed-report.txt")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(format_embed_report(report))

    totals = report.totals()
    print(f"dependencies embedded: {report.dependencies_embedded:,}/{report.dependencies_expected:,}")
    print(f"classes annotated:     {report.classes_annotated:,}/{report.classes_total:,}")
    print(f"space overhead:        {totals['space_overhead_percent']}%")
    print(f"wall time:             {report.wall_time:.2f}s")
    print(f"report written to {report_path}")
    if report.failures:
        print("failed archives:", file=sys.stderr)
        for what, why in report.failures:
            print(f"  {what}: {why}", file=sys.stderr)
        return 1
    return 0


def format_embed_report(report: EmbedReport) -> str:
    lines = [
        f"project_gav={report.project_gav}",
        f"repo_dir={report.repo_dir}",
        f"wall_time_seconds={report.wall_time:.3f}",
        "size_convention=uncompressed",
    ]
    lines += [f"{key}={value}" for key, value in report.totals().items()]
    for jar in report.per_jar:
        lines.append(
            f"jar={jar.gav} classes={jar.classes_annotated}/{jar.classes_total} "
            f"skipped={jar.classes_skipped} signatures_removed={jar.signature_entries_removed} "
            f"bytes={jar.bytes_before}->{jar.bytes_after}"
        )
    for what, why in report.failures:
        lines.append(f"failed={what} reason={why}")
    return "".join(line + "\n" for line in lines)


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    manifest = _load_manifest(args, parser)
    archives = _collect_archives(args, parser)
    index = scan_annotations(archives, descriptor=args.descriptor)
    result = verify_completeness(index, manifest, _parse_scopes(args.scopes, parser))
    print(f"dependencies: {result.dep_found:,}/{result.dep_expected:,}")
    print(f"classes:      {result.class_annotated:,}/{result.class_total:,}")
    if result.complete:
        return 0
    for gav in sorted(result.missing_gavs):
        print(f"missing: {gav}", file=sys.stderr)
    for gav in sorted(result.extra_gavs):
        print(f"unexpected: {gav}", file=sys.stderr)
    for name in sorted(index.unannotated):
        print(f"unannotated: {name}", file=sys.stderr)
    return 1


def cmd_introspect(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.log == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.log).read_text(errors="replace")
    archives = _collect_archives(args, parser)
    index = scan_annotations(archives, descriptor=args.descriptor)
    parsed = parse_load_log(text)
    deps = introspect(parsed.events, index)
    csv_text = write_runtime_csv(deps, sort=args.sorted)
    summary = (f"{len(deps)} dependencies detected, {len(deps.unattributed)} classes "
               f"unattributed ({deps.granularity} granularity, "
               f"{parsed.ignored_lines} non-event lines ignored)")
    if args.csv:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        args.csv.write_text(csv_text)
        print(summary)
    else:
        sys.stdout.write(csv_text)
        print(summary, file=sys.stderr)
    return 0


def cmd_inspect_class(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cf = parse_class(args.classfile.read_bytes())
    print(f"class:   {cf.class_name.replace('/', '.')}")
    print(f"version: {cf.major_version}.{cf.minor_version}")
    print(f"pool:    {len(cf.pool)} slots")
    gav = read_annotation(cf, args.descriptor)
    if gav is None:
        print("provenance: none")
    else:
        print(f"provenance: group={gav.group} artefact={gav.artifact} version={gav.version}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
