"""Exception types raised across the toolchain."""

from __future__ import annotations


class GavstampError(Exception):
    """Base class for all errors raised by this package."""


# -- class-file layer ------------------------------------------------------

class ClassFileError(GavstampError):
    """Base class for class-file parse/serialize failures."""


class BadMagic(ClassFileError):
    def __init__(self, found: int):
        super().__init__(f"bad magic 0x{found:08X}, expected 0xCAFEBABE")
        self.found = found


class TruncatedInput(ClassFileError):
    def __init__(self, offset: int, wanted: int):
        super().__init__(f"input truncated at byte offset {offset} (wanted {wanted} more bytes)")
        self.offset = offset
        self.wanted = wanted


class TrailingData(ClassFileError):
    def __init__(self, offset: int, extra: int):
        super().__init__(f"{extra} trailing bytes after class structure ends at offset {offset}")
        self.offset = offset
        self.extra = extra


class UnknownConstantTag(ClassFileError):
    def __init__(self, tag: int, offset: int):
        super().__init__(f"unknown constant-pool tag {tag} at byte offset {offset}")
        self.tag = tag
        self.offset = offset


class UnsupportedMajorVersion(ClassFileError):
    def __init__(self, version: int):
        super().__init__(f"unsupported class-file major version {version}")
        self.version = version


class IndexOutOfPool(ClassFileError):
    def __init__(self, index: int, context: str = ""):
        where = f" ({context})" if context else ""
        super().__init__(f"constant-pool index {index} does not resolve{where}")
        self.index = index


class PoolOverflow(ClassFileError):
    def __init__(self) -> None:
        super().__init__("constant pool full: 16-bit index space exhausted")


class AttributeTooLarge(ClassFileError):
    def __init__(self, size: int):
        super().__init__(f"attribute payload of {size} bytes exceeds the 32-bit length field")
        self.size = size


class AlreadyAnnotated(ClassFileError):
    def __init__(self, descriptor: str):
        super().__init__(f"class already carries a {descriptor} annotation")
        self.descriptor = descriptor


class MalformedAnnotation(ClassFileError):
    """Provenance annotation present but missing elements or non-string values."""


# -- archive layer ----------------------------------------------------------

class ArchiveError(GavstampError):
    """Base class for JAR/ZIP processing failures."""


class CorruptArchive(ArchiveError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class MalformedManifest(ArchiveError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"manifest line {line_number}: {reason}")
        self.line_number = line_number


# -- dependency manifest layer ----------------------------------------------

class ManifestError(GavstampError):
    """Base class for dependency-manifest ingestion failures."""


class ConflictingVersions(ManifestError):
    def __init__(self, group: str, artifact: str, versions: tuple[str, str]):
        super().__init__(
            f"{group}:{artifact} appears with conflicting versions {versions[0]} and {versions[1]}"
        )
        self.group = group
        self.artifact = artifact
        self.versions = versions


class MalformedRow(ManifestError):
    def __init__(self, line_number: int, line: str):
        super().__init__(f"malformed manifest row at line {line_number}: {line!r}")
        self.line_number = line_number
        self.line = line


class ArtifactNotFound(ManifestError):
    def __init__(self, path: str):
        super().__init__(f"no archive at {path}")
        self.path = path


# -- analysis layer -----------------------------------------------------------

class AnalysisError(GavstampError):
    """Base class for verification/introspection failures."""


class UntriggeredNotSubset(AnalysisError):
    def __init__(self) -> None:
        super().__init__("untriggered set contains coordinates outside the ground truth")


class ZeroBaseline(AnalysisError):
    def __init__(self) -> None:
        super().__init__("size baseline must be positive")


# -- pipeline layer -----------------------------------------------------------

class EmbedFailure(GavstampError):
    """Raised in strict mode when embedding any archive fails."""

    def __init__(self, failures: list[tuple[str, str]]):
        lines = ", ".join(f"{what}: {why}" for what, why in failures)
        super().__init__(f"embedding failed for {len(failures)} archive(s): {lines}")
        self.failures = failures
