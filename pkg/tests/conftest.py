"""Shared fixtures: the class-file corpus, jar builders, and a jar signer.

Jar construction here uses zipfile directly rather than the package's own
archive writer, so tests never validate the code under test with itself.
"""

from __future__ import annotations

import base64
import hashlib
import zipfile
from dataclasses import dataclass
from pathlib import Path

import pytest

from gavstamp.classfile import parse_class
from gavstamp.coordinates import GavCoordinate

CORPUS_DIR = Path(__file__).parent / "fixtures" / "corpus"


@pytest.fixture(scope="session")
def corpus() -> dict[str, bytes]:
    files = {p.name: p.read_bytes() for p in sorted(CORPUS_DIR.glob("*.class"))}
    assert len(files) >= 50, "fixture corpus too small; run tests/fixtures/build_corpus.py"
    return files


def class_entry_path(data: bytes) -> str:
    """Archive entry path matching the class's internal name."""
    return parse_class(data).class_name + ".class"


def make_jar(path: Path, entries: dict[str, bytes]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, data in entries.items():
            zf.writestr(name, data)
    return path


def jar_entries(path: Path) -> dict[str, bytes]:
    with zipfile.ZipFile(path) as zf:
        return {name: zf.read(name) for name in zf.namelist()}


PLAIN_MANIFEST = b"Manifest-Version: 1.0\r\nCreated-By: fixture\r\n\r\n"


def dep_jar_from_corpus(path: Path, corpus: dict[str, bytes], class_names: list[str],
                        resources: dict[str, bytes] | None = None) -> Path:
    entries: dict[str, bytes] = {"META-INF/MANIFEST.MF": PLAIN_MANIFEST}
    for name in class_names:
        data = corpus[name]
        entries[class_entry_path(data)] = data
    entries.update(resources or {})
    return make_jar(path, entries)


# -- synthetic project ---------------------------------------------------------

ALPHA_GAV = GavCoordinate("org.example.alpha", "alpha-lib", "1.0.0")
BETA_GAV = GavCoordinate("org.example.beta", "beta-lib", "2.1.3")
GAMMA_GAV = GavCoordinate("com.example.gamma", "gamma-util", "0.9")
PROJECT_GAV = GavCoordinate("org.example.app", "app-core", "1.0.0")

DEPENDENCY_LIST = """\
[INFO] --- dependency:3.6.1:list (default-cli) ---
[INFO]
[INFO] The following files have been resolved:
[INFO]    org.example.alpha:alpha-lib:jar:1.0.0:compile
[INFO]    org.example.beta:beta-lib:jar:2.1.3:runtime
[INFO]    com.example.gamma:gamma-util:jar:0.9:compile
[INFO]    org.example.testonly:mock-kit:jar:5.0:test
[INFO]
[INFO] BUILD SUCCESS
"""


@dataclass
class SyntheticProject:
    repo: Path
    deps_file: Path
    classes_dir: Path
    out_dir: Path
    dep_gavs: tuple[GavCoordinate, ...]
    dep_jar_paths: dict[GavCoordinate, Path]
    dep_class_counts: dict[GavCoordinate, int]  # annotatable classes per dep
    project_class_count: int

    @property
    def annotatable_classes(self) -> int:
        return sum(self.dep_class_counts.values()) + self.project_class_count


def _repo_jar_path(repo: Path, gav: GavCoordinate) -> Path:
    return (repo / gav.group.replace(".", "/") / gav.artifact / gav.version
            / f"{gav.artifact}-{gav.version}.jar")


@pytest.fixture
def synthetic_project(tmp_path: Path, corpus: dict[str, bytes]) -> SyntheticProject:
    repo = tmp_path / "repo"
    spec = {
        ALPHA_GAV: (["empty_v52.class", "plain_v52.class", "constants_v52.class"],
                    {"alpha.properties": b"color=red\n"}),
        BETA_GAV: (["empty_v53.class", "plain_v53.class", "constants_v53.class",
                    "marked_v52.class"],
                   {"org/example/beta/data.bin": bytes(range(64))}),
        GAMMA_GAV: (["empty_v54.class", "plain_v54.class", "constants_v54.class"],
                    {}),
    }
    jar_paths: dict[GavCoordinate, Path] = {}
    counts: dict[GavCoordinate, int] = {}
    for gav, (class_names, resources) in spec.items():
        jar_paths[gav] = dep_jar_from_corpus(_repo_jar_path(repo, gav), corpus,
                                             class_names, resources)
        counts[gav] = len(class_names)
    # gamma additionally ships a module descriptor, which is copied, not annotated
    gamma_entries = jar_entries(jar_paths[GAMMA_GAV])
    gamma_entries["module-info.class"] = corpus["module-info_v53.class"]
    make_jar(jar_paths[GAMMA_GAV], gamma_entries)

    classes_dir = tmp_path / "target" / "classes"
    for name in ("worker_v52.class", "iface_v52.class"):
        data = corpus[name]
        target = classes_dir / class_entry_path(data)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)

    deps_file = tmp_path / "deps.txt"
    deps_file.write_text(DEPENDENCY_LIST)
    return SyntheticProject(
        repo=repo,
        deps_file=deps_file,
        classes_dir=classes_dir,
        out_dir=tmp_path / "augmented",
        dep_gavs=(ALPHA_GAV, BETA_GAV, GAMMA_GAV),
        dep_jar_paths=jar_paths,
        dep_class_counts=counts,
        project_class_count=2,
    )


# -- jar signing ---------------------------------------------------------------

def _wrap72(line: bytes) -> bytes:
    """Apply manifest line wrapping: 72-byte lines, continuations with a space."""
    out = bytearray()
    first = True
    while line:
        width = 70 if first else 69
        chunk, line = line[:width], line[width:]
        if not first:
            out += b" "
        out += chunk + b"\r\n"
        first = False
    return bytes(out)


def _digest(data: bytes) -> bytes:
    return base64.b64encode(hashlib.sha256(data).digest())


def sign_jar(src: Path, dst: Path) -> Path:
    """Produce a signed copy of a jar, real PKCS#7 signature included."""
    from cryptography import x509
    from cryptography.hazmat.primitives import hashes, serialization
    from cryptography.hazmat.primitives.asymmetric import rsa
    from cryptography.hazmat.primitives.serialization import pkcs7
    from cryptography.x509.oid import NameOID
    import datetime

    with zipfile.ZipFile(src) as zf:
        entries = {n: zf.read(n) for n in zf.namelist()
                   if n != "META-INF/MANIFEST.MF" and not n.endswith("/")}

    manifest = bytearray(_wrap72(b"Manifest-Version: 1.0"))
    manifest += _wrap72(b"Created-By: fixture signer")
    manifest += _wrap72(b"Implementation-Notes: " + b"retained attribute long enough to "
                        b"wrap across a manifest continuation line boundary for testing")
    manifest += b"\r\n"
    sections: dict[str, bytes] = {}
    for name, data in entries.items():
        section = _wrap72(b"Name: " + name.encode()) \
            + _wrap72(b"SHA-256-Digest: " + _digest(data)) + b"\r\n"
        sections[name] = section
        manifest += section
    manifest_bytes = bytes(manifest)

    sf = bytearray(_wrap72(b"Signature-Version: 1.0"))
    sf += _wrap72(b"SHA-256-Digest-Manifest: " + _digest(manifest_bytes))
    sf += b"\r\n"
    for name, section in sections.items():
        sf += _wrap72(b"Name: " + name.encode())
        sf += _wrap72(b"SHA-256-Digest: " + _digest(section))
        sf += b"\r\n"
    sf_bytes = bytes(sf)

    key = rsa.generate_private_key(public_exponent=65537, key_size=2048)
    subject = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, "throwaway")])
    now = datetime.datetime.now(datetime.timezone.utc)
    cert = (
        x509.CertificateBuilder()
        .subject_name(subject)
        .issuer_name(subject)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(now)
        .not_valid_after(now + datetime.timedelta(days=1))
        .sign(key, hashes.SHA256())
    )
    signature = (
        pkcs7.PKCS7SignatureBuilder()
        .set_data(sf_bytes)
        .add_signer(cert, key, hashes.SHA256())
        .sign(serialization.Encoding.DER,
              [pkcs7.PKCS7Options.DetachedSignature, pkcs7.PKCS7Options.Binary])
    )

    dst.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(dst, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("META-INF/MANIFEST.MF", manifest_bytes)
        zf.writestr("META-INF/SIGNER.SF", sf_bytes)
        zf.writestr("META-INF/SIGNER.RSA", signature)
        for name, data in entries.items():
            zf.writestr(name, data)
    return dst
