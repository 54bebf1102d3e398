"""Write a crate to disk as a plain directory, a BagIt bag or a ZIP archive."""

from __future__ import annotations

import hashlib
import os
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path, PurePosixPath
from typing import Iterable, Sequence
from urllib.parse import urlsplit, unquote

from . import ids
from .context import TermContext
from .errors import DestNotEmpty, MissingPayload, PathEscape
from .graph import Classification, CrateGraph, classify_all
from .jsonld import METADATA_FILENAME, serialize_metadata
from .validate import Severity, ValidationReport, Violation

PREVIEW_FILENAME = "ro-crate-preview.html"
BAGIT_TXT = b"BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"
ALGORITHMS = ("sha256", "sha512")
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
_HASH_CHUNK = 1 << 20
_COMPRESSED_SUFFIXES = frozenset(
    ".7z .avi .bz2 .docx .flac .gif .gz .jpeg .jpg .m4a .mkv .mov .mp3 .mp4 .ogg .png "
    ".pptx .tgz .webm .webp .xlsx .xz .zip .zst".split()
)


def check_relative_path(path: str) -> str:
    """Return ``path`` as a clean crate-relative POSIX path or raise PathEscape."""
    if not path or "\\" in path or path.startswith("/") or ids.is_absolute(path):
        raise PathEscape(f"not a crate-relative path: {path!r}")
    parts = PurePosixPath(path).parts
    if any(p == ".." for p in path.split("/")):
        raise PathEscape(f"path leaves the crate: {path!r}")
    clean = "/".join(p for p in parts if p not in ("", "."))
    if not clean:
        raise PathEscape(f"empty path: {path!r}")
    return clean


@dataclass(frozen=True)
class PayloadEntry:
    """One payload file: its place in the crate and where its bytes come from."""

    path: str
    source: bytes | Path

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", check_relative_path(self.path))
        if not isinstance(self.source, bytes):
            object.__setattr__(self, "source", Path(self.source))

    @property
    def size(self) -> int:
        if isinstance(self.source, bytes):
            return len(self.source)
        return self.source.stat().st_size

    def read(self) -> bytes:
        return self.source if isinstance(self.source, bytes) else self.source.read_bytes()


@dataclass(frozen=True)
class BagManifest:
    algorithm: str
    entries: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unsupported algorithm {self.algorithm!r}")
        width = hashlib.new(self.algorithm).digest_size * 2
        for digest, path in self.entries:
            if len(digest) != width or not path.startswith("data/"):
                raise ValueError(f"bad manifest entry {digest} {path}")

    def text(self) -> str:
        return "".join(f"{d}  {encode_manifest_path(p)}\n" for d, p in self.entries)


def encode_manifest_path(path: str) -> str:
    return path.replace("%", "%25").replace("\r", "%0D").replace("\n", "%0A")


def decode_manifest_path(path: str) -> str:
    return path.replace("%0D", "\r").replace("%0d", "\r").replace("%0A", "\n").replace("%0a", "\n").replace("%25", "%")


def file_digest(path: Path, algorithm: str = "sha256") -> str:
    h = hashlib.new(algorithm)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(_HASH_CHUNK), b""):
            h.update(chunk)
    return h.hexdigest()


def _planned_layout(graph: CrateGraph, payload: Sequence[PayloadEntry]) -> tuple[dict[str, PayloadEntry], list[str]]:
    by_path: dict[str, PayloadEntry] = {}
    for entry in payload:
        if entry.path == METADATA_FILENAME:
            raise PathEscape(f"payload may not replace {METADATA_FILENAME}")
        by_path[entry.path] = entry
    directories: list[str] = []
    kinds = classify_all(graph)
    for entity in graph:
        if kinds[entity.id] is not Classification.DATA:
            continue
        rel = ids.relative_path(entity.id)
        if rel is None:
            continue
        clean = check_relative_path(rel)
        if entity.has_class("Dataset"):
            directories.append(clean)
        elif entity.has_class("File") and clean not in by_path:
            raise MissingPayload(entity.id)
    return by_path, sorted(set(directories))


def _prepare_dest(dest: Path) -> None:
    if dest.exists():
        if not dest.is_dir() or any(dest.iterdir()):
            raise DestNotEmpty(str(dest))
    else:
        dest.mkdir(parents=True)


def _write_tree(
    graph: CrateGraph,
    payload: Sequence[PayloadEntry],
    dest: Path,
    ctx: TermContext | None,
    preview: bool,
) -> list[str]:
    by_path, directories = _planned_layout(graph, payload)
    _prepare_dest(dest)
    written = [METADATA_FILENAME]
    (dest / METADATA_FILENAME).write_bytes(serialize_metadata(graph, ctx))
    if preview:
        from .preview import render_preview

        (dest / PREVIEW_FILENAME).write_bytes(render_preview(graph).html.encode("utf-8"))
        written.append(PREVIEW_FILENAME)
    for rel in directories:
        (dest / rel).mkdir(parents=True, exist_ok=True)
    for rel in sorted(by_path):
        target = dest / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(by_path[rel].read())
        written.append(rel)
    return written


def write_directory(
    graph: CrateGraph,
    payload: Sequence[PayloadEntry],
    dest: str | os.PathLike[str],
    *,
    ctx: TermContext | None = None,
    preview: bool = False,
) -> list[str]:
    """Materialize the crate as a directory; returns the written file paths."""
    return _write_tree(graph, payload, Path(dest), ctx, preview)


def _fetch_lines(graph: CrateGraph) -> list[str]:
    lines = []
    kinds = classify_all(graph)
    for entity in graph:
        if kinds[entity.id] is not Classification.DATA or not entity.has_class("File"):
            continue
        if not ids.is_absolute(entity.id):
            continue
        size = entity.get("contentSize")
        if isinstance(size, str) and size.isdigit():
            size = int(size)
        if not isinstance(size, int) or isinstance(size, bool):
            continue
        parts = urlsplit(entity.id)
        local = unquote(parts.netloc + parts.path).strip("/")
        if not local or ".." in local.split("/"):
            continue
        lines.append(f"{entity.id} {size} data/{encode_manifest_path(local)}\n")
    return sorted(lines)


def _digest_all(paths: Iterable[Path], algorithm: str) -> list[str]:
    paths = list(paths)
    with ThreadPoolExecutor(max_workers=min(8, max(1, len(paths)))) as pool:
        return list(pool.map(lambda p: file_digest(p, algorithm), paths))


def write_bagit(
    graph: CrateGraph,
    payload: Sequence[PayloadEntry],
    dest: str | os.PathLike[str],
    *,
    algorithm: str = "sha256",
    ctx: TermContext | None = None,
    preview: bool = False,
) -> BagManifest:
    """Write a BagIt 1.0 bag whose ``data/`` directory is the crate root."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unsupported algorithm {algorithm!r}")
    dest = Path(dest)
    _planned_layout(graph, payload)
    _prepare_dest(dest)
    _write_tree(graph, payload, dest / "data", ctx, preview)
    files = sorted(
        p.relative_to(dest).as_posix() for p in (dest / "data").rglob("*") if p.is_file()
    )
    digests = _digest_all((dest / f for f in files), algorithm)
    manifest = BagManifest(algorithm, tuple(zip(digests, files)))
    (dest / "bagit.txt").write_bytes(BAGIT_TXT)
    (dest / f"manifest-{algorithm}.txt").write_text(manifest.text(), encoding="utf-8", newline="\n")
    tag_files = ["bagit.txt", f"manifest-{algorithm}.txt"]
    fetch = _fetch_lines(graph)
    if fetch:
        (dest / "fetch.txt").write_text("".join(fetch), encoding="utf-8", newline="\n")
        tag_files.append("fetch.txt")
    tag_lines = "".join(f"{file_digest(dest / t, algorithm)}  {t}\n" for t in sorted(tag_files))
    (dest / f"tagmanifest-{algorithm}.txt").write_text(tag_lines, encoding="utf-8", newline="\n")
    return manifest


def _zip_info(name: str, compress: bool) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=ZIP_EPOCH)
    info.create_system = 3
    if name.endswith("/"):
        info.external_attr = (0o40755 << 16) | 0x10
        info.compress_type = zipfile.ZIP_STORED
    else:
        info.external_attr = 0o100644 << 16
        info.compress_type = zipfile.ZIP_DEFLATED if compress else zipfile.ZIP_STORED
    return info


def write_zip(
    graph: CrateGraph,
    payload: Sequence[PayloadEntry],
    dest: str | os.PathLike[str],
    *,
    ctx: TermContext | None = None,
    preview: bool = False,
) -> int:
    """Write a reproducible ZIP archive of the crate; returns its size in bytes."""
    by_path, directories = _planned_layout(graph, payload)
    dest = Path(dest)
    if dest.exists() and (dest.is_dir() or dest.stat().st_size):
        raise DestNotEmpty(str(dest))
    members: list[tuple[str, bytes | None]] = []
    for rel in directories:
        members.append((rel.rstrip("/") + "/", None))
    for rel, entry in by_path.items():
        members.append((rel, entry.read()))
    if preview:
        from .preview import render_preview

        members.append((PREVIEW_FILENAME, render_preview(graph).html.encode("utf-8")))
    members.sort(key=lambda m: m[0])
    members.insert(0, (METADATA_FILENAME, serialize_metadata(graph, ctx)))
    with zipfile.ZipFile(dest, "w") as zf:
        for name, data in members:
            if data is None:
                zf.writestr(_zip_info(name, False), b"")
            else:
                compress = PurePosixPath(name).suffix.lower() not in _COMPRESSED_SUFFIXES
                zf.writestr(_zip_info(name, compress), data, compresslevel=6 if compress else None)
    return dest.stat().st_size


# --- verification ----------------------------------------------------------------------


def _read_manifest(path: Path) -> tuple[list[tuple[str, str]], list[str]]:
    entries, problems = [], []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            problems.append(f"{path.name}:{n}: malformed line")
            continue
        entries.append((parts[0].lower(), decode_manifest_path(parts[1].strip())))
    return entries, problems


def verify_bag(bag_dir: str | os.PathLike[str]) -> ValidationReport:
    """Check a bag's declaration, payload digests and completeness."""
    bag = Path(bag_dir)
    found: list[Violation] = []

    def error(rule: str, message: str, where: str | None = None) -> None:
        found.append(Violation(rule, Severity.ERROR, message, where))

    declaration = bag / "bagit.txt"
    if not declaration.is_file():
        error("bag.declaration.missing", "bagit.txt is missing")
    else:
        lines = declaration.read_bytes().decode("utf-8", "replace").splitlines()
        if (
            len(lines) != 2
            or not lines[0].startswith("BagIt-Version: ")
            or lines[0].split(": ", 1)[1] not in ("0.97", "1.0")
            or lines[1] != "Tag-File-Character-Encoding: UTF-8"
        ):
            error("bag.declaration.invalid", "bagit.txt is not a valid bag declaration")
    if not (bag / "data").is_dir():
        error("bag.payload.dir_missing", "data/ directory is missing")

    manifests = sorted(bag.glob("manifest-*.txt"))
    if not manifests:
        error("bag.manifest.missing", "no payload manifest")
    fetched: set[str] = set()
    fetch = bag / "fetch.txt"
    if fetch.is_file():
        for line in fetch.read_text(encoding="utf-8").splitlines():
            parts = line.split(None, 2)
            if len(parts) == 3:
                fetched.add(decode_manifest_path(parts[2].strip()))

    for manifest in manifests:
        algorithm = manifest.stem.split("-", 1)[1]
        if algorithm not in hashlib.algorithms_available:
            error("bag.manifest.algorithm", f"unsupported algorithm {algorithm}", manifest.name)
            continue
        entries, problems = _read_manifest(manifest)
        for p in problems:
            error("bag.manifest.malformed", p, manifest.name)
        listed = set()
        for digest, rel in entries:
            listed.add(rel)
            if not rel.startswith("data/") or ".." in rel.split("/"):
                error("bag.manifest.path", f"manifest path outside payload: {rel}", rel)
                continue
            target = bag / rel
            if not target.is_file():
                if rel not in fetched:
                    error("bag.payload.missing", f"{rel} is listed but absent", rel)
                continue
            if file_digest(target, algorithm) != digest:
                error("bag.digest.mismatch", f"{algorithm} digest of {rel} does not match", rel)
        if (bag / "data").is_dir():
            for p in sorted((bag / "data").rglob("*")):
                rel = p.relative_to(bag).as_posix()
                if p.is_file() and rel not in listed:
                    error("bag.payload.unmanifested", f"{rel} is not in {manifest.name}", rel)

    for tagmanifest in sorted(bag.glob("tagmanifest-*.txt")):
        algorithm = tagmanifest.stem.split("-", 1)[1]
        if algorithm not in hashlib.algorithms_available:
            continue
        entries, problems = _read_manifest(tagmanifest)
        for p in problems:
            error("bag.tagmanifest.malformed", p, tagmanifest.name)
        for digest, rel in entries:
            target = bag / rel
            if not target.is_file():
                error("bag.tagfile.missing", f"{rel} is listed but absent", rel)
            elif file_digest(target, algorithm) != digest:
                error("bag.tagmanifest.mismatch", f"{algorithm} digest of {rel} does not match", rel)
    return ValidationReport(tuple(found), "https://www.rfc-editor.org/rfc/rfc8493")


def payload_from_directory(crate_dir: str | os.PathLike[str]) -> list[PayloadEntry]:
    """Every regular file below ``crate_dir`` except the metadata file."""
    root = Path(crate_dir)
    entries = []
    for p in sorted(root.rglob("*")):
        if p.is_file():
            rel = p.relative_to(root).as_posix()
            if rel != METADATA_FILENAME:
                entries.append(PayloadEntry(rel, p))
    return entries
