"""Entity identifiers: validation, normalization and resolution.

Identifiers are kept as plain strings. Two identifiers denote the same entity
when their :func:`normalize_id` forms are equal.
"""

from __future__ import annotations

import re
from functools import lru_cache
from urllib.parse import unquote, urljoin, urlsplit

from .errors import InvalidId

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_SPACE = re.compile(r"\s")
_PCT = re.compile(r"%([0-9A-Fa-f]{2})")
_UNRESERVED = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"
)


def check_id(raw: str) -> str:
    if not isinstance(raw, str) or not raw:
        raise InvalidId(f"identifier must be a non-empty string, got {raw!r}")
    if _SPACE.search(raw):
        raise InvalidId(f"identifier contains whitespace: {raw!r}")
    return raw


def is_absolute(raw: str) -> bool:
    """True for IRIs carrying a scheme (``https:``, ``urn:``, ``arcp:``...)."""
    return bool(_SCHEME.match(raw))


def is_blank(raw: str) -> bool:
    return raw.startswith("_:")


def is_local(raw: str) -> bool:
    """True for crate-local fragment identifiers such as ``#alice``."""
    return raw.startswith("#")


def _decode_unreserved(match: re.Match[str]) -> str:
    ch = chr(int(match.group(1), 16))
    return ch if ch in _UNRESERVED else "%" + match.group(1).upper()


def _remove_dot_segments(path: str) -> str:
    # Leading ".." segments are kept so that escaping paths stay detectable.
    leading = path.startswith("/")
    parts = path.split("/")
    if leading:
        parts = parts[1:]
    out: list[str] = []
    for seg in parts:
        if seg == ".":
            continue
        if seg == "..":
            if out and out[-1] != "..":
                out.pop()
            else:
                out.append("..")
            continue
        out.append(seg)
    trailing = parts[-1] in ("", ".", "..") if parts else False
    out = [seg for seg in out if seg != ""]
    result = ("/" if leading else "") + "/".join(out)
    if trailing and out:
        result += "/"
    return result


def normalize_id(raw: str) -> str:
    """Return the comparison form of an identifier.

    Percent-escapes of unreserved characters are decoded and the remaining
    escapes upper-cased. Relative references additionally lose ``.`` and
    ``..`` segments; an empty relative path becomes ``./`` (the crate root).
    """
    return _normalize(check_id(raw))


@lru_cache(maxsize=65536)
def _normalize(raw: str) -> str:
    text = _PCT.sub(_decode_unreserved, raw)
    if is_absolute(text) or is_local(text) or is_blank(text):
        return text
    path, sep, rest = _split_path(text)
    path = _remove_dot_segments(path)
    if not path:
        path = "./"
    return path + sep + rest


def _split_path(text: str) -> tuple[str, str, str]:
    for i, ch in enumerate(text):
        if ch in "?#":
            return text[:i], ch, text[i + 1 :]
    return text, "", ""


def resolve(raw: str, base: str | None) -> str:
    """Resolve a relative identifier against ``base``; absolute ids pass through."""
    if base is None or is_absolute(raw):
        return raw
    return urljoin(base, raw)


def relative_path(raw: str) -> str | None:
    """Filesystem path for a relative data entity id, or None if it names no path."""
    if is_absolute(raw) or is_local(raw) or is_blank(raw):
        return None
    parts = urlsplit(raw)
    path = unquote(normalize_id(parts.path or "./"))
    if path == "./":
        return None
    return path
