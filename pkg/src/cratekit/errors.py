"""Exception hierarchy shared by every cratekit module."""

from __future__ import annotations


class CrateError(Exception):
    """Base class for all cratekit failures."""


# graph construction
class InvalidId(CrateError, ValueError):
    pass


class InvalidDate(CrateError, ValueError):
    pass


class EmptyField(CrateError, ValueError):
    pass


class MissingType(CrateError, ValueError):
    pass


class UnsupportedValue(CrateError, ValueError):
    pass


class DuplicateId(CrateError, KeyError):
    pass


class UnknownId(CrateError, KeyError):
    pass


class NotADataEntity(CrateError, ValueError):
    pass


# context
class UnsupportedVersion(CrateError, ValueError):
    pass


class TermConflict(CrateError, ValueError):
    def __init__(self, term: str, message: str | None = None) -> None:
        self.term = term
        super().__init__(message or f"term {term!r} is already bound to a different IRI")


class UnmappedTerm(CrateError, KeyError):
    pass


# metadata file I/O
class FormatError(CrateError):
    """The metadata document cannot be turned into a crate graph."""


class NotJson(FormatError):
    pass


class MissingGraph(FormatError):
    pass


class MissingDescriptor(FormatError):
    pass


class MissingRoot(FormatError):
    pass


class ConflictingDuplicateId(FormatError):
    pass


class NestedEntity(FormatError):
    pass


class BlankNode(FormatError):
    pass


class MergeConflict(FormatError):
    pass


class DanglingReference(CrateError):
    pass


# profiles
class MalformedProfile(CrateError, ValueError):
    pass


# packaging
class PackageError(CrateError):
    pass


class MissingPayload(PackageError):
    pass


class DestNotEmpty(PackageError):
    pass


class PathEscape(PackageError, ValueError):
    pass
