"""Versioned term context: short JSON keys to absolute IRIs and back."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import TermConflict, UnsupportedVersion

SCHEMA = "http://schema.org/"
BIOSCHEMAS = "https://bioschemas.org/"
DCT = "http://purl.org/dc/terms/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
XSD_DECIMAL = "http://www.w3.org/2001/XMLSchema#decimal"

CONTEXT_IRIS = {"1.1": "https://w3id.org/ro/crate/1.1/context"}

_SCHEMA_CLASSES = (
    "Action", "Article", "AudioObject", "Book", "Collection", "ComputerLanguage",
    "ContactPoint", "CreateAction", "CreativeWork", "DataDownload", "Dataset",
    "DigitalDocument", "Event", "GeoCoordinates", "GeoShape", "Grant", "ImageObject",
    "Organization", "Periodical", "Person", "Place", "Product", "PropertyValue",
    "PublicationIssue", "PublicationVolume", "ScholarlyArticle", "SoftwareApplication",
    "SoftwareSourceCode", "Thing", "UpdateAction", "VideoObject", "WebPage", "WebSite",
)

_SCHEMA_PROPERTIES = (
    "about", "accessMode", "accountablePerson", "actionStatus", "affiliation", "agent",
    "alternateName", "author", "birthDate", "caption", "citation", "codeRepository",
    "contactPoint", "contactType", "contentLocation", "contentSize", "contentUrl",
    "contributor", "copyrightHolder", "creator", "dateCreated", "dateModified",
    "datePublished", "description", "distribution", "email", "encodesCreativeWork",
    "encodingFormat", "endDate", "endTime", "error", "exampleOfWork", "familyName",
    "funder", "funding", "geo", "givenName", "hasPart", "identifier", "image",
    "instrument", "isPartOf", "keywords", "latitude", "license", "location",
    "longitude", "mainEntity", "maintainer", "mentions", "name", "object",
    "programmingLanguage", "publisher", "result", "runtimePlatform", "sameAs",
    "sdDatePublished", "sdLicense", "sdPublisher", "softwareRequirements",
    "spatialCoverage", "startDate", "startTime", "subjectOf", "telephone",
    "temporalCoverage", "text", "thumbnail", "url", "version",
)

_EXTRA = {
    "File": SCHEMA + "MediaObject",
    "ComputationalWorkflow": BIOSCHEMAS + "ComputationalWorkflow",
    "FormalParameter": BIOSCHEMAS + "FormalParameter",
    "input": BIOSCHEMAS + "ComputationalWorkflow#input",
    "output": BIOSCHEMAS + "ComputationalWorkflow#output",
    "conformsTo": DCT + "conformsTo",
    "Property": "http://www.w3.org/2000/01/rdf-schema#Property",
    "Class": "http://www.w3.org/2000/01/rdf-schema#Class",
}


def _table_1_1() -> dict[str, str]:
    table = {term: SCHEMA + term for term in _SCHEMA_CLASSES + _SCHEMA_PROPERTIES}
    table.update(_EXTRA)
    return table


_BUILTIN = {"1.1": _table_1_1()}


@dataclass(frozen=True)
class TermContext:
    version_iri: str
    term_to_iri: Mapping[str, str]
    extensions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        terms = dict(self.term_to_iri)
        terms.update(self.extensions)
        inverse: dict[str, str] = {}
        for term, iri in terms.items():
            if iri in inverse and inverse[iri] != term:
                raise TermConflict(term, f"IRI {iri} is bound to both {inverse[iri]!r} and {term!r}")
            inverse[iri] = term
        object.__setattr__(self, "term_to_iri", MappingProxyType(terms))
        object.__setattr__(self, "extensions", MappingProxyType(dict(self.extensions)))
        object.__setattr__(self, "iri_to_term", MappingProxyType(inverse))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermContext):
            return NotImplemented
        return (
            self.version_iri == other.version_iri
            and dict(self.term_to_iri) == dict(other.term_to_iri)
            and dict(self.extensions) == dict(other.extensions)
        )

    __hash__ = None  # type: ignore[assignment]

    def expand(self, term: str) -> str | None:
        return self.term_to_iri.get(term)

    def compact(self, iri: str) -> str | None:
        return self.iri_to_term.get(iri)  # type: ignore[attr-defined]

    def __contains__(self, term: object) -> bool:
        return term in self.term_to_iri


def builtin_context(version: str = "1.1") -> TermContext:
    try:
        table = _BUILTIN[version]
    except KeyError:
        raise UnsupportedVersion(f"no bundled context for version {version!r}") from None
    return TermContext(CONTEXT_IRIS[version], table)


def expand_term(ctx: TermContext, term: str) -> str | None:
    """IRI for ``term``, or None when the context does not know it."""
    return ctx.expand(term)


def extend(ctx: TermContext, pairs: Mapping[str, str]) -> TermContext:
    """Return a context with extra terms; existing terms may only be restated identically."""
    if not pairs:
        return ctx
    for term, iri in pairs.items():
        current = ctx.expand(term)
        if current is not None and current != iri:
            raise TermConflict(term)
        owner = ctx.compact(iri)
        if owner is not None and owner != term:
            raise TermConflict(term, f"IRI {iri} is already bound to term {owner!r}")
    new_pairs = {t: i for t, i in pairs.items() if t not in ctx.term_to_iri or t in ctx.extensions}
    if not new_pairs:
        return ctx
    base = {t: i for t, i in ctx.term_to_iri.items() if t not in ctx.extensions}
    return TermContext(ctx.version_iri, base, {**ctx.extensions, **new_pairs})
