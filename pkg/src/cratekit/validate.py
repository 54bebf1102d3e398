"""Conformance checks: minimal crate rules, reachability and declarative profiles."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable

from . import ids
from .errors import MalformedProfile
from .graph import (
    DATA_CLASSES,
    SPEC_IRI_PREFIX,
    Classification,
    CrateGraph,
    Ref,
    classify_all,
    is_iso8601,
    iter_refs,
    iter_values,
    mentions_closure,
)


class Severity(enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


class Verdict(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"


class Location(enum.Enum):
    DATA = "Data"
    CONTEXTUAL = "Contextual"
    ANY = "Any"


@dataclass(frozen=True)
class Violation:
    rule: str
    severity: Severity
    message: str
    entity_id: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "severity": self.severity.value,
            "entity": self.entity_id,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    profile: str | None = None

    @property
    def verdict(self) -> Verdict:
        if any(v.severity is Severity.ERROR for v in self.violations):
            return Verdict.FAIL
        return Verdict.PASS

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def by_severity(self, severity: Severity) -> list[Violation]:
        return [v for v in self.violations if v.severity is severity]

    @property
    def errors(self) -> list[Violation]:
        return self.by_severity(Severity.ERROR)

    @property
    def warnings(self) -> list[Violation]:
        return self.by_severity(Severity.WARNING)

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "profile": self.profile,
            "violations": [v.as_dict() for v in self.violations],
        }


def _literal(value: object) -> bool:
    return value is not None and not isinstance(value, (Ref, tuple))


def validate_minimal(graph: CrateGraph) -> ValidationReport:
    found: list[Violation] = []

    def error(rule: str, message: str, entity_id: str | None = None) -> None:
        found.append(Violation(rule, Severity.ERROR, message, entity_id))

    def warn(rule: str, message: str, entity_id: str | None = None) -> None:
        found.append(Violation(rule, Severity.WARNING, message, entity_id))

    desc = graph.descriptor
    root = graph.root
    if not desc.has_class("CreativeWork"):
        error("descriptor.type", "metadata descriptor must be a CreativeWork", desc.id)
    about = [r.id for r in iter_refs(desc.get("about", ()) or ())]
    if not about:
        error("descriptor.about.missing", "descriptor has no about reference", desc.id)
    elif graph.lookup(about[0]) != graph.root_id or len(about) > 1:
        error("descriptor.about.mismatch", "descriptor about must reference the root only", desc.id)
    conforms = [r.id for r in iter_refs(desc.get("conformsTo", ()) or ())]
    if not any(c.startswith(SPEC_IRI_PREFIX) for c in conforms):
        error("descriptor.conformsTo.missing", "descriptor must conform to a crate specification IRI", desc.id)

    if not root.has_class("Dataset"):
        error("root.type", "root data entity must be a Dataset", root.id)
    for term in ("name", "description", "datePublished"):
        value = root.get(term)
        if value is None:
            error(f"root.{term}.missing", f"root lacks {term}", root.id)
        elif not _literal(value):
            error(f"root.{term}.not_literal", f"root {term} must be a single literal value", root.id)
    published = root.get("datePublished")
    if isinstance(published, str) and not is_iso8601(published):
        warn("root.datePublished.format", f"datePublished {published!r} is not ISO 8601", root.id)
    license = root.get("license")
    if license is None:
        error("root.license.missing", "root lacks license", root.id)
    else:
        refs = list(iter_refs(license))
        if not refs:
            error("root.license.not_reference", "root license must reference a contextual entity", root.id)
        for ref in refs:
            if ref.id not in graph:
                error("root.license.dangling", f"license {ref.id} is not described in the crate", root.id)
    for ref in iter_refs(root.get("hasPart", ()) or ()):
        if graph.lookup(ref.id) == graph.descriptor_id:
            error("root.hasPart.descriptor", "the metadata descriptor is not a part of the crate", root.id)

    for entity in graph:
        if not entity.classes:
            error("entity.type.missing", "entity has no @type", entity.id)
        if all(entity.has_class(c) for c in DATA_CLASSES):
            error("entity.data.exclusive", "entity cannot be both File and Dataset", entity.id)
        for term, value in entity.properties.items():
            for v in iter_values(value):
                if isinstance(v, Ref) and not ids.is_absolute(v.id) and v.id not in graph:
                    error("reference.dangling", f"{term} -> {v.id} names no entity", entity.id)
        if entity.has_class("Person") and ids.is_local(entity.id):
            warn("person.local_id", "person identified by a local id; prefer an ORCID IRI", entity.id)

    for orphan in check_reachability(graph):
        warn("entity.unreachable", "not reachable from the root; link from root via mentions", orphan)
    return ValidationReport(tuple(found))


def check_reachability(graph: CrateGraph) -> list[str]:
    """Entity ids outside the mentions closure, in canonical id order."""
    closure = mentions_closure(graph)
    return sorted((k for k in graph.entities if k not in closure), key=lambda k: (ids.normalize_id(k), k))


# --- profiles -----------------------------------------------------------------------

ROOT_SELECTOR = "@root"


@dataclass(frozen=True)
class EntityRule:
    type: str
    min_count: int = 1
    location: Location = Location.ANY

    def __post_init__(self) -> None:
        if self.min_count < 1:
            raise MalformedProfile(f"minCount for {self.type!r} must be at least 1")


@dataclass(frozen=True)
class PropertyRule:
    on_type: str
    property: str
    severity: Severity = Severity.ERROR


@dataclass(frozen=True)
class Profile:
    id: str
    name: str = ""
    required_entities: tuple[EntityRule, ...] = ()
    required_properties: tuple[PropertyRule, ...] = ()
    context_extensions: dict[str, str] = field(default_factory=dict)
    notices: tuple[str, ...] = field(default=(), compare=False)


_PROFILE_KEYS = {"id", "name", "requiredEntities", "requiredProperties", "contextExtensions"}


def _require(obj: Any, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise MalformedProfile(f"{where}: missing {key!r}")
    if not isinstance(obj[key], kind) or isinstance(obj[key], bool):
        raise MalformedProfile(f"{where}: {key!r} must be {kind.__name__}")
    return obj[key]


def _enum(cls: type[enum.Enum], raw: Any, where: str) -> Any:
    try:
        return cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise MalformedProfile(f"{where}: {raw!r} is not one of {allowed}") from None


def load_profile(data: bytes | str) -> Profile:
    """Read a profile document (JSON)."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedProfile(f"not JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedProfile("profile must be a JSON object")
    notices = [f"ignored unknown field {k!r}" for k in sorted(set(doc) - _PROFILE_KEYS)]
    profile_id = _require(doc, "id", str, "profile")
    if not profile_id:
        raise MalformedProfile("profile: empty id")

    entity_rules = []
    for i, item in enumerate(doc.get("requiredEntities", [])):
        where = f"requiredEntities[{i}]"
        if not isinstance(item, dict):
            raise MalformedProfile(f"{where}: must be an object")
        min_count = item.get("minCount", 1)
        if not isinstance(min_count, int) or isinstance(min_count, bool):
            raise MalformedProfile(f"{where}: 'minCount' must be an integer")
        entity_rules.append(
            EntityRule(
                _require(item, "type", str, where),
                min_count,
                _enum(Location, item.get("location", "Any"), where),
            )
        )
        notices += [f"{where}: ignored unknown field {k!r}" for k in sorted(set(item) - {"type", "minCount", "location"})]

    property_rules = []
    for i, item in enumerate(doc.get("requiredProperties", [])):
        where = f"requiredProperties[{i}]"
        if not isinstance(item, dict):
            raise MalformedProfile(f"{where}: must be an object")
        property_rules.append(
            PropertyRule(
                _require(item, "onType", str, where),
                _require(item, "property", str, where),
                _enum(Severity, item.get("severity", "Error"), where),
            )
        )
        notices += [f"{where}: ignored unknown field {k!r}" for k in sorted(set(item) - {"onType", "property", "severity"})]

    extensions = doc.get("contextExtensions", {})
    if not isinstance(extensions, dict) or not all(isinstance(v, str) for v in extensions.values()):
        raise MalformedProfile("contextExtensions must map terms to IRI strings")
    return Profile(
        profile_id,
        doc.get("name", "") if isinstance(doc.get("name", ""), str) else "",
        tuple(entity_rules),
        tuple(property_rules),
        dict(extensions),
        tuple(notices),
    )


def builtin_profile(name: str) -> Profile:
    """Load a profile shipped with the package (currently ``workflow``)."""
    path = resources.files("cratekit") / "profiles" / f"{name}.json"
    if not path.is_file():
        raise MalformedProfile(f"no built-in profile named {name!r}")
    return load_profile(path.read_bytes())


def _matching(graph: CrateGraph, type_name: str) -> Iterable[str]:
    if type_name == ROOT_SELECTOR:
        return [graph.root_id]
    return [e.id for e in graph if e.has_class(type_name)]


def validate_profile(graph: CrateGraph, profile: Profile) -> ValidationReport:
    found = list(validate_minimal(graph).violations)
    found += [Violation("profile.notice", Severity.INFO, n) for n in profile.notices]
    kinds = classify_all(graph)
    for rule in profile.required_entities:
        candidates = [e.id for e in graph if e.has_class(rule.type)]
        if rule.location is Location.DATA:
            candidates = [c for c in candidates if kinds[c] is Classification.DATA]
        elif rule.location is Location.CONTEXTUAL:
            candidates = [c for c in candidates if kinds[c] is Classification.CONTEXTUAL]
        if len(candidates) < rule.min_count:
            where = "" if rule.location is Location.ANY else f" {rule.location.value.lower()}"
            found.append(
                Violation(
                    f"profile.entity.{rule.type}.count",
                    Severity.ERROR,
                    f"needs at least {rule.min_count}{where} entity of type {rule.type}, found {len(candidates)}",
                )
            )
    for prule in profile.required_properties:
        for entity_id in _matching(graph, prule.on_type):
            if graph.get(entity_id).get(prule.property) is None:
                found.append(
                    Violation(
                        f"profile.property.{prule.on_type.lstrip('@')}.{prule.property}.missing",
                        prule.severity,
                        f"{prule.on_type} entity lacks {prule.property}",
                        entity_id,
                    )
                )
    return ValidationReport(tuple(found), profile.id)
