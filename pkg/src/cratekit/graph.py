"""Immutable flat entity graph and the structural rules of a crate."""

from __future__ import annotations

import enum
import math
import re
from collections import deque
from dataclasses import dataclass, field
from datetime import date, datetime
from decimal import Decimal
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from . import ids
from .errors import (
    DuplicateId,
    EmptyField,
    InvalidDate,
    MissingType,
    NotADataEntity,
    UnknownId,
    UnsupportedValue,
)

ROOT_ID = "./"
DESCRIPTOR_ID = "ro-crate-metadata.json"
LEGACY_DESCRIPTOR_ID = "ro-crate-metadata.jsonld"
SPEC_IRI_PREFIX = "https://w3id.org/ro/crate/"
DEFAULT_SPEC_VERSION = SPEC_IRI_PREFIX + "1.1"

RESERVED_KEYS = frozenset({"@id", "@type", "@context", "@graph"})
DATA_CLASSES = ("File", "Dataset")


@dataclass(frozen=True, order=True)
class Ref:
    """A reference to another entity, written ``{"@id": ...}`` on disk."""

    id: str

    def __post_init__(self) -> None:
        ids.check_id(self.id)


Scalar = Union[str, int, Decimal, Ref]
Value = Union[Scalar, tuple]


def _coerce_scalar(value: object) -> Scalar:
    if isinstance(value, bool) or value is None:
        raise UnsupportedValue(f"unsupported literal {value!r}")
    if isinstance(value, (str, Ref, int)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise UnsupportedValue(f"non-finite number {value!r}")
        return Decimal(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise UnsupportedValue(f"non-finite number {value!r}")
        return value
    raise UnsupportedValue(f"unsupported property value {value!r}")


def coerce_value(value: object) -> Value:
    """Normalize a user-supplied property value.

    Lists become tuples, a one-element list collapses to its element, floats
    become :class:`~decimal.Decimal`. Nested lists and empty lists are rejected.
    """
    if isinstance(value, (list, tuple)):
        items = tuple(_coerce_scalar(v) for v in value)
        if not items:
            raise UnsupportedValue("empty value list")
        return items[0] if len(items) == 1 else items
    return _coerce_scalar(value)


def iter_values(value: Value) -> Iterator[Scalar]:
    if isinstance(value, tuple):
        yield from value
    else:
        yield value


def iter_refs(value: Value) -> Iterator[Ref]:
    for v in iter_values(value):
        if isinstance(v, Ref):
            yield v


@dataclass(frozen=True)
class Entity:
    id: str
    classes: tuple[str, ...] = ()
    properties: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids.check_id(self.id)
        classes = self.classes
        if isinstance(classes, str):
            classes = (classes,)
        object.__setattr__(self, "classes", tuple(dict.fromkeys(classes)))
        props: dict[str, Value] = {}
        for term, value in dict(self.properties).items():
            if term in RESERVED_KEYS:
                raise UnsupportedValue(f"{term!r} is reserved and cannot be a property")
            props[term] = coerce_value(value)
        object.__setattr__(self, "properties", MappingProxyType(props))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Entity):
            return NotImplemented
        return (
            self.id == other.id
            and self.classes == other.classes
            and dict(self.properties) == dict(other.properties)
        )

    __hash__ = None  # type: ignore[assignment]

    def get(self, term: str, default: Value | None = None) -> Value | None:
        return self.properties.get(term, default)

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def refs(self) -> Iterator[Ref]:
        for value in self.properties.values():
            yield from iter_refs(value)

    def with_property(self, term: str, value: Value) -> Entity:
        props = dict(self.properties)
        props[term] = value
        return Entity(self.id, self.classes, props)

    def without_property(self, term: str) -> Entity:
        props = {k: v for k, v in self.properties.items() if k != term}
        return Entity(self.id, self.classes, props)

    def with_classes(self, classes: Iterable[str]) -> Entity:
        return Entity(self.id, tuple(classes), self.properties)


@dataclass(frozen=True)
class CrateGraph:
    entities: Mapping[str, Entity]
    root_id: str = ROOT_ID
    descriptor_id: str = DESCRIPTOR_ID
    spec_version: str = DEFAULT_SPEC_VERSION

    def __post_init__(self) -> None:
        entities: dict[str, Entity] = {}
        index: dict[str, str] = {}
        for key, entity in dict(self.entities).items():
            if key != entity.id:
                raise ValueError(f"entity keyed {key!r} has id {entity.id!r}")
            norm = ids.normalize_id(key)
            if norm in index:
                raise DuplicateId(f"{key!r} duplicates {index[norm]!r}")
            index[norm] = key
            entities[key] = entity
        object.__setattr__(self, "entities", MappingProxyType(entities))
        object.__setattr__(self, "_index", index)
        for needed in (self.root_id, self.descriptor_id):
            if ids.normalize_id(needed) not in index:
                raise UnknownId(f"graph lacks entity {needed!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CrateGraph):
            return NotImplemented
        return (
            self.root_id == other.root_id
            and self.descriptor_id == other.descriptor_id
            and self.spec_version == other.spec_version
            and dict(self.entities) == dict(other.entities)
        )

    __hash__ = None  # type: ignore[assignment]

    def __contains__(self, entity_id: object) -> bool:
        return isinstance(entity_id, str) and self.lookup(entity_id) is not None

    def __len__(self) -> int:
        return len(self.entities)

    def __iter__(self) -> Iterator[Entity]:
        return iter(self.entities.values())

    def lookup(self, entity_id: str) -> str | None:
        """Return the stored id equal to ``entity_id`` after normalization."""
        try:
            return self._index.get(ids.normalize_id(entity_id))  # type: ignore[attr-defined]
        except ValueError:
            return None

    def get(self, entity_id: str) -> Entity:
        key = self.lookup(entity_id)
        if key is None:
            raise UnknownId(entity_id)
        return self.entities[key]

    @property
    def root(self) -> Entity:
        return self.get(self.root_id)

    @property
    def descriptor(self) -> Entity:
        return self.get(self.descriptor_id)

    def resolves(self, ref: Ref) -> bool:
        return ref.id in self

    def replace(self, entity: Entity) -> CrateGraph:
        key = self.lookup(entity.id)
        if key is None:
            raise UnknownId(entity.id)
        entities = dict(self.entities)
        if key != entity.id:
            entities = {(entity.id if k == key else k): v for k, v in entities.items()}
        entities[entity.id] = entity
        return self._evolve(entities)

    def remove(self, entity_id: str) -> CrateGraph:
        key = self.lookup(entity_id)
        if key is None:
            raise UnknownId(entity_id)
        if key in (self.root_id, self.descriptor_id):
            raise ValueError(f"cannot remove structural entity {key!r}")
        return self._evolve({k: v for k, v in self.entities.items() if k != key})

    def _evolve(self, entities: Mapping[str, Entity]) -> CrateGraph:
        return CrateGraph(entities, self.root_id, self.descriptor_id, self.spec_version)


class Classification(enum.Enum):
    ROOT = "Root"
    DESCRIPTOR = "Descriptor"
    DATA = "Data"
    CONTEXTUAL = "Contextual"


_ISO_DATE = re.compile(
    r"""^(?P<year>[+-]?\d{4})
        (?:-(?P<month>\d{2})
           (?:-(?P<day>\d{2})
              (?:T(?P<time>\d{2}:\d{2}(?::\d{2}(?:[.,]\d+)?)?)
                 (?P<tz>Z|[+-]\d{2}(?::?\d{2})?)?
              )?
           )?
        )?$""",
    re.VERBOSE,
)


def is_iso8601(text: str) -> bool:
    """Accept ISO 8601 dates of year, month or day precision, optionally with a time."""
    if not isinstance(text, str):
        return False
    m = _ISO_DATE.match(text)
    if not m:
        return False
    try:
        if m["day"]:
            date(int(m["year"]), int(m["month"]), int(m["day"]))
        elif m["month"] and not 1 <= int(m["month"]) <= 12:
            return False
        if m["time"]:
            hms = m["time"].replace(",", ".")
            fmt = "%H:%M:%S.%f" if "." in hms else ("%H:%M:%S" if hms.count(":") == 2 else "%H:%M")
            datetime.strptime(hms, fmt)
    except ValueError:
        return False
    return True


def new_crate(
    name: str,
    description: str,
    date_published: str,
    license: str,
    *,
    license_name: str | None = None,
    spec_version: str = DEFAULT_SPEC_VERSION,
) -> CrateGraph:
    """Build the smallest valid crate: descriptor, root and a license entity."""
    if not isinstance(name, str) or not name.strip():
        raise EmptyField("name must not be blank")
    if not isinstance(description, str) or not description.strip():
        raise EmptyField("description must not be blank")
    if not is_iso8601(date_published):
        raise InvalidDate(f"not an ISO 8601 date: {date_published!r}")
    ids.check_id(license)
    descriptor = Entity(
        DESCRIPTOR_ID,
        ("CreativeWork",),
        {"about": Ref(ROOT_ID), "conformsTo": Ref(spec_version)},
    )
    root = Entity(
        ROOT_ID,
        ("Dataset",),
        {
            "name": name,
            "description": description,
            "datePublished": date_published,
            "license": Ref(license),
        },
    )
    lic = Entity(license, ("CreativeWork",), {"name": license_name or license})
    return CrateGraph(
        {e.id: e for e in (descriptor, root, lic)},
        ROOT_ID,
        DESCRIPTOR_ID,
        spec_version,
    )


def add_entity(graph: CrateGraph, entity: Entity) -> CrateGraph:
    if entity.id in graph:
        raise DuplicateId(entity.id)
    if not entity.classes:
        raise MissingType(f"entity {entity.id!r} has no class")
    entities = dict(graph.entities)
    entities[entity.id] = entity
    return graph._evolve(entities)


def check_data_classes(classes: Iterable[str]) -> None:
    present = [c for c in DATA_CLASSES if c in set(classes)]
    if len(present) != 1:
        raise NotADataEntity(
            f"a data entity must be exactly one of File or Dataset, got {sorted(present) or 'neither'}"
        )


def append_value(value: Value | None, item: Scalar) -> Value:
    if value is None:
        return item
    return tuple(iter_values(value)) + (item,)


def add_data_entity(graph: CrateGraph, entity: Entity) -> CrateGraph:
    """Add a File or Dataset and list it in the root's ``hasPart``."""
    check_data_classes(entity.classes)
    graph = add_entity(graph, entity)
    root = graph.root
    return graph.replace(root.with_property("hasPart", append_value(root.get("hasPart"), Ref(entity.id))))


def data_entity_ids(graph: CrateGraph) -> set[str]:
    """Ids reachable from the root through ``hasPart`` chains and classed File or Dataset."""
    found: set[str] = set()
    queue = deque([graph.root_id])
    seen = {graph.root_id}
    while queue:
        current = graph.get(queue.popleft())
        for ref in iter_refs(current.get("hasPart", ()) or ()):
            key = graph.lookup(ref.id)
            if key is None or key in seen:
                continue
            seen.add(key)
            target = graph.entities[key]
            if any(target.has_class(c) for c in DATA_CLASSES):
                found.add(key)
                queue.append(key)
    found.discard(graph.root_id)
    found.discard(graph.descriptor_id)
    return found


def classify(graph: CrateGraph, entity_id: str) -> Classification:
    key = graph.lookup(entity_id)
    if key is None:
        raise UnknownId(entity_id)
    if key == graph.root_id:
        return Classification.ROOT
    if key == graph.descriptor_id:
        return Classification.DESCRIPTOR
    if key in data_entity_ids(graph):
        return Classification.DATA
    return Classification.CONTEXTUAL


def classify_all(graph: CrateGraph) -> dict[str, Classification]:
    data = data_entity_ids(graph)
    out: dict[str, Classification] = {}
    for key in graph.entities:
        if key == graph.root_id:
            out[key] = Classification.ROOT
        elif key == graph.descriptor_id:
            out[key] = Classification.DESCRIPTOR
        elif key in data:
            out[key] = Classification.DATA
        else:
            out[key] = Classification.CONTEXTUAL
    return out


def mentions_closure(graph: CrateGraph) -> frozenset[str]:
    """Entities reachable from the root by following references, plus the descriptor."""
    seen = {graph.root_id}
    queue = deque([graph.root_id])
    while queue:
        for ref in graph.entities[queue.popleft()].refs():
            key = graph.lookup(ref.id)
            if key is not None and key not in seen:
                seen.add(key)
                queue.append(key)
    seen.add(graph.descriptor_id)
    return frozenset(seen)
