"""First-order model of a crate, used as an independent check on the serializer.

A graph is translated into ground facts (``Relation(s, p, o)``,
``Attribute(s, p, v)``, class predicates...), saturated with the crate
production rules, and written back out as JSON-LD with unshortened IRIs. The
result is compared with what :func:`cratekit.jsonld.serialize_metadata` emits.

Only entities reachable from the root through relations are produced, so a
graph with unlinked entities is reported as divergent on exactly those ids.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import total_ordering
from decimal import Decimal
from typing import Any, Iterable, Iterator
from weakref import WeakValueDictionary

from . import ids
from .context import RDF_TYPE, SCHEMA, XSD_DECIMAL, XSD_STRING, DCT, TermContext, builtin_context
from .engine import Rule, Var, atom, saturate_facts
from .errors import UnmappedTerm
from .graph import DESCRIPTOR_ID, ROOT_ID, DEFAULT_SPEC_VERSION, Classification, CrateGraph, Ref, classify_all, iter_values
from .jsonld import dumps, format_number, serialize_metadata


@total_ordering
class Iri:
    """An IRI term, interned so equal IRIs are the same object.

    Interning keeps equality and hashing at identity speed inside the rule
    engine, which compares terms far more often than it creates them.
    """

    __slots__ = ("value", "__weakref__")
    _pool: WeakValueDictionary[str, Iri] = WeakValueDictionary()

    def __new__(cls, value: str) -> Iri:
        obj = cls._pool.get(value)
        if obj is None:
            if not isinstance(value, str):
                raise TypeError(f"IRI must be a string, got {value!r}")
            obj = super().__new__(cls)
            object.__setattr__(obj, "value", value)
            cls._pool[value] = obj
        return obj

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Iri is immutable")

    def __lt__(self, other: Any) -> bool:
        if not isinstance(other, Iri):
            return NotImplemented
        return self.value < other.value

    def __reduce__(self) -> tuple:
        return (Iri, (self.value,))

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"

    def __str__(self) -> str:
        return f"<{self.value}>"


Term = Any  # Iri | str | int | Decimal

ARITY = {
    "ROCrate": 1, "Root": 1, "Dataset": 1, "File": 1, "CreativeWork": 1,
    "ContextualEntity": 1, "DataEntity": 1, "Entity": 1, "Class": 1, "Property": 1,
    "MetadataFileDescriptor": 1, "String": 1, "Decimal": 1,
    "Mentions": 2, "name": 2, "description": 2, "datePublished": 2, "license": 2,
    "hasPart": 2, "about": 2, "conformsTo": 2, "type": 2, "Datatype": 2,
    "Relation": 3, "Attribute": 3,
}

ATTRIBUTE_PREDICATES = ("name", "description", "datePublished")
RELATION_PREDICATES = ("hasPart", "license", "about", "conformsTo")
CLASS_PREDICATES = ("Dataset", "File", "CreativeWork")


@dataclass(frozen=True, order=True)
class Fact:
    predicate: str
    args: tuple

    def __post_init__(self) -> None:
        expected = ARITY.get(self.predicate)
        if expected is None:
            raise ValueError(f"unknown predicate {self.predicate!r}")
        if len(self.args) != expected:
            raise ValueError(f"{self.predicate} takes {expected} arguments, got {len(self.args)}")
        for a in self.args:
            if not isinstance(a, (Iri, str, int, Decimal)) or isinstance(a, bool):
                raise ValueError(f"{self.predicate}: unsupported argument {a!r}")

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(render_term(a) for a in self.args)})"

    @classmethod
    def _trusted(cls, predicate: str, args: tuple) -> Fact:
        # For rule output, whose shape the rule set already guarantees.
        f = object.__new__(cls)
        object.__setattr__(f, "predicate", predicate)
        object.__setattr__(f, "args", args)
        return f


def render_term(term: Term) -> str:
    if isinstance(term, Iri):
        return str(term)
    if isinstance(term, str):
        return json.dumps(term, ensure_ascii=False)
    return format_number(term)


def fact(predicate: str, *args: Term) -> Fact:
    return Fact(predicate, tuple(args))


@dataclass
class FactStore:
    """A set of ground facts about one crate.

    ``crate`` is the constant naming the crate root, ``descriptor`` the
    metadata file descriptor and ``version`` the conformance IRI.
    """

    facts: set[Fact] = field(default_factory=set)
    crate: Iri = Iri(ROOT_ID)
    descriptor: Iri = Iri(DESCRIPTOR_ID)
    version: Iri = Iri(DEFAULT_SPEC_VERSION)

    def add(self, f: Fact) -> None:
        self.facts.add(f)

    def __contains__(self, f: object) -> bool:
        return f in self.facts

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.facts)

    def __len__(self) -> int:
        return len(self.facts)

    def select(self, predicate: str) -> list[tuple]:
        return [f.args for f in self.facts if f.predicate == predicate]

    def issubset(self, other: FactStore) -> bool:
        return self.facts <= other.facts

    def dump(self) -> str:
        """One fact per line, sorted."""
        lines = sorted(str(f) for f in self.facts)
        return "".join(line + "\n" for line in lines)


# --- graph to facts ------------------------------------------------------------------


def _expand(ctx: TermContext, term: str, strict: bool) -> Iri:
    if ids.is_absolute(term):
        return Iri(term)
    iri = ctx.expand(term)
    if iri is None:
        if strict:
            raise UnmappedTerm(term)
        return Iri(term)
    return Iri(iri)


def crate_to_facts(
    graph: CrateGraph,
    ctx: TermContext | None = None,
    *,
    base: str | None = None,
    strict: bool = False,
) -> FactStore:
    """Translate a graph into ground facts.

    Relative ids are resolved against ``base`` when given. Terms the context
    does not know are kept verbatim unless ``strict`` is set.
    """
    ctx = ctx or builtin_context("1.1")

    nodes: dict[str, Iri] = {}

    def node(raw: str) -> Iri:
        if raw not in nodes:
            key = graph.lookup(raw)
            if key is None:
                key = ids.normalize_id(raw)
            nodes[raw] = Iri(ids.resolve(key, base))
        return nodes[raw]

    store = FactStore(
        crate=node(graph.root_id),
        descriptor=node(graph.descriptor_id),
        version=Iri(graph.spec_version),
    )
    store.add(fact("ROCrate", store.crate))
    kinds = classify_all(graph)
    for entity in graph:
        e = node(entity.id)
        store.add(fact("Entity", e))
        if kinds[entity.id] is Classification.CONTEXTUAL:
            store.add(fact("ContextualEntity", e))
        for cls in entity.classes:
            store.add(fact("type", e, _expand(ctx, cls, strict)))
            if cls in CLASS_PREDICATES:
                store.add(fact(cls, e))
        for term, value in entity.properties.items():
            p = _expand(ctx, term, strict)
            for v in iter_values(value):
                if isinstance(v, Ref):
                    o = node(v.id)
                    if term in RELATION_PREDICATES:
                        store.add(fact(term, e, o))
                    else:
                        store.add(fact("Relation", e, p, o))
                elif term in ATTRIBUTE_PREDICATES:
                    store.add(fact(term, e, v))
                else:
                    store.add(fact("Attribute", e, p, v))
    return store


# --- production rules ----------------------------------------------------------------

S, P, O, E, T, X, M = (Var(n) for n in "SPOETXM")


def _is_string(b: dict) -> bool:
    return isinstance(b[X], str)


def _is_number(b: dict) -> bool:
    return isinstance(b[X], (int, Decimal)) and not isinstance(b[X], bool)


def crate_rules(crate: Iri, descriptor: Iri, version: Iri) -> list[Rule]:
    r = crate
    rules = [
        # self-description
        Rule("descriptor-axiom", (atom("MetadataFileDescriptor", descriptor),)),
        Rule(
            "descriptor",
            (
                atom("CreativeWork", M),
                atom("about", M, r),
                atom("ROCrate", r),
                atom("conformsTo", M, version),
                atom("Mentions", r, M),
            ),
            (atom("MetadataFileDescriptor", M),),
        ),
        Rule("root", (atom("Root", r), atom("Mentions", r, r)), (atom("ROCrate", r),)),
        Rule("root-dataset", (atom("Dataset", E),), (atom("Root", E),)),
        # transitive mentions
        Rule("mentions", (atom("Mentions", r, O),), (atom("Mentions", r, S), atom("Relation", S, P, O))),
        # entity taxonomy
        Rule("file-data", (atom("DataEntity", E),), (atom("File", E),)),
        Rule("dataset-data", (atom("DataEntity", E),), (atom("Dataset", E),)),
        Rule("data-entity", (atom("Entity", E),), (atom("DataEntity", E),)),
        Rule("contextual-entity", (atom("Entity", E),), (atom("ContextualEntity", E),)),
        Rule("license-contextual", (atom("ContextualEntity", O),), (atom("license", S, O),)),
        # schema.org mapping
        Rule("map-dataset", (atom("type", E, Iri(SCHEMA + "Dataset")),), (atom("Dataset", E),)),
        Rule("map-file", (atom("type", E, Iri(SCHEMA + "MediaObject")),), (atom("File", E),)),
        Rule(
            "map-creativework",
            (atom("ContextualEntity", E), atom("type", E, Iri(SCHEMA + "CreativeWork"))),
            (atom("CreativeWork", E),),
        ),
        Rule("map-hasPart", (atom("Relation", S, Iri(SCHEMA + "hasPart"), O),), (atom("hasPart", S, O),)),
        Rule(
            "map-license",
            (atom("Relation", S, Iri(SCHEMA + "license"), O), atom("CreativeWork", O)),
            (atom("license", S, O),),
        ),
        Rule("map-about", (atom("Relation", S, Iri(SCHEMA + "about"), O),), (atom("about", S, O),)),
        Rule("map-conformsTo", (atom("Relation", S, Iri(DCT + "conformsTo"), O),), (atom("conformsTo", S, O),)),
        Rule("type-class", (atom("Class", T),), (atom("type", E, T),)),
        Rule("relation-property", (atom("Property", P),), (atom("Relation", S, P, O),)),
        Rule("attribute-property", (atom("Property", P),), (atom("Attribute", S, P, X),)),
        Rule("string", (atom("String", X),), (atom("Attribute", S, P, X),), _is_string),
        Rule("decimal", (atom("Decimal", X),), (atom("Attribute", S, P, X),), _is_number),
        Rule("string-datatype", (atom("Datatype", X, Iri(XSD_STRING)),), (atom("String", X),)),
        Rule("decimal-datatype", (atom("Datatype", X, Iri(XSD_DECIMAL)),), (atom("Decimal", X),)),
    ]
    for pred in ATTRIBUTE_PREDICATES:
        rules.append(Rule(f"map-{pred}", (atom("Attribute", S, Iri(SCHEMA + pred), X),), (atom(pred, S, X),)))
    return rules


def saturate(store: FactStore) -> FactStore:
    """Close ``store`` under the built-in crate rules."""
    rules = crate_rules(store.crate, store.descriptor, store.version)
    closed = saturate_facts(((f.predicate, f.args) for f in store.facts), rules)
    return FactStore({Fact._trusted(p, a) for p, a in closed}, store.crate, store.descriptor, store.version)


def mentioned_entities(store: FactStore) -> set[Iri]:
    """Entities the crate mentions; relation targets that are not entities are left out."""
    entities = {a[0] for a in store.select("Entity")}
    return {a[1] for a in store.select("Mentions") if a[0] == store.crate and a[1] in entities}


# --- facts to JSON-LD ------------------------------------------------------------------


def _json_term(term: Term) -> Any:
    return term.value if isinstance(term, Iri) else term


def _sort_key(value: Any) -> str:
    return json.dumps(value, sort_keys=True, default=str)


def facts_to_jsonld(store: FactStore) -> bytes:
    """Emit a ``@graph`` document for every mentioned entity, keys as full IRIs."""
    return (dumps(_oracle_document(store)) + "\n").encode("utf-8")


def _oracle_document(store: FactStore) -> dict[str, Any]:
    mentioned = mentioned_entities(store)
    types: dict[Iri, list[str]] = {e: [] for e in mentioned}
    props: dict[Iri, dict[str, list[Any]]] = {e: {} for e in mentioned}
    for f in store.facts:
        if f.predicate == "type" and f.args[0] in mentioned:
            types[f.args[0]].append(_json_term(f.args[1]))
        elif f.predicate == "Relation" and f.args[0] in mentioned:
            props[f.args[0]].setdefault(f.args[1].value, []).append({"@id": _json_term(f.args[2])})
        elif f.predicate == "Attribute" and f.args[0] in mentioned:
            props[f.args[0]].setdefault(f.args[1].value, []).append(f.args[2])

    def element(e: Iri) -> dict[str, Any]:
        out: dict[str, Any] = {"@id": e.value}
        ts = sorted(types[e])
        if ts:
            out["@type"] = ts[0] if len(ts) == 1 else ts
        for p in sorted(props[e]):
            values = sorted(props[e][p], key=_sort_key)
            out[p] = values[0] if len(values) == 1 else values
        return out

    head = [e for e in (store.descriptor, store.crate) if e in mentioned]
    rest = sorted((e for e in mentioned if e not in head), key=lambda e: (ids.normalize_id(e.value), e.value))
    return {"@graph": [element(e) for e in head + rest]}


# --- equivalence check -------------------------------------------------------------------


@dataclass(frozen=True)
class Equivalence:
    only_in_serializer: tuple[str, ...] = ()
    only_in_oracle: tuple[str, ...] = ()
    mismatched: dict[str, str] = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return not (self.only_in_serializer or self.only_in_oracle or self.mismatched)

    def __bool__(self) -> bool:
        return self.equivalent

    def describe(self) -> str:
        if self.equivalent:
            return "Equivalent"
        lines = ["Divergent"]
        lines += [f"  only in serializer output: {i}" for i in self.only_in_serializer]
        lines += [f"  only in oracle output: {i}" for i in self.only_in_oracle]
        lines += [f"  differs: {i}: {d}" for i, d in sorted(self.mismatched.items())]
        return "\n".join(lines)


def _as_list(value: Any) -> list:
    return value if isinstance(value, list) else [value]


def _value_key(value: Any) -> tuple:
    if isinstance(value, dict):
        return ("ref", ids.normalize_id(value["@id"]))
    if isinstance(value, str):
        return ("str", value)
    return ("num", format_number(value))


def _summarize(elements: Iterable[dict], ctx: TermContext | None) -> dict[str, tuple[Counter, dict[str, Counter]]]:
    out: dict[str, tuple[Counter, dict[str, Counter]]] = {}

    def expand(term: str) -> str:
        if ctx is None or ids.is_absolute(term):
            return term
        return ctx.expand(term) or term

    for el in elements:
        types = Counter(expand(t) for t in _as_list(el.get("@type", [])))
        props: dict[str, Counter] = {}
        for key, value in el.items():
            if key in ("@id", "@type"):
                continue
            props[expand(key)] = Counter(_value_key(v) for v in _as_list(value))
        out[ids.normalize_id(el["@id"])] = (types, props)
    return out


def check_equivalence(graph: CrateGraph, ctx: TermContext | None = None) -> Equivalence:
    """Compare the serializer's output with the rule-derived output for ``graph``."""
    ctx = ctx or builtin_context("1.1")
    derived = _oracle_document(saturate(crate_to_facts(graph, ctx)))
    written = json.loads(serialize_metadata(graph, ctx), parse_float=Decimal)
    mine = _summarize(written["@graph"], ctx)
    theirs = _summarize(derived["@graph"], None)
    mismatched: dict[str, str] = {}
    for key in sorted(set(mine) & set(theirs)):
        (t1, p1), (t2, p2) = mine[key], theirs[key]
        problems = []
        if t1 != t2:
            problems.append(f"types {sorted(t1)} vs {sorted(t2)}")
        for prop in sorted(set(p1) | set(p2)):
            if p1.get(prop) != p2.get(prop):
                problems.append(
                    f"{prop}: {sorted((p1.get(prop) or Counter()).elements())} vs "
                    f"{sorted((p2.get(prop) or Counter()).elements())}"
                )
        if problems:
            mismatched[key] = "; ".join(problems)
    return Equivalence(
        tuple(sorted(set(mine) - set(theirs))),
        tuple(sorted(set(theirs) - set(mine))),
        mismatched,
    )


__all__ = [
    "ARITY",
    "Equivalence",
    "Fact",
    "FactStore",
    "Iri",
    "RDF_TYPE",
    "XSD_DECIMAL",
    "XSD_STRING",
    "check_equivalence",
    "crate_rules",
    "crate_to_facts",
    "fact",
    "facts_to_jsonld",
    "mentioned_entities",
    "saturate",
]
