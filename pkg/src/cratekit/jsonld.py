"""Reading and writing the crate metadata file (flattened, compacted JSON-LD)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable

from . import ids
from .context import CONTEXT_IRIS, TermContext, builtin_context, extend
from .errors import (
    BlankNode,
    ConflictingDuplicateId,
    DanglingReference,
    FormatError,
    MergeConflict,
    MissingDescriptor,
    MissingGraph,
    MissingRoot,
    NestedEntity,
    NotJson,
    UnsupportedValue,
)
from .graph import (
    DEFAULT_SPEC_VERSION,
    DESCRIPTOR_ID,
    LEGACY_DESCRIPTOR_ID,
    SPEC_IRI_PREFIX,
    CrateGraph,
    Entity,
    Ref,
    Value,
    iter_values,
)

METADATA_FILENAME = DESCRIPTOR_ID
LEGACY_METADATA_FILENAME = LEGACY_DESCRIPTOR_ID


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    entity_id: str | None = None


@dataclass
class ParseReport:
    graph: CrateGraph
    context: TermContext
    warnings: list[Finding] = field(default_factory=list)
    notices: list[Finding] = field(default_factory=list)


# --- low level JSON -----------------------------------------------------------


def _load_json(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NotJson(f"not UTF-8: {exc}") from None
    if data.startswith("\ufeff"):
        data = data[1:]
    try:
        return json.loads(data, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from None


def format_number(num: int | Decimal) -> str:
    """Plain decimal notation; never an exponent."""
    if isinstance(num, int):
        return str(num)
    text = format(num, "f")
    return "0" if text in ("-0", "+0") else text


# C-accelerated string quoting that leaves non-ASCII characters as they are.
_quote = json.encoder.encode_basestring


def dumps(obj: Any, indent: int = 2) -> str:
    """Serialize plain JSON data (dicts keep their order) with Decimal support."""
    out: list[str] = []
    _emit(obj, 0, indent, out)
    return "".join(out)


def _emit(obj: Any, level: int, indent: int, out: list[str]) -> None:
    if isinstance(obj, str):
        out.append(_quote(obj))
        return
    is_dict = isinstance(obj, dict)
    if is_dict or isinstance(obj, (list, tuple)):
        if not obj:
            out.append("{}" if is_dict else "[]")
            return
        pad = ",\n" + " " * (indent * (level + 1))
        sep = pad[1:]
        out.append("{" if is_dict else "[")
        for item in obj.items() if is_dict else obj:
            out.append(sep)
            sep = pad
            if is_dict:
                key, item = item
                out.append(_quote(key) + ": ")
            _emit(item, level + 1, indent, out)
        out.append("\n" + " " * (indent * level) + ("}" if is_dict else "]"))
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, Decimal)):
        out.append(format_number(obj))
    elif isinstance(obj, float):
        out.append(format_number(Decimal(repr(obj))))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


# --- context handling ----------------------------------------------------------


def _read_context(raw: Any, warnings: list[Finding]) -> TermContext:
    items = raw if isinstance(raw, list) else [raw]
    version_iri: str | None = None
    pairs: dict[str, str] = {}
    for item in items:
        if isinstance(item, str):
            if version_iri is None:
                version_iri = item
            else:
                warnings.append(Finding("context.extra_iri", f"ignored additional context {item}"))
        elif isinstance(item, dict):
            for term, target in item.items():
                if isinstance(target, dict):
                    target = target.get("@id")
                if isinstance(target, str):
                    pairs[term] = target
                else:
                    warnings.append(Finding("context.term_ignored", f"cannot use definition of {term!r}"))
        else:
            warnings.append(Finding("context.invalid", f"ignored context entry {item!r}"))
    ctx = builtin_context("1.1")
    if version_iri is None:
        warnings.append(Finding("context.missing", "no context IRI, assuming 1.1"))
    elif version_iri not in CONTEXT_IRIS.values():
        warnings.append(Finding("context.unknown", f"unrecognized context {version_iri}, using the 1.1 term table"))
        ctx = TermContext(version_iri, ctx.term_to_iri)
    return extend(ctx, pairs)


def _write_context(ctx: TermContext) -> Any:
    if ctx.extensions:
        return [ctx.version_iri, {t: ctx.extensions[t] for t in sorted(ctx.extensions)}]
    return ctx.version_iri


# --- parsing -----------------------------------------------------------------


def _is_reference(obj: Any) -> bool:
    return isinstance(obj, dict) and set(obj) == {"@id"} and isinstance(obj["@id"], str)


def _parse_value(raw: Any, entity_id: str, term: str) -> Value:
    if isinstance(raw, list):
        if any(isinstance(v, list) for v in raw):
            raise UnsupportedValue(f"{entity_id!r} {term!r}: nested lists are not allowed")
        items = tuple(_parse_scalar(v, entity_id, term) for v in raw)
        return items[0] if len(items) == 1 else items
    return _parse_scalar(raw, entity_id, term)


def _parse_scalar(raw: Any, entity_id: str, term: str) -> Value:
    if isinstance(raw, dict):
        if _is_reference(raw):
            if ids.is_blank(raw["@id"]):
                raise BlankNode(f"{entity_id!r} {term!r} references blank node {raw['@id']!r}")
            return Ref(raw["@id"])
        raise NestedEntity(f"{entity_id!r} embeds an entity under {term!r}; run flatten_lenient first")
    if isinstance(raw, bool) or raw is None:
        raise UnsupportedValue(f"{entity_id!r} {term!r}: unsupported literal {raw!r}")
    if isinstance(raw, (str, int, Decimal)):
        return raw
    raise UnsupportedValue(f"{entity_id!r} {term!r}: unsupported value {raw!r}")


def _classes(raw: Any, entity_id: str) -> tuple[str, ...]:
    if raw is None:
        return ()
    items = raw if isinstance(raw, list) else [raw]
    if not all(isinstance(t, str) for t in items):
        raise FormatError(f"{entity_id!r}: @type must be a string or list of strings")
    return tuple(items)


def _merge_duplicate(first: dict, second: dict, entity_id: str) -> dict:
    shared = (set(first) & set(second)) - {"@id", "@type"}
    if shared:
        raise ConflictingDuplicateId(f"{entity_id!r} appears twice with overlapping properties {sorted(shared)}")
    merged = dict(first)
    types = _classes(first.get("@type"), entity_id) + _classes(second.get("@type"), entity_id)
    if types:
        merged["@type"] = list(dict.fromkeys(types))
    merged.update({k: v for k, v in second.items() if k not in ("@id", "@type")})
    return merged


def _find_descriptor(nodes: dict[str, dict], warnings: list[Finding]) -> str:
    if DESCRIPTOR_ID in nodes:
        return DESCRIPTOR_ID
    if LEGACY_DESCRIPTOR_ID in nodes:
        warnings.append(
            Finding("descriptor.legacy_name", f"legacy descriptor id {LEGACY_DESCRIPTOR_ID}", LEGACY_DESCRIPTOR_ID)
        )
        return LEGACY_DESCRIPTOR_ID
    for node_id, node in nodes.items():
        about = node.get("about")
        conforms = node.get("conformsTo")
        conforms = conforms if isinstance(conforms, list) else [conforms]
        if _is_reference(about) and any(
            _is_reference(c) and c["@id"].startswith(SPEC_IRI_PREFIX) for c in conforms
        ):
            warnings.append(Finding("descriptor.unusual_id", f"descriptor found by shape: {node_id}", node_id))
            return node_id
    raise MissingDescriptor("no metadata file descriptor entity in @graph")


def _spec_version(descriptor: dict, warnings: list[Finding]) -> str:
    raw = descriptor.get("conformsTo")
    items = raw if isinstance(raw, list) else [raw]
    if isinstance(raw, list):
        warnings.append(
            Finding("descriptor.conformsTo.list", "conformsTo given as a list", descriptor.get("@id"))
        )
    for item in items:
        if _is_reference(item) and item["@id"].startswith(SPEC_IRI_PREFIX):
            return item["@id"]
    return DEFAULT_SPEC_VERSION


def parse_metadata(data: bytes | str, *, strict: bool = True) -> ParseReport:
    """Build a :class:`CrateGraph` from the bytes of a metadata file.

    With ``strict=False`` the document is first passed through
    :func:`flatten_lenient`, so embedded entities and blank nodes are accepted.
    """
    if not strict:
        data = flatten_lenient(data)
    doc = _load_json(data)
    if not isinstance(doc, dict):
        raise MissingGraph("top level is not a JSON object")
    graph_items = doc.get("@graph")
    if not isinstance(graph_items, list):
        raise MissingGraph("no @graph array")
    warnings: list[Finding] = []
    notices: list[Finding] = []
    if "@context" in doc:
        ctx = _read_context(doc["@context"], warnings)
    else:
        warnings.append(Finding("context.missing", "no @context, assuming 1.1"))
        ctx = builtin_context("1.1")
    for key in doc:
        if key not in ("@context", "@graph"):
            warnings.append(Finding("document.extra_key", f"ignored top-level key {key!r}"))

    nodes: dict[str, dict] = {}
    for item in graph_items:
        if not isinstance(item, dict):
            raise FormatError(f"@graph element is not an object: {item!r}")
        node_id = item.get("@id")
        if not isinstance(node_id, str) or not node_id:
            raise BlankNode("@graph element without @id; run flatten_lenient first")
        if ids.is_blank(node_id):
            raise BlankNode(f"blank node identifier {node_id!r}")
        if node_id in nodes:
            nodes[node_id] = _merge_duplicate(nodes[node_id], item, node_id)
            warnings.append(Finding("entity.duplicate_merged", "duplicate entity merged", node_id))
        else:
            nodes[node_id] = item

    descriptor_id = _find_descriptor(nodes, warnings)
    about = nodes[descriptor_id].get("about")
    if not _is_reference(about):
        raise MissingRoot("descriptor has no about reference")
    spec_version = _spec_version(nodes[descriptor_id], warnings)

    entities: dict[str, Entity] = {}
    for node_id, node in nodes.items():
        classes = _classes(node.get("@type"), node_id)
        props: dict[str, Value] = {}
        for term, raw in node.items():
            if term in ("@id", "@type"):
                continue
            if term.startswith("@"):
                warnings.append(Finding("entity.keyword_ignored", f"ignored keyword {term}", node_id))
                continue
            if isinstance(raw, list) and not raw:
                warnings.append(Finding("property.empty", f"dropped empty list {term!r}", node_id))
                continue
            props[term] = _parse_value(raw, node_id, term)
            if term not in ctx and not ids.is_absolute(term):
                notices.append(Finding("term.unknown", f"unknown property term {term!r}", node_id))
        for cls in classes:
            if cls not in ctx and not ids.is_absolute(cls):
                notices.append(Finding("term.unknown", f"unknown class term {cls!r}", node_id))
        entities[node_id] = Entity(node_id, classes, props)

    probe = {ids.normalize_id(k): k for k in entities}
    root_id = probe.get(ids.normalize_id(about["@id"]))
    if root_id is None:
        raise MissingRoot(f"root entity {about['@id']!r} is not in @graph")
    graph = CrateGraph(entities, root_id, descriptor_id, spec_version)
    return ParseReport(graph, ctx, warnings, notices)


# --- serialization -------------------------------------------------------------


def canonical_order(graph: CrateGraph) -> list[str]:
    rest = sorted(
        (k for k in graph.entities if k not in (graph.descriptor_id, graph.root_id)),
        key=lambda k: (ids.normalize_id(k), k),
    )
    return [graph.descriptor_id, graph.root_id, *rest]


def _value_json(value: Value) -> Any:
    def one(v: Any) -> Any:
        return {"@id": v.id} if isinstance(v, Ref) else v

    if isinstance(value, tuple):
        return [one(v) for v in value]
    return one(value)


def entity_json(entity: Entity) -> dict[str, Any]:
    out: dict[str, Any] = {"@id": entity.id}
    if entity.classes:
        out["@type"] = entity.classes[0] if len(entity.classes) == 1 else list(entity.classes)
    for term in sorted(entity.properties):
        out[term] = _value_json(entity.properties[term])
    return out


def dangling_references(graph: CrateGraph) -> list[tuple[str, str, str]]:
    """(entity id, term, target) for relative references that name no entity."""
    found = []
    for entity in graph:
        for term, value in entity.properties.items():
            for v in iter_values(value):
                if isinstance(v, Ref) and not ids.is_absolute(v.id) and v.id not in graph:
                    found.append((entity.id, term, v.id))
    return found


def document(graph: CrateGraph, ctx: TermContext | None = None) -> dict[str, Any]:
    ctx = ctx or builtin_context("1.1")
    dangling = dangling_references(graph)
    if dangling:
        src, term, target = dangling[0]
        raise DanglingReference(f"{src!r} {term!r} -> {target!r} has no entity")
    return {
        "@context": _write_context(ctx),
        "@graph": [entity_json(graph.entities[k]) for k in canonical_order(graph)],
    }


def serialize_metadata(graph: CrateGraph, ctx: TermContext | None = None) -> bytes:
    """Canonical metadata file bytes for ``graph``."""
    return (dumps(document(graph, ctx)) + "\n").encode("utf-8")


def read_crate_dir(path: str | Path, *, strict: bool = True) -> ParseReport:
    """Parse the metadata file of a crate directory, accepting the legacy file name."""
    path = Path(path)
    meta = path / METADATA_FILENAME
    legacy = path / LEGACY_METADATA_FILENAME
    if meta.is_file():
        return parse_metadata(meta.read_bytes(), strict=strict)
    if legacy.is_file():
        report = parse_metadata(legacy.read_bytes(), strict=strict)
        report.warnings.insert(
            0, Finding("metadata.legacy_filename", f"read legacy {LEGACY_METADATA_FILENAME}")
        )
        return report
    raise FileNotFoundError(f"no {METADATA_FILENAME} in {path}")


# --- lenient flattening ----------------------------------------------------------


class _Flattener:
    def __init__(self, used_ids: Iterable[str]) -> None:
        self.used = set(used_ids)
        self.counter = 0
        self.relabel: dict[str, str] = {}
        self.nodes: dict[str, dict] = {}

    def fresh(self) -> str:
        while f"#b{self.counter}" in self.used:
            self.counter += 1
        new = f"#b{self.counter}"
        self.used.add(new)
        self.counter += 1
        return new

    def node_id(self, raw: Any) -> str:
        if not isinstance(raw, str) or not raw:
            return self.fresh()
        if ids.is_blank(raw):
            if raw not in self.relabel:
                self.relabel[raw] = self.fresh()
            return self.relabel[raw]
        return raw

    def add(self, obj: dict) -> str:
        node_id = self.node_id(obj.get("@id"))
        # claim the id and the output slot before descending, so both the
        # #bN counter and the @graph order follow document order
        self.nodes.setdefault(node_id, {"@id": node_id})
        node: dict[str, Any] = {"@id": node_id}
        for key, value in obj.items():
            if key == "@id":
                continue
            node[key] = value if key == "@type" else self.value(value)
        self.merge(node)
        return node_id

    def value(self, raw: Any) -> Any:
        if isinstance(raw, list):
            return [self.value(v) for v in raw]
        if isinstance(raw, dict):
            if "@value" in raw:
                return raw["@value"]
            if _is_reference(raw):
                return {"@id": self.node_id(raw["@id"])}
            return {"@id": self.add(raw)}
        return raw

    def merge(self, node: dict) -> None:
        node_id = node["@id"]
        if node_id not in self.nodes:
            self.nodes[node_id] = node
            return
        current = self.nodes[node_id]
        for key, value in node.items():
            if key == "@id":
                continue
            if key not in current:
                current[key] = value
            elif key == "@type":
                merged = [*_as_list(current[key]), *_as_list(value)]
                merged = list(dict.fromkeys(merged))
                current[key] = merged[0] if len(merged) == 1 else merged
            else:
                current[key] = _merge_values(current[key], value, node_id, key)


def _as_list(value: Any) -> list:
    return value if isinstance(value, list) else [value]


def _merge_values(a: Any, b: Any, node_id: str, key: str) -> Any:
    if a == b:
        return a
    left, right = _as_list(a), _as_list(b)
    if any(not _is_reference(v) for v in left + right):
        raise MergeConflict(f"{node_id!r} has conflicting values for {key!r}: {a!r} vs {b!r}")
    merged = list(left)
    for v in right:
        if v not in merged:
            merged.append(v)
    return merged[0] if len(merged) == 1 else merged


def _collect_ids(obj: Any, out: set[str]) -> None:
    if isinstance(obj, dict):
        if isinstance(obj.get("@id"), str):
            out.add(obj["@id"])
        for v in obj.values():
            _collect_ids(v, out)
    elif isinstance(obj, list):
        for v in obj:
            _collect_ids(v, out)


def flatten_lenient(data: bytes | str) -> bytes:
    """Hoist embedded entities to the top-level graph and name anonymous ones.

    Embedded objects are replaced by references; entities without an id (or
    with a blank node id) are named ``#b0``, ``#b1``... in document order;
    repeated ids are merged.
    """
    doc = _load_json(data)
    if not isinstance(doc, dict):
        raise MissingGraph("top level is not a JSON object")
    items = doc.get("@graph")
    if not isinstance(items, list):
        raise MissingGraph("no @graph array")
    used: set[str] = set()
    _collect_ids(items, used)
    flattener = _Flattener(used)
    for item in items:
        if not isinstance(item, dict):
            raise FormatError(f"@graph element is not an object: {item!r}")
        flattener.add(item)
    out = {k: v for k, v in doc.items() if k != "@graph"}
    out["@graph"] = list(flattener.nodes.values())
    return (dumps(out) + "\n").encode("utf-8")


# --- structure checks ---------------------------------------------------------------


def object_depth(obj: Any) -> int:
    """Nesting depth counting JSON objects only; arrays are transparent."""
    if isinstance(obj, dict):
        return 1 + max((object_depth(v) for v in obj.values()), default=0)
    if isinstance(obj, list):
        return max((object_depth(v) for v in obj), default=0)
    return 0


def check_shape(data: bytes | str) -> list[str]:
    """Problems with the flat two-level layout of a metadata document; empty when fine."""
    doc = _load_json(data)
    problems: list[str] = []
    if not isinstance(doc, dict) or set(doc) != {"@context", "@graph"}:
        return ["top level must hold exactly @context and @graph"]
    if not isinstance(doc["@graph"], list):
        return ["@graph is not an array"]
    for item in doc["@graph"]:
        depth = object_depth(item)
        if depth > 2:
            problems.append(f"entity {item.get('@id')!r} has depth {depth}")
        for key, value in item.items():
            for v in _as_list(value):
                if isinstance(v, dict) and not _is_reference(v):
                    problems.append(f"entity {item.get('@id')!r} embeds a non-reference object under {key!r}")
    if object_depth(doc) > 3:
        problems.append("document depth exceeds 3")
    return problems
