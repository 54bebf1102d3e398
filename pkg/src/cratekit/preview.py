"""Static, script-free HTML rendering of a crate."""

from __future__ import annotations

from dataclasses import dataclass
from html import escape
from typing import Mapping

from . import ids
from .graph import Classification, CrateGraph, Entity, Ref, Value, classify_all, iter_values
from .jsonld import canonical_order, format_number
from .validate import validate_minimal

ROOT_FIELDS = ("name", "description", "datePublished", "license")

_STYLE = """
body { font-family: sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
.banner { background: #fde2e1; border: 1px solid #c0392b; padding: 0.5em 1em; }
article { border-top: 1px solid #ccc; padding: 0.5em 0; }
table { border-collapse: collapse; }
th { text-align: left; vertical-align: top; padding-right: 1em; }
.id { font-family: monospace; color: #555; }
.dangling { color: #c0392b; }
"""


@dataclass(frozen=True)
class PreviewDocument:
    html: str
    anchors: Mapping[str, str]


def _label(entity: Entity) -> str:
    name = entity.get("name")
    if isinstance(name, tuple):
        name = name[0]
    return name if isinstance(name, str) and name else entity.id


class _Renderer:
    def __init__(self, graph: CrateGraph) -> None:
        self.graph = graph
        self.order = canonical_order(graph)
        self.anchors = {entity_id: f"e{i}" for i, entity_id in enumerate(self.order)}

    def link(self, ref: Ref) -> str:
        key = self.graph.lookup(ref.id)
        if key is not None:
            inner = f'<a href="#{self.anchors[key]}">{escape(_label(self.graph.entities[key]))}</a>'
            if ids.is_absolute(ref.id):
                inner += f' (<a class="external" href="{escape(ref.id)}">{escape(ref.id)}</a>)'
            return inner
        if ids.is_absolute(ref.id):
            return f'<a class="external" href="{escape(ref.id)}">{escape(ref.id)}</a>'
        return f'<span class="dangling">{escape(ref.id)}</span>'

    def value(self, value: Value) -> str:
        parts = []
        for v in iter_values(value):
            if isinstance(v, Ref):
                parts.append(self.link(v))
            elif isinstance(v, str):
                parts.append(escape(v))
            else:
                parts.append(format_number(v))
        if len(parts) == 1:
            return parts[0]
        return "<ul>" + "".join(f"<li>{p}</li>" for p in parts) + "</ul>"

    def entity(self, entity: Entity, first: tuple[str, ...] = ()) -> str:
        anchor = self.anchors[entity.id]
        ident = escape(entity.id)
        if ids.is_absolute(entity.id):
            ident = f'<a class="external" href="{ident}">{ident}</a>'
        rows = [f"<tr><th>@type</th><td>{escape(', '.join(entity.classes))}</td></tr>"]
        terms = [t for t in first if t in entity.properties]
        terms += sorted(t for t in entity.properties if t not in first)
        for term in terms:
            rows.append(f"<tr><th>{escape(term)}</th><td>{self.value(entity.properties[term])}</td></tr>")
        return (
            f'<article id="{anchor}">\n'
            f"<h3>{escape(_label(entity))}</h3>\n"
            f'<p class="id">{ident}</p>\n'
            f"<table>\n" + "\n".join(rows) + "\n</table>\n"
            "</article>\n"
        )

    def section(self, title: str, entities: list[Entity], first: tuple[str, ...] = ()) -> str:
        body = "".join(self.entity(e, first) for e in entities) or "<p>None.</p>\n"
        slug = title.lower().replace(" ", "-")
        return f'<section id="{slug}">\n<h2>{escape(title)}</h2>\n{body}</section>\n'


def render_preview(graph: CrateGraph) -> PreviewDocument:
    """Render every entity of ``graph`` into one self-contained HTML page."""
    r = _Renderer(graph)
    kinds = classify_all(graph)
    data = [graph.entities[k] for k in r.order if kinds[k] is Classification.DATA]
    contextual = [
        graph.entities[k]
        for k in r.order
        if kinds[k] in (Classification.CONTEXTUAL, Classification.DESCRIPTOR)
    ]
    report = validate_minimal(graph)
    banner = ""
    if not report.passed:
        items = "".join(
            f"<li>{escape(v.rule)}: {escape(v.message)}</li>" for v in report.errors
        )
        banner = f'<div class="banner">\n<p>This crate does not pass minimal validation.</p>\n<ul>{items}</ul>\n</div>\n'
    title = escape(_label(graph.root))
    html = (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n'
        "<head>\n"
        '<meta charset="utf-8" />\n'
        f"<title>{title}</title>\n"
        f"<style>{_STYLE}</style>\n"
        "</head>\n"
        "<body>\n"
        f"<h1>{title}</h1>\n"
        + banner
        + r.section("Root", [graph.root], ROOT_FIELDS)
        + r.section("Data entities", data)
        + r.section("Contextual entities", contextual)
        + "</body>\n</html>\n"
    )
    return PreviewDocument(html, dict(r.anchors))
