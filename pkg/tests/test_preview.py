from __future__ import annotations

import random
import re
import xml.etree.ElementTree as ET

from hypothesis import given, settings
from hypothesis import strategies as st

from crategen import random_graph
from cratekit.context import builtin_context, expand_term, extend
from cratekit.graph import Entity, Ref, add_entity, new_crate
from cratekit.jsonld import parse_metadata, serialize_metadata
from cratekit.preview import render_preview
from previewcheck import preview_problems

ORCID = "https://orcid.org/0000-0002-1825-0097"
IMAGE = "https://example.com/pics/5707039334816454031_o.jpg"


def tree(html: str) -> ET.Element:
    return ET.fromstring(html.split("\n", 1)[1])


def article_for(html: str, entity_id: str) -> ET.Element:
    for article in tree(html).iter("article"):
        if "".join(article.find("p").itertext()) == entity_id:
            return article
    raise KeyError(entity_id)


def minimal():
    return new_crate("x", "y", "2020", "https://spdx.org/licenses/CC-BY-4.0")


def test_listing1_author_links_to_orcid(listing1):
    doc = render_preview(listing1)
    image = article_for(doc.html, IMAGE)
    author_row = [tr for tr in image.iter("tr") if tr.find("th").text == "author"][0]
    hrefs = [a.get("href") for a in author_row.iter("a")]
    assert ORCID in hrefs
    assert f"#{doc.anchors[ORCID]}" in hrefs


def test_listing1_banner(listing1):
    html = render_preview(listing1).html
    banner = [d for d in tree(html).iter("div") if d.get("class") == "banner"]
    assert len(banner) == 1
    text = "".join(banner[0].itertext())
    assert "root.description.missing" in text and "root.datePublished.missing" in text


def test_valid_crate_has_no_banner(appendix):
    assert 'class="banner"' not in render_preview(appendix).html


def test_minimal_three_sections():
    sections = list(tree(render_preview(minimal()).html).iter("section"))
    assert [s.find("h2").text for s in sections] == ["Root", "Data entities", "Contextual entities"]


def test_root_first_with_required_fields(appendix):
    root = tree(render_preview(appendix).html).find(".//section")
    article = root.find("article")
    assert "".join(article.find("p").itertext()) == "./"
    rows = [tr.find("th").text for tr in article.iter("tr")]
    assert rows[:5] == ["@type", "name", "description", "datePublished", "license"]


def test_custom_term_row():
    ctx = extend(builtin_context(), {"testInstance": "https://w3id.org/ro/terms/test#testInstance"})
    assert expand_term(ctx, "testInstance")
    g = add_entity(minimal(), Entity("#t", ("Thing",), {"testInstance": "value-42", "zzz": Ref("#t")}))
    html = render_preview(g).html
    assert parse_metadata(serialize_metadata(g, ctx)).graph == g
    article = article_for(html, "#t")
    rows = {tr.find("th").text: "".join(tr.find("td").itertext()) for tr in article.iter("tr")}
    assert rows["testInstance"] == "value-42"


def test_anchor_map_total(appendix, listing1, orphan_crate, workflow_crate):
    for g in (appendix, listing1, orphan_crate, workflow_crate):
        doc = render_preview(g)
        assert set(doc.anchors) == {e.id for e in g}
        assert len(set(doc.anchors.values())) == len(doc.anchors)
        assert all(re.fullmatch(r"e\d+", a) for a in doc.anchors.values())


def test_fixtures_well_formed(appendix, listing1, orphan_crate, workflow_crate):
    for g in (appendix, listing1, orphan_crate, workflow_crate):
        html = render_preview(g).html
        assert preview_problems(g, html) == []
        assert render_preview(g).html == html


def test_escaping():
    nasty = '<script>alert("x")</script> & é'
    g = add_entity(minimal(), Entity("#n", ("Thing",), {"name": nasty}))
    html = render_preview(g).html
    assert "<script>" not in html
    assert preview_problems(g, html) == []


def test_dangling_relative_reference():
    g = add_entity(minimal(), Entity("#n", ("Thing",), {"about": Ref("#ghost")}))
    html = render_preview(g).html
    assert 'href="#ghost"' not in html
    assert preview_problems(g, html) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_graphs(seed):
    g = random_graph(random.Random(seed))
    html = render_preview(g).html
    assert preview_problems(g, html) == []
    assert render_preview(parse_metadata(serialize_metadata(g)).graph).html == html
