from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cratekit.context import builtin_context, expand_term, extend
from cratekit.errors import TermConflict, UnsupportedVersion

# Mapping from the formal model's schema.org translation, checked against the
# source text by hand (the values are quoted there as full IRIs).
APPENDIX_MAPPING = {
    "Dataset": "http://schema.org/Dataset",
    "File": "http://schema.org/MediaObject",
    "CreativeWork": "http://schema.org/CreativeWork",
    "hasPart": "http://schema.org/hasPart",
    "name": "http://schema.org/name",
    "description": "http://schema.org/description",
    "datePublished": "http://schema.org/datePublished",
    "license": "http://schema.org/license",
    "about": "http://schema.org/about",
    "conformsTo": "http://purl.org/dc/terms/conformsTo",
    "Property": "http://www.w3.org/2000/01/rdf-schema#Property",
    "Class": "http://www.w3.org/2000/01/rdf-schema#Class",
    "author": "http://schema.org/author",
}

ARTIFACT_TERMS = (
    "Dataset", "File", "CreativeWork", "Person", "Place", "ImageObject", "ComputationalWorkflow",
    "name", "description", "datePublished", "license", "hasPart", "mentions", "about",
    "conformsTo", "author", "contentLocation", "encodingFormat", "mainEntity",
    "programmingLanguage", "keywords", "identifier",
)

TEST_NS = "https://w3id.org/ro/terms/test#testInstance"


def test_context_iri():
    assert builtin_context("1.1").version_iri == "https://w3id.org/ro/crate/1.1/context"


@pytest.mark.parametrize("term, iri", sorted(APPENDIX_MAPPING.items()))
def test_mapping(term, iri):
    assert expand_term(builtin_context("1.1"), term) == iri


@pytest.mark.parametrize("term", ARTIFACT_TERMS)
def test_artifact_terms_known(term):
    assert expand_term(builtin_context("1.1"), term) is not None


def test_workflow_class_iri():
    ctx = builtin_context("1.1")
    assert expand_term(ctx, "ComputationalWorkflow") == "https://bioschemas.org/ComputationalWorkflow"


def test_unknown_term():
    assert expand_term(builtin_context("1.1"), "frobnicate") is None


def test_unsupported_version():
    with pytest.raises(UnsupportedVersion):
        builtin_context("0.9-nonexistent")


def test_inverse():
    ctx = builtin_context("1.1")
    for term, iri in ctx.term_to_iri.items():
        assert ctx.compact(iri) == term
    assert len(set(ctx.term_to_iri.values())) == len(ctx.term_to_iri)


class TestExtend:
    def test_custom_term(self):
        ctx = extend(builtin_context("1.1"), {"testInstance": TEST_NS})
        assert expand_term(ctx, "testInstance") == TEST_NS
        assert ctx.compact(TEST_NS) == "testInstance"
        assert ctx.version_iri == builtin_context("1.1").version_iri
        assert dict(ctx.extensions) == {"testInstance": TEST_NS}

    def test_redefinition(self):
        with pytest.raises(TermConflict) as info:
            extend(builtin_context("1.1"), {"name": "http://example.org/name"})
        assert info.value.term == "name"

    def test_iri_rebound(self):
        with pytest.raises(TermConflict):
            extend(builtin_context("1.1"), {"nom": "http://schema.org/name"})

    def test_empty_is_identity(self):
        ctx = builtin_context("1.1")
        assert extend(ctx, {}) is ctx

    def test_restating_builtin_is_identity(self):
        ctx = builtin_context("1.1")
        assert extend(ctx, {"name": "http://schema.org/name"}) == ctx

    def test_idempotent(self):
        once = extend(builtin_context("1.1"), {"testInstance": TEST_NS})
        assert extend(once, {"testInstance": TEST_NS}) == once


@given(st.sampled_from(sorted(builtin_context("1.1").term_to_iri)))
def test_round_trip(term):
    ctx = builtin_context("1.1")
    assert ctx.compact(expand_term(ctx, term)) == term
