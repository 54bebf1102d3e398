"""Create, parse, validate, package and preview RO-Crates.

The metadata graph is held as an immutable :class:`~cratekit.graph.CrateGraph`;
:mod:`cratekit.oracle` re-derives the serialized form from first-order facts
and production rules to cross-check the serializer.
"""

from .context import TermContext, builtin_context, expand_term, extend
from .graph import (
    Classification,
    CrateGraph,
    Entity,
    Ref,
    add_data_entity,
    add_entity,
    classify,
    mentions_closure,
    new_crate,
)
from .jsonld import ParseReport, flatten_lenient, parse_metadata, read_crate_dir, serialize_metadata
from .oracle import FactStore, check_equivalence, crate_to_facts, facts_to_jsonld, saturate
from .package import PayloadEntry, verify_bag, write_bagit, write_directory, write_zip
from .preview import render_preview
from .validate import (
    Profile,
    ValidationReport,
    builtin_profile,
    check_reachability,
    load_profile,
    validate_minimal,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "CrateGraph",
    "Entity",
    "FactStore",
    "ParseReport",
    "PayloadEntry",
    "Profile",
    "Ref",
    "TermContext",
    "ValidationReport",
    "add_data_entity",
    "add_entity",
    "builtin_context",
    "builtin_profile",
    "check_equivalence",
    "check_reachability",
    "classify",
    "crate_to_facts",
    "expand_term",
    "extend",
    "facts_to_jsonld",
    "flatten_lenient",
    "load_profile",
    "mentions_closure",
    "new_crate",
    "parse_metadata",
    "read_crate_dir",
    "render_preview",
    "saturate",
    "serialize_metadata",
    "validate_minimal",
    "validate_profile",
    "verify_bag",
    "write_bagit",
    "write_directory",
    "write_zip",
]
