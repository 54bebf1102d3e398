"""``cratekit`` command line.

Exit codes: 0 success or valid, 1 validation failure, 2 usage error,
3 I/O or format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import ids
from .errors import (
    CrateError,
    EmptyField,
    FormatError,
    InvalidDate,
    InvalidId,
    MalformedProfile,
    NotADataEntity,
    PackageError,
)
from .graph import (
    DEFAULT_SPEC_VERSION,
    SPEC_IRI_PREFIX,
    Entity,
    Ref,
    add_data_entity,
    check_data_classes,
    new_crate,
)
from .jsonld import METADATA_FILENAME, entity_json, dumps, read_crate_dir, serialize_metadata
from .oracle import check_equivalence
from .package import (
    PREVIEW_FILENAME,
    payload_from_directory,
    verify_bag,
    write_bagit,
    write_directory,
    write_zip,
)
from .preview import render_preview
from .validate import ValidationReport, builtin_profile, load_profile, validate_minimal, validate_profile

OK, INVALID, USAGE, IO_ERROR = 0, 1, 2, 3


def spec_version_iri() -> str:
    raw = os.environ.get("ROCRATE_SPEC_VERSION", "").strip()
    if not raw:
        return DEFAULT_SPEC_VERSION
    return raw if ids.is_absolute(raw) else SPEC_IRI_PREFIX + raw


def _err(message: str) -> None:
    print(f"cratekit: {message}", file=sys.stderr)


def _color(text: str, code: str) -> str:
    if sys.stdout.isatty() and not os.environ.get("NO_COLOR"):
        return f"\033[{code}m{text}\033[0m"
    return text


def _print_report(report: ValidationReport, as_json: bool) -> int:
    if as_json:
        print(json.dumps(report.as_dict(), indent=2, ensure_ascii=False))
    else:
        verdict = report.verdict.value
        print(_color(verdict.upper(), "32" if report.passed else "31"))
        for v in report.violations:
            where = f" [{v.entity_id}]" if v.entity_id else ""
            print(f"{v.severity.value:<8} {v.rule}{where}: {v.message}")
    return OK if report.passed else INVALID


def cmd_init(args: argparse.Namespace) -> int:
    graph = new_crate(
        args.name, args.description, args.date_published, args.license, spec_version=spec_version_iri()
    )
    written = write_directory(graph, [], args.dir)
    print(Path(args.dir) / written[0])
    return OK


def _parse_props(pairs: Sequence[str], as_ref: bool) -> dict[str, list]:
    out: dict[str, list] = {}
    for pair in pairs:
        term, sep, value = pair.partition("=")
        if not sep or not term or not value:
            raise ValueError(f"expected term=value, got {pair!r}")
        out.setdefault(term, []).append(Ref(value) if as_ref else value)
    return out


def cmd_add(args: argparse.Namespace) -> int:
    report = read_crate_dir(args.dir)
    graph = report.graph
    crate_dir = Path(args.dir)
    target = args.path
    types = list(args.type or [])
    if not ids.is_absolute(target):
        local = crate_dir / target
        if not local.exists():
            _err(f"{local} does not exist")
            return IO_ERROR
        if local.is_dir() and not target.endswith("/"):
            target += "/"
        if not types:
            types = ["Dataset" if local.is_dir() else "File"]
    elif not types:
        types = ["File"]
    types += [t for t in args.extra_type or [] if t not in types]
    try:
        check_data_classes(types)
    except NotADataEntity as exc:
        _err(str(exc))
        return INVALID
    props = _parse_props(args.prop or [], False)
    for term, refs in _parse_props(args.ref or [], True).items():
        props.setdefault(term, []).extend(refs)
    graph = add_data_entity(graph, Entity(target, tuple(types), props))
    (crate_dir / METADATA_FILENAME).write_bytes(serialize_metadata(graph, report.context))
    print(target)
    return OK


def _profile(spec: str):
    path = Path(spec)
    if path.is_file():
        return load_profile(path.read_bytes())
    return builtin_profile(spec)


def cmd_validate(args: argparse.Namespace) -> int:
    graph = read_crate_dir(args.dir).graph
    if args.profile:
        report = validate_profile(graph, _profile(args.profile))
    else:
        report = validate_minimal(graph)
    return _print_report(report, args.json)


def cmd_package(args: argparse.Namespace) -> int:
    report = read_crate_dir(args.dir)
    payload = [p for p in payload_from_directory(args.dir) if not (args.preview and p.path == PREVIEW_FILENAME)]
    options = {"ctx": report.context, "preview": args.preview}
    if args.format == "dir":
        write_directory(report.graph, payload, args.dest, **options)
    elif args.format == "bagit":
        write_bagit(report.graph, payload, args.dest, algorithm=args.algorithm, **options)
    else:
        size = write_zip(report.graph, payload, args.dest, **options)
        print(f"{args.dest} ({size} bytes)")
        return OK
    print(args.dest)
    return OK


def cmd_verify_bag(args: argparse.Namespace) -> int:
    if not Path(args.dir).is_dir():
        _err(f"{args.dir} is not a directory")
        return IO_ERROR
    return _print_report(verify_bag(args.dir), args.json)


def cmd_oracle_check(args: argparse.Namespace) -> int:
    report = read_crate_dir(args.dir)
    result = check_equivalence(report.graph, report.context)
    print(result.describe())
    return OK if result.equivalent else INVALID


def cmd_preview(args: argparse.Namespace) -> int:
    graph = read_crate_dir(args.dir).graph
    out = Path(args.dir) / PREVIEW_FILENAME
    out.write_bytes(render_preview(graph).html.encode("utf-8"))
    print(out)
    return OK


def cmd_inspect(args: argparse.Namespace) -> int:
    graph = read_crate_dir(args.dir).graph
    if args.id not in graph:
        _err(f"no entity {args.id!r}")
        return INVALID
    print(dumps(entity_json(graph.get(args.id))))
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cratekit", description="Create, check and package RO-Crates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a minimal crate")
    p.add_argument("--name", required=True)
    p.add_argument("--description", required=True)
    p.add_argument("--date-published", required=True)
    p.add_argument("--license", required=True, help="license IRI")
    p.add_argument("dir")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("add", help="add a data entity and list it under the root")
    p.add_argument("dir")
    p.add_argument("path", help="path inside the crate or an absolute IRI")
    p.add_argument("--type", action="append", choices=["File", "Dataset"])
    p.add_argument("--extra-type", action="append", help="additional class, e.g. ComputationalWorkflow")
    p.add_argument("--prop", action="append", metavar="TERM=VALUE", help="literal property")
    p.add_argument("--ref", action="append", metavar="TERM=ID", help="reference property")
    p.set_defaults(func=cmd_add)

    p = sub.add_parser("validate", help="check a crate")
    p.add_argument("dir")
    p.add_argument("--profile", help="profile file, or the name of a built-in profile (workflow)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("package", help="write the crate as a directory, bag or zip")
    p.add_argument("dir")
    p.add_argument("--format", choices=["dir", "bagit", "zip"], default="dir")
    p.add_argument("--algorithm", choices=["sha256", "sha512"], default="sha256")
    p.add_argument("--preview", action="store_true", help=f"also write {PREVIEW_FILENAME}")
    p.add_argument("dest")
    p.set_defaults(func=cmd_package)

    p = sub.add_parser("verify-bag", help="verify a BagIt bag")
    p.add_argument("dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_bag)

    p = sub.add_parser("oracle-check", help="compare the serializer with the rule-based oracle")
    p.add_argument("dir")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("preview", help=f"write {PREVIEW_FILENAME}")
    p.add_argument("dir")
    p.set_defaults(func=cmd_preview)

    p = sub.add_parser("inspect", help="print one entity")
    p.add_argument("dir")
    p.add_argument("id")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except (FormatError, PackageError, MalformedProfile, OSError) as exc:
        _err(str(exc))
        return IO_ERROR
    except (InvalidDate, EmptyField, InvalidId) as exc:
        _err(str(exc))
        return USAGE
    except CrateError as exc:
        _err(str(exc))
        return INVALID
    except ValueError as exc:
        _err(str(exc))
        return USAGE

if __name__ == "__main__":
    sys.exit(main())
