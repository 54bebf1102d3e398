from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))

from cratekit.jsonld import parse_metadata  # noqa: E402


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def fixture_json(name: str) -> dict:
    return json.loads(fixture_bytes(name))


@pytest.fixture
def listing1():
    return parse_metadata(fixture_bytes("listing1.json")).graph


@pytest.fixture
def appendix():
    return parse_metadata(fixture_bytes("appendix_example.json")).graph


@pytest.fixture
def orphan_crate():
    return parse_metadata(fixture_bytes("appendix_orphan.json")).graph


@pytest.fixture
def workflow_crate():
    return parse_metadata(fixture_bytes("workflow_crate.json")).graph


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, title, elapsed = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({elapsed:.2f} s)")
