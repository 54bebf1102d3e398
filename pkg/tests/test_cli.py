from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import bagit
import pytest

from conftest import FIXTURES
from cratekit.cli import main
from cratekit.jsonld import parse_metadata, serialize_metadata
from cratekit.validate import validate_minimal

INIT = ["--name", "Data files", "--description", "Palliative care planning", "--license", "https://spdx.org/licenses/CC-BY-4.0"]
IMAGE = "https://example.com/pics/5707039334816454031_o.jpg"


def crate_from(fixture: str, dest: Path, payload: dict[str, bytes] | None = None) -> Path:
    dest.mkdir()
    shutil.copy(FIXTURES / fixture, dest / "ro-crate-metadata.json")
    for rel, data in (payload or {}).items():
        target = dest / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        if rel.endswith("/"):
            target.mkdir(exist_ok=True)
        else:
            target.write_bytes(data)
    return dest


def graph_of(crate: Path):
    return parse_metadata((crate / "ro-crate-metadata.json").read_bytes()).graph


@pytest.fixture
def appendix_dir(tmp_path):
    return crate_from("appendix_example.json", tmp_path / "appendix", {"survey.csv": b"a,b\n", "interviews/": b""})


@pytest.fixture
def fresh(tmp_path, monkeypatch):
    monkeypatch.delenv("ROCRATE_SPEC_VERSION", raising=False)
    crate = tmp_path / "crate"
    assert main(["init", *INIT, "--date-published", "2017", str(crate)]) == 0
    return crate


class TestInit:
    def test_writes_valid_crate(self, fresh, capsys):
        graph = graph_of(fresh)
        assert validate_minimal(graph).passed
        assert graph.root.get("datePublished") == "2017"
        assert graph.descriptor.get("conformsTo").id == "https://w3id.org/ro/crate/1.1"

    def test_prints_path(self, tmp_path, capsys):
        main(["init", *INIT, "--date-published", "2020-01-01", str(tmp_path / "c")])
        assert capsys.readouterr().out.strip() == str(tmp_path / "c" / "ro-crate-metadata.json")

    def test_missing_name(self, tmp_path, capsys):
        argv = ["init", "--description", "d", "--license", "#l", "--date-published", "2017", str(tmp_path / "c")]
        assert main(argv) == 2
        assert "--name" in capsys.readouterr().err
        assert not (tmp_path / "c").exists()

    def test_bad_date(self, tmp_path, capsys):
        assert main(["init", *INIT, "--date-published", "17th May", str(tmp_path / "c")]) == 2

    def test_dest_not_empty(self, tmp_path, capsys):
        (tmp_path / "c").mkdir()
        (tmp_path / "c" / "junk").write_text("x")
        assert main(["init", *INIT, "--date-published", "2017", str(tmp_path / "c")]) == 3

    @pytest.mark.parametrize(
        "value, iri",
        [("1.2", "https://w3id.org/ro/crate/1.2"), ("https://example.org/v9", "https://example.org/v9")],
    )
    def test_spec_version_env(self, tmp_path, monkeypatch, value, iri, capsys):
        monkeypatch.setenv("ROCRATE_SPEC_VERSION", value)
        assert main(["init", *INIT, "--date-published", "2017", str(tmp_path / "c")]) == 0
        assert graph_of(tmp_path / "c").descriptor.get("conformsTo").id == iri


class TestAdd:
    def test_file(self, fresh, capsys):
        (fresh / "survey.csv").write_text("a,b\n")
        before = graph_of(fresh)
        assert main(["add", str(fresh), "survey.csv", "--type", "File", "--prop", "name=Survey"]) == 0
        after = graph_of(fresh)
        assert before.root.get("hasPart") is None
        assert after.root.get("hasPart").id == "survey.csv"
        assert after.get("survey.csv").classes == ("File",)
        assert after.get("survey.csv").get("name") == "Survey"
        assert validate_minimal(after).passed
        text = (fresh / "ro-crate-metadata.json").read_bytes()
        assert text == serialize_metadata(after)

    def test_directory_becomes_dataset(self, fresh, capsys):
        (fresh / "interviews").mkdir()
        assert main(["add", str(fresh), "interviews"]) == 0
        assert graph_of(fresh).get("interviews/").classes == ("Dataset",)

    def test_file_and_dataset(self, fresh, capsys):
        (fresh / "survey.csv").write_text("a,b\n")
        before = (fresh / "ro-crate-metadata.json").read_bytes()
        assert main(["add", str(fresh), "survey.csv", "--type", "File", "--type", "Dataset"]) == 1
        assert (fresh / "ro-crate-metadata.json").read_bytes() == before

    def test_absolute_iri(self, fresh, capsys):
        argv = ["add", str(fresh), IMAGE, "--extra-type", "ImageObject", "--ref", "author=https://orcid.org/0000-0002-1825-0097"]
        assert main(argv) == 0
        entity = graph_of(fresh).get(IMAGE)
        assert entity.classes == ("File", "ImageObject")
        assert entity.get("author").id == "https://orcid.org/0000-0002-1825-0097"

    def test_missing_payload(self, fresh, capsys):
        assert main(["add", str(fresh), "nope.csv"]) == 3
        assert "nope.csv" in capsys.readouterr().err

    def test_grows_by_one(self, fresh, capsys):
        for name in ("a.txt", "b.txt"):
            (fresh / name).write_text(name)
            main(["add", str(fresh), name])
        assert [r.id for r in graph_of(fresh).root.get("hasPart")] == ["a.txt", "b.txt"]

    def test_bad_prop(self, fresh, capsys):
        (fresh / "a.txt").write_text("a")
        assert main(["add", str(fresh), "a.txt", "--prop", "novalue"]) == 2

    def test_not_a_crate(self, tmp_path, capsys):
        assert main(["add", str(tmp_path), IMAGE]) == 3


class TestValidate:
    def test_appendix(self, appendix_dir, capsys):
        assert main(["validate", str(appendix_dir)]) == 0
        assert capsys.readouterr().out.startswith("PASS")

    def test_listing1(self, tmp_path, capsys):
        crate = crate_from("listing1.json", tmp_path / "l1")
        assert main(["validate", str(crate)]) == 1
        out = capsys.readouterr().out
        assert "root.description.missing" in out
        assert "root.datePublished.missing" in out

    def test_json_matches_exit(self, tmp_path, appendix_dir, capsys):
        crate = crate_from("listing1.json", tmp_path / "l1")
        for target, code in ((crate, 1), (appendix_dir, 0)):
            assert main(["validate", "--json", str(target)]) == code
            report = json.loads(capsys.readouterr().out)
            assert report["verdict"] == ("Pass" if code == 0 else "Fail")
            for v in report["violations"]:
                assert set(v) == {"rule", "severity", "entity", "message"}

    def test_workflow_profile(self, appendix_dir, tmp_path, capsys):
        assert main(["validate", "--profile", "workflow", str(appendix_dir)]) == 1
        wf = crate_from("workflow_crate.json", tmp_path / "wf")
        assert main(["validate", "--profile", "workflow", str(wf)]) == 0

    def test_profile_file(self, appendix_dir, tmp_path, capsys):
        profile = tmp_path / "p.json"
        profile.write_text(json.dumps({"id": "https://example.org/needs-person", "requiredEntities": [{"type": "Person", "minCount": 1}]}))
        assert main(["validate", "--profile", str(profile), str(appendix_dir)]) == 1
        profile.write_text("{")
        assert main(["validate", "--profile", str(profile), str(appendix_dir)]) == 3

    def test_unknown_profile(self, appendix_dir, capsys):
        assert main(["validate", "--profile", "nonsense", str(appendix_dir)]) == 3

    def test_missing_metadata(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path)]) == 3

    def test_unparseable(self, tmp_path, capsys):
        (tmp_path / "ro-crate-metadata.json").write_text("{not json")
        assert main(["validate", str(tmp_path)]) == 3

    def test_idempotent(self, appendix_dir, capsys):
        main(["validate", str(appendix_dir)])
        first = capsys.readouterr().out
        main(["validate", str(appendix_dir)])
        assert capsys.readouterr().out == first


class TestPackage:
    def test_bagit_then_verify(self, appendix_dir, tmp_path, capsys):
        bag = tmp_path / "bag"
        assert main(["package", str(appendix_dir), "--format", "bagit", str(bag)]) == 0
        assert main(["verify-bag", str(bag)]) == 0
        bagit.Bag(str(bag)).validate()
        (bag / "data" / "survey.csv").write_bytes(b"a,c\n")
        assert main(["verify-bag", str(bag)]) == 1
        assert "bag.digest.mismatch" in capsys.readouterr().out

    def test_verify_bag_not_dir(self, tmp_path, capsys):
        assert main(["verify-bag", str(tmp_path / "none")]) == 3

    def test_zip_twice_identical(self, appendix_dir, tmp_path, capsys):
        assert main(["package", str(appendix_dir), "--format", "zip", str(tmp_path / "a.zip")]) == 0
        assert main(["package", str(appendix_dir), "--format", "zip", str(tmp_path / "b.zip")]) == 0
        assert (tmp_path / "a.zip").read_bytes() == (tmp_path / "b.zip").read_bytes()

    def test_dir(self, appendix_dir, tmp_path, capsys):
        assert main(["package", str(appendix_dir), "--preview", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "ro-crate-preview.html").is_file()
        assert graph_of(tmp_path / "out") == graph_of(appendix_dir)

    def test_fetch(self, fresh, tmp_path, capsys):
        main(["add", str(fresh), IMAGE, "--prop", "contentSize=5120"])
        assert main(["package", str(fresh), "--format", "bagit", str(tmp_path / "bag")]) == 0
        fetch = (tmp_path / "bag" / "fetch.txt").read_text().split()
        assert fetch[:2] == [IMAGE, "5120"]

    def test_missing_payload(self, tmp_path, capsys):
        crate = crate_from("appendix_example.json", tmp_path / "c")
        assert main(["package", str(crate), "--format", "bagit", str(tmp_path / "bag")]) == 3

    def test_existing_dest(self, appendix_dir, tmp_path, capsys):
        (tmp_path / "bag").mkdir()
        (tmp_path / "bag" / "x").write_text("x")
        assert main(["package", str(appendix_dir), "--format", "bagit", str(tmp_path / "bag")]) == 3


class TestOracleCheck:
    def test_appendix(self, appendix_dir, capsys):
        assert main(["oracle-check", str(appendix_dir)]) == 0
        assert capsys.readouterr().out.strip() == "Equivalent"

    def test_orphan(self, tmp_path, capsys):
        crate = crate_from("appendix_orphan.json", tmp_path / "o")
        assert main(["oracle-check", str(crate)]) == 1
        out = capsys.readouterr().out
        assert out.startswith("Divergent")
        assert "only in serializer output: #orphan" in out

    def test_minimal(self, fresh, capsys):
        assert main(["oracle-check", str(fresh)]) == 0


class TestPreviewInspect:
    def test_preview(self, appendix_dir, capsys):
        assert main(["preview", str(appendix_dir)]) == 0
        first = (appendix_dir / "ro-crate-preview.html").read_bytes()
        assert main(["preview", str(appendix_dir)]) == 0
        assert (appendix_dir / "ro-crate-preview.html").read_bytes() == first

    def test_inspect(self, appendix_dir, capsys):
        assert main(["inspect", str(appendix_dir), "survey.csv"]) == 0
        entity = json.loads(capsys.readouterr().out)
        assert entity["@id"] == "survey.csv"
        assert entity["@type"] == "File"

    def test_inspect_unknown(self, appendix_dir, capsys):
        assert main(["inspect", str(appendix_dir), "#nobody"]) == 1


def test_no_command(capsys):
    assert main([]) == 2


def test_help(capsys):
    assert main(["--help"]) == 0
    assert "oracle-check" in capsys.readouterr().out


def test_console_entry_point(appendix_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "cratekit", "validate", str(appendix_dir)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("PASS")
