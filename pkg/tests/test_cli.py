"""Command-line interface: exit codes, report formats, corpus round trips."""

import json
import shutil

import pytest

import geo
from gausskit.cli import main
from gausskit.report import canonical_dumps, to_jsonable


def write_spec(path, spec):
    path.write_text(canonical_dumps(spec.to_obj()))
    return str(path)


def write_chart(path, emap):
    path.write_text(canonical_dumps({"kind": "chart", "map": emap.to_obj()}))
    return str(path)


FAST = ["--samples", "4", "--seed", "3"]


def test_classify_cylinder_exit_zero(tmp_path, capsys):
    path = write_spec(tmp_path / "cyl.json", geo.veronese_cylinder())
    code = main(["classify", path, *FAST])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "gausskit/verdict/v1"
    assert doc["verdict"] == "Cylinder"
    assert doc["r"] == 2 and doc["l"] == 2


def test_classify_cone_exit_zero(tmp_path, capsys):
    path = write_spec(tmp_path / "cone.json", geo.veronese_cone())
    code = main(["classify", path, *FAST])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "Cone"


def test_classify_hypothesis_failure_exit_two(tmp_path, capsys):
    path = write_spec(tmp_path / "sack.json", geo.sacksteder_ruled())
    code = main(["classify", path, *FAST])
    assert code == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "HypothesisFailure"
    assert doc["reason"] == "N - n >= 2"


def test_classify_undetermined_exit_three(tmp_path, capsys):
    path = write_spec(tmp_path / "prod.json", geo.product_of_cones())
    code = main(["classify", path, *FAST])
    assert code == 3
    assert json.loads(capsys.readouterr().out)["verdict"] == "Undetermined"


def test_classify_nondegenerate_exit_four(tmp_path, capsys):
    path = write_chart(tmp_path / "parab.json", geo.paraboloid_chart())
    code = main(["classify", path, *FAST])
    assert code == 4
    assert json.loads(capsys.readouterr().out)["verdict"] == "NonDegenerate"


def test_malformed_json_exit_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "ruled",\n  "base": }')
    code = main(["classify", str(path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_missing_file_exit_one(tmp_path, capsys):
    code = main(["classify", str(tmp_path / "nope.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_classify_out_file_and_determinism(tmp_path):
    path = write_spec(tmp_path / "cyl.json", geo.veronese_cylinder())
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["classify", path, *FAST, "--out", str(out1)]) == 0
    assert main(["classify", path, *FAST, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_classify_csv_summary(tmp_path, capsys):
    path = write_spec(tmp_path / "veronese.json", geo.veronese_cylinder())
    code = main(["classify", path, *FAST, "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "name,r,l,m,verdict,max_residual"
    name, r, l, m, verdict, resid = lines[1].split(",")
    assert name == "veronese" and verdict == "Cylinder"
    assert (r, l, m) == ("2", "2", "2")
    assert float(resid) < 1e-8


def test_analyze_ruled_document(tmp_path, capsys):
    path = write_spec(tmp_path / "cyl.json", geo.veronese_cylinder())
    code = main(["analyze", path, *FAST])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "gausskit/analysis/v1"
    assert doc["kind"] == "ruled"
    assert doc["declared"] == {"r": 2, "l": 2, "n": 4, "N": 6}
    assert len(doc["leaves"]) == 4
    for leaf in doc["leaves"]:
        assert "pencil" in leaf and "decomposition" in leaf
        assert leaf["basic_equations"]["passed"]


def test_analyze_chart_document(tmp_path, capsys):
    path = write_chart(tmp_path / "sack.json", geo.sacksteder_chart())
    code = main(["analyze", path, *FAST])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "chart"
    assert doc["rank_profile"]["constant"]
    assert doc["rank_profile"]["r"] == 2
    assert "ruled parametrization" in doc["note"]


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus") / "c0"
    code = main(["corpus", "gen", "--seed", "0", "--out", str(out), "--pairs"])
    assert code == 0
    return out


def test_corpus_gen_layout(corpus_dir):
    manifest = json.loads((corpus_dir / "manifest.json").read_text())
    assert manifest["schema"] == "gausskit/corpus-manifest/v1"
    assert manifest["count"] >= 8
    for row in manifest["entries"]:
        assert (corpus_dir / row["file"]).exists()
    pairs = json.loads((corpus_dir / "pairs.json").read_text())
    assert pairs["schema"] == "gausskit/duality-pairs/v1"
    assert len(pairs["pairs"]) == 5


def test_corpus_gen_reproducible(corpus_dir, tmp_path):
    again = tmp_path / "c1"
    assert main(["corpus", "gen", "--seed", "0", "--out", str(again)]) == 0
    for item in sorted(corpus_dir.glob("*.json")):
        if item.name == "pairs.json":
            continue
        assert (again / item.name).read_bytes() == item.read_bytes()


def test_corpus_verify_ok(corpus_dir, capsys):
    code = main(["corpus", "verify", str(corpus_dir), "--samples", "6"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "gausskit/corpus-verify/v1"
    assert all(row["ok"] for row in doc["results"])


def test_corpus_verify_csv(corpus_dir, capsys):
    code = main(["corpus", "verify", str(corpus_dir), "--samples", "6",
                 "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "name,r,l,m,verdict,max_residual"
    assert len(lines) == 1 + json.loads(
        (corpus_dir / "manifest.json").read_text())["count"]


def test_corpus_verify_detects_tamper(corpus_dir, tmp_path, capsys):
    bad = tmp_path / "tampered"
    shutil.copytree(corpus_dir, bad)
    target = bad / "veronese_cylinder.json"
    obj = json.loads(target.read_text())
    obj["expected"]["verdict"] = "Cone"
    target.write_text(json.dumps(obj))
    code = main(["corpus", "verify", str(bad), "--samples", "6"])
    assert code == 5
    doc = json.loads(capsys.readouterr().out)
    flagged = [r for r in doc["results"] if not r["ok"]]
    assert [r["name"] for r in flagged] == ["veronese_cylinder"]


def test_classify_accepts_corpus_entry_file(corpus_dir, capsys):
    code = main(["classify", str(corpus_dir / "sacksteder.json"), *FAST])
    assert code == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "HypothesisFailure"
    assert doc["reason"] == "N - n >= 2"


def test_corpus_verify_missing_dir_exit_one(tmp_path, capsys):
    code = main(["corpus", "verify", str(tmp_path / "absent")])
    assert code == 1
    assert "cannot load corpus" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    from gausskit import __version__
    assert capsys.readouterr().out.strip() == __version__
