import json

import pytest

from vnembed.cli import main

from test_service import INSTANCE, TREE_INSTANCE


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps(INSTANCE))
    return str(path)


@pytest.fixture
def tree_file(tmp_path):
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(TREE_INSTANCE))
    return str(path)


def test_validate_ok(instance_file, capsys):
    assert main(["validate", "--instance", instance_file]) == 0
    assert json.loads(capsys.readouterr().out)["valid"] is True


def test_validate_malformed_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--instance", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "input"


def test_validate_structural_error_exit_2(tmp_path, capsys):
    doc = json.loads(json.dumps(INSTANCE))
    doc["request"]["edges"].append({"tail": "a", "head": "r", "demand": 1})
    path = tmp_path / "anti.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--instance", str(path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "antiparallel" in err["error"]["message"]


def test_widths_table(instance_file, capsys, tmp_path):
    out = tmp_path / "w.json"
    assert main(["widths", "--instance", instance_file, "--root", "r", "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "root" in table and "ew" in table and "lw" in table
    doc = json.loads(out.read_text())
    assert doc["reports"][0]["extraction_width"] == 2


def test_solve_adapted_with_export(instance_file, tmp_path, capsys):
    lp_path = tmp_path / "prog.lp"
    out = tmp_path / "result.json"
    code = main(
        [
            "solve",
            "--instance", instance_file,
            "--root", "r",
            "--ordering", "auto",
            "--formulation", "adapted",
            "--export-lp", str(lp_path),
            "--out", str(out),
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal" and doc["verified"] is True
    text = lp_path.read_text()
    assert text.startswith("Minimize") and "Subject To" in text and "Bounds" in text
    assert text.rstrip().endswith("End")


def test_solve_mcf_on_cycle_fails(instance_file, capsys):
    assert main(["solve", "--instance", instance_file, "--formulation", "mcf"]) == 2


def test_solve_mcf_tree(tree_file, tmp_path):
    out = tmp_path / "res.json"
    assert main(["solve", "--instance", tree_file, "--formulation", "mcf", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    combo_total = sum(e["value"] for e in doc["combination"])
    assert abs(combo_total - 1.0) < 1e-6


def test_oracle_command(tree_file, capsys):
    assert main(["oracle", "--instance", tree_file]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["best_mapping"] is not None


def test_gen_half_wheel_round_trip(tmp_path, capsys):
    out = tmp_path / "hw.json"
    assert main(["gen", "half-wheel", "--n", "9", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["orientation"]["root"] == "w_c"
    # generated files feed straight back into validate and widths
    assert main(["validate", "--instance", str(out)]) == 0


def test_gen_seed_required(capsys):
    assert main(["gen", "cactus", "--n", "6"]) == 2


def test_gen_reproducible(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["gen", "cactus", "--n", "8", "--seed", "7", "--out", str(a)]) == 0
    assert main(["gen", "cactus", "--n", "8", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_widths_half_wheel_with_orientation(tmp_path, capsys):
    """The worked CLI example: half-wheel n=9 rooted centrally reports
    ew 5 and lw 3 when the generated orientation is used."""
    hw = tmp_path / "hw9.json"
    assert main(["gen", "half-wheel", "--n", "9", "--out", str(hw)]) == 0
    out = tmp_path / "w.json"
    assert main(
        ["widths", "--instance", str(hw), "--root", "w_c", "--out", str(out)]
    ) == 0
    doc = json.loads(out.read_text())
    rep = doc["reports"][0]
    assert rep["root"] == "w_c"
    assert rep["extraction_width"] == 5
    assert rep["extraction_label_width"] == 3


def test_solve_two_half_wheels_multiroot(tmp_path):
    hw = tmp_path / "two.json"
    assert main(["gen", "two-half-wheels", "--n", "5", "--out", str(hw)]) == 0
    out = tmp_path / "res.json"
    code = main(
        [
            "solve",
            "--instance", str(hw),
            "--formulation", "multiroot",
            "--out", str(out),
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal" and doc["verified"] is True
    assert doc["regions"]["tree_like"] is True
    assert len(doc["regions"]["regions"]) == 2
    for region in doc["regions"]["regions"]:
        assert region["extraction_label_width"] == 2


def test_gen_hypergraph_eo(tmp_path):
    out = tmp_path / "h.json"
    code = main(
        ["gen", "hypergraph-eo", "--sets", json.dumps([["a", "b"], ["b", "c"]]), "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    labels = {
        (e["tail"], e["head"]): set(e["labels"])
        for e in doc["orientation"]["edges"]
    }
    assert labels[("root", "set_0")] == {"a", "b"}
    assert labels[("root", "set_1")] == {"b", "c"}
