import json
from pathlib import Path

import pytest

from btb import cli, oracle
from btb.graphkit import path_graph

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name,size", [("scalar_OB", 27), ("unramified_quadratic", 51), ("uniformizer", 90),
                                       ("dtower2", 26), ("thm11_case2", 3), ("foliage", None)])
def test_branch_scenarios_match_their_predictions(capsys, name, size):
    code, out, _ = run(capsys, "branch", "--scenario", SCEN / f"{name}.toml")
    report = json.loads(out)
    assert code == cli.OK
    if "prediction" in report:
        assert report["prediction"]["matches"] is True
    if size is not None:
        assert len(report["vertices"]) == size


def test_branch_from_a_generator_file_gives_the_foliage(capsys):
    code, out, _ = run(capsys, "branch", "--gens", SCEN / "nilpotent.json", "--p", 2, "--n", 1,
                       "--precision", 24, "--radius", 3)
    assert code == cli.OK
    report = json.loads(out)
    pred = oracle.predict_p21(2, {"q": 2}, 3)
    assert len(report["vertices"]) == len(pred.graph.V)


def test_low_precision_is_inconclusive(capsys):
    code, out, err = run(capsys, "branch", "--scenario", SCEN / "low_precision.toml")
    assert code == cli.INCONCLUSIVE and "PrecisionExhausted" in err and out == ""


def test_refuted_prediction_exits_one(capsys, monkeypatch):
    monkeypatch.setattr(oracle, "predict_tha", lambda L, R: oracle.Prediction("Thm1.4", path_graph(2 * R), R))
    code, out, _ = run(capsys, "branch", "--scenario", SCEN / "scalar_OB.toml")
    assert code == cli.REFUTED and json.loads(out)["prediction"]["matches"] is False


def test_reports_are_byte_identical(capsys, tmp_path):
    paths = []
    for i in range(2):
        j, d = tmp_path / f"r{i}.json", tmp_path / f"r{i}.dot"
        run(capsys, "branch", "--scenario", SCEN / "uniformizer.toml", "--out-json", j, "--out-dot", d)
        paths.append((j.read_bytes(), d.read_bytes()))
    assert paths[0] == paths[1]
    j, d = tmp_path / "par.json", tmp_path / "par.dot"
    run(capsys, "branch", "--scenario", SCEN / "uniformizer.toml", "--out-json", j, "--out-dot", d, "--parallel")
    assert (j.read_bytes(), d.read_bytes()) == paths[0]


@pytest.mark.parametrize("argv", [
    ["lemma41", "--t", 1],
    ["lemma41", "--t", 2],
    ["thm11"],
    ["thm14", "--radius", 3],
    ["fig7e"],
    ["prop21"],
    ["lemma42", "--count", 10],
])
def test_verify_tags(capsys, argv):
    code, out, _ = run(capsys, "verify", *argv)
    report = json.loads(out)
    assert code == cli.OK and report["status"] == cli.STATUS[cli.OK]


def test_verify_with_scenario_overrides(capsys):
    code, out, _ = run(capsys, "verify", "lemma41", "--scenario", SCEN / "dtower2.toml", "--t", 2)
    assert code == cli.OK and json.loads(out)["details"]["radius"] == 4


def test_verify_low_precision(capsys):
    code, _, err = run(capsys, "verify", "lemma41", "--precision", 4)
    assert code == cli.INCONCLUSIVE and "PrecisionExhausted" in err


def test_verify_report_is_reproducible(capsys, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"v{i}.json"
        run(capsys, "verify", "lemma42", "--count", 5, "--seed", 3, "--out-json", p)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_graph_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "graph", "subdivide", "--length", 1, "--by", 3)
    assert code == cli.OK and out.count(" -- ") == 3
    code, out, _ = run(capsys, "graph", "rose", "--t", 3, "--r", 2)
    assert out.count(" -- ") == 6
    code, out, _ = run(capsys, "graph", "rose", "--figure")
    assert code == cli.OK
    code, out, _ = run(capsys, "graph", "rose", "--restricted", "--subalgebra", "full")
    assert out.count(" -- ") == 2
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"vertices": ["a", "b"], "edges": [["a", "b"]]}))
    code, out, _ = run(capsys, "graph", "attach", "--graph", g, "--at", '"a"', "--t", 2, "--r", 1)
    assert code == cli.OK and out.count(" -- ") == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, _, err = run(capsys, "graph", "subdivide", "--graph", bad)
    assert code == cli.INCONCLUSIVE and "InvalidGraph" in err


def test_info(capsys):
    code, out, _ = run(capsys, "info", "--p", 2, "--n", 2)
    report = json.loads(out)
    assert code == cli.OK
    assert report["tree_valency"] == 5 and report["cap"] == 32
    assert report["subalgebras"]["FullAlgebra"]["e"] == 2
    assert report["subalgebras"]["UnramifiedField(2)"]["eprime"] == 2
