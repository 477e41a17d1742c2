import json
import subprocess
import sys

import pytest

from twistcyl.cli import main, read_config_file, write_atomic


def test_build_writes_mesh_and_report(tmp_path):
    obj, rep = tmp_path / "p1.obj", tmp_path / "p1.json"
    assert main(["build", "--pattern", "P1", "--epsilon", "0.1", "--out", str(obj), "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["schema_version"] == 1 and report["max_gram_defect"] <= 1e-8
    assert abs(report["linking"]["crossings"]) == 1
    assert obj.read_text().count("\nf ") == report["mesh"]["faces"]


def test_build_mirror_flips_linking(tmp_path):
    signs = []
    for pid in ("P1", "P1m"):
        rep = tmp_path / f"{pid}.json"
        assert main(["build", "--pattern", pid, "--report", str(rep)]) == 0
        signs.append(json.loads(rep.read_text())["linking"]["crossings"])
    assert signs[0] == -signs[1]


def test_invalid_epsilon(capsys):
    assert main(["build", "--epsilon", "0.6"]) == 2
    assert "bands collide" in capsys.readouterr().err
    assert main(["verify", "--epsilon", "-1"]) == 2


def test_verify_exit_codes(tmp_path):
    rep = tmp_path / "v.json"
    assert main(["verify", "--pattern", "P1", "--epsilon", "0.1", "--report", str(rep)]) == 0
    bundle = json.loads(rep.read_text())
    chain = bundle["projection"]["chain"]
    assert chain["lambda"] >= chain["c1_plus_c2"] >= 2 - 0.02
    assert main(["verify", "--epsilon", "0.1", "--layer-gap", "0", "--report", str(rep)]) == 1
    assert json.loads(rep.read_text())["checks"]["embedded"] is False


def test_sweep_single_and_deterministic(tmp_path):
    outs = []
    for k in range(2):
        csv, js = tmp_path / f"s{k}.csv", tmp_path / f"s{k}.json"
        assert main(["sweep", "--pattern", "P1", "--epsilons", "0.1", "--out", str(csv), "--report", str(js)]) == 0
        outs.append((csv.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]
    assert len(outs[0][0].decode().strip().splitlines()) == 2


def test_sweep_rejects_bad_epsilons():
    assert main(["sweep", "--pattern", "P1", "--epsilons", "0.1,0.2"]) == 2
    assert main(["sweep", "--pattern", "P9", "--epsilons", "0.1"]) == 2


def test_lemmas(tmp_path, capsys):
    assert main(["lemmas", "--trials", "0"]) == 0
    empty = json.loads(capsys.readouterr().out)
    assert empty["suites"] == {} and empty["pass"]
    rep = tmp_path / "l.json"
    assert main(["lemmas", "--trials", "20", "--report", str(rep)]) == 0
    suites = json.loads(rep.read_text())["suites"]
    assert suites["hopf_linking"]["trials"] == 10 and suites["line_lemma"]["violations"] == 0


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\npattern = P2\nepsilon: 0.2\n--seed = 3\n")
    assert read_config_file(cfg) == {"pattern": "P2", "epsilon": "0.2", "seed": "3"}
    assert main(["build", "--config", str(cfg), "--epsilon", "0.05"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pattern"] == "P2" and rep["epsilon"] == 0.05
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        main(["build", "--config", str(cfg)])
    assert exc.value.code == 2


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "sub" / "x.txt"
    write_atomic(p, "one")
    write_atomic(p, "two")
    assert p.read_text() == "two"
    assert [f.name for f in p.parent.iterdir()] == ["x.txt"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "twistcyl.cli", "lemmas", "--trials", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["trials"] == 0
