import json
import subprocess
import sys

import pytest

from gli.cli import main
from gli.core import Graphon, GraphonSystem
from gli.io import dumps


def run(*argv):
    return main([str(a) for a in argv])


def files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture
def indep(tmp_path):
    sys_ = GraphonSystem.independent([Graphon.analytic("product"), Graphon.constant(0.3)])
    p = tmp_path / "sys.json"
    p.write_text(dumps(sys_.to_dict()))
    return p


def test_measure_independence(indep, tmp_path):
    out = tmp_path / "m.json"
    assert run("measure", "--system", indep, "--measures", "mi,tc,distance", "--out", out) == 0
    doc = json.loads(out.read_text())
    mi = doc["reports"][0]
    assert mi["name"] == "mi" and abs(mi["value"]) < 1e-12
    assert set(doc["provenance"]) >= {"config_hash", "seed", "version"}


def test_gen_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("gen", "--recipe", "chain_xy", "--n", 256, "--seed", 1, "--out", d) == 0
    fa = files(a)
    assert fa == files(b) and "layer_002.adj" in fa
    assert run("gen", "--recipe", "chain_xy", "--n", 256, "--seed", 2, "--out", tmp_path / "c") == 0
    assert files(tmp_path / "c")["layer_000.adj"] != fa["layer_000.adj"]


def test_pipeline_deterministic(tmp_path):
    g = tmp_path / "g"
    assert run("gen", "--recipe", "mi_scenario1", "--n", 96, "--out", g) == 0
    outs = []
    for rep in ("r1", "r2"):
        d = tmp_path / rep
        assert run("fit", "--manifest", g, "--out", d / "fit.json", "--threads", 1 if rep == "r1" else 3) == 0
        assert run("measure", "--system", d / "fit.json", "--measures", "entropy,mi,distance,tc,dtc",
                   "--out", d / "meas.json") == 0
        assert run("mimatrix", "--manifest", g, "--out", d / "mm") == 0
        assert run("mimatrix", "--system", d / "fit.json", "--out", d / "ms") == 0
        assert run("rmse", "--family", "mi_scenario2", "--trials", 2, "--ns", "32,48", "--out", d / "rmse") == 0
        assert run("scenario", "percolation_redundancy", "--n", 96, "--max-sweeps", 1,
                   "--out", d / "scen.json") == 0
        outs.append(files(d))
    assert outs[0] == outs[1]
    fit = json.loads(outs[0]["fit.json"])
    assert fit["assignment"]["h"] * fit["assignment"]["k"] + fit["assignment"]["r"] == 96
    assert "mi_raw.csv" in " ".join(outs[0])
    assert outs[0]["mm/mi_raw.csv"].startswith(b"# gli-mi-raw d=2")


def test_scenario_xor(tmp_path):
    out = tmp_path / "x.json"
    assert run("scenario", "xor_synergy", "--seed", 3, "--out", out) == 0
    e = json.loads(out.read_text())["estimate"]
    assert e["ii"] < 0 and e["ii_lo"] - 1e-6 <= e["ii"] <= e["ii_hi"] + 1e-6
    assert abs(e["ii"] + 0.17) <= 0.05


def test_ingest_deterministic(tmp_path):
    src = tmp_path / "c.txt"
    src.write_text("0 A B\n20 A B\n3620 B C\nbad line here\n")
    assert run("ingest", "--input", src, "--out", tmp_path / "strict") == 2
    assert run("ingest", "--input", src, "--lenient", "--out", tmp_path / "a") == 0
    assert run("ingest", "--input", src, "--lenient", "--out", tmp_path / "b") == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["node_ids"] == ["A", "B", "C"] and len(man["layers"]) == 2


def test_exit_codes(indep, tmp_path, capsys):
    assert run("measure", "--system", indep, "--measures", "ii") == 2  # d=2 has no II
    assert run("scenario", "nope") == 2
    assert run("bogus") == 2
    assert run("fit", "--manifest", tmp_path / "missing") == 1
    src = tmp_path / "c.txt"
    src.write_text("x y\n")
    assert run("ingest", "--input", src, "--out", tmp_path / "o") == 2
    assert "line 1" in capsys.readouterr().err
    assert run("gen", "--recipe", "chain_xy") == 2  # needs --out


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "gli.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("gli ")
