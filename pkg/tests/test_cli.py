import json
import subprocess
import sys

import numpy as np
import pytest

from stabfield.channel import FieldConfig
from stabfield.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_graph(tmp_path, capsys):
    assert run("gen-graph", "--graph", "lattice:2x3:open,closed") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["n"] == 6
    path = tmp_path / "g.json"
    path.write_text(json.dumps(d))
    assert run("gen-graph", "--graph", path, "--out", tmp_path / "o") == 0
    assert json.loads((tmp_path / "o" / "graph.json").read_text()) == d


def test_solvability(capsys):
    assert run("solvability", "--graph", "open_chain:5", "--axis", "x") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["det"] == 0 and d["rank_defect"] == 1
    assert run("solvability", "--graph", "closed_chain:6") == 0
    d = json.loads(capsys.readouterr().out)
    assert abs(d["x"]["det"]) == 4 and d["y"]["det"] == 0 and d["z"]["det"] == 1


def test_fig0(tmp_path):
    assert run("fig0", "--out", tmp_path, "--max-size", "6") == 0
    rows = (tmp_path / "fig0.csv").read_text().splitlines()
    assert rows[0] == "m1,m2,panel,singular" and len(rows) == 1 + 6 * 6 * 6
    assert len(list(tmp_path.glob("fig0_*.csv"))) == 6


def test_simulate_then_reconstruct(tmp_path, capsys):
    cfg = FieldConfig.aligned([0.4, 1.0, 2.0, 0.7], "z")
    (tmp_path / "f.json").write_text(cfg.to_json())
    assert run("simulate", "--graph", "open_chain:4", "--fields", tmp_path / "f.json", "--M", "1000000",
               "--out", tmp_path, "--seed", "3") == 0
    assert run("reconstruct", "--graph", "open_chain:4", "--axis", "z", "--syndromes", tmp_path / "syndromes.csv") == 0
    d = json.loads(capsys.readouterr().out)
    beta = d["candidates"][d["chosen"]]["beta"]
    np.testing.assert_allclose(beta, np.cos(cfg.lambdas), atol=5e-3)


def test_simulate_is_deterministic(tmp_path):
    for k in (1, 2):
        assert run("simulate", "--graph", "open_chain:4", "--axis", "x", "--M", "100", "--seed", "9",
                   "--out", tmp_path / str(k)) == 0
    for name in ("syndromes.csv", "fields.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()


def test_simulate_joint(tmp_path):
    assert run("simulate", "--graph", "open_chain:3", "--M", "50", "--joint", "--out", tmp_path) == 0
    assert (tmp_path / "syndromes.csv").exists()


def test_sweep(tmp_path):
    args = ["sweep", "--graph", "open_chain:3", "--axis", "z", "--param", "M", "--values", "100,1000",
            "--reps", "5", "--seed", "1"]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b", "--workers", "2") == 0
    a = (tmp_path / "a" / "sweep_z_M.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep_z_M.csv").read_bytes()
    meta = json.loads((tmp_path / "a" / "sweep_z_M.json").read_text())
    assert meta["values"] == [100, 1000] and meta["reps"] == 5


def test_sweep_plot(tmp_path):
    pytest.importorskip("matplotlib")
    assert run("sweep", "--graph", "open_chain:4", "--axis", "x", "--param", "q", "--values", "0,0.5",
               "--reps", "2", "--out", tmp_path, "--plot") == 0
    assert (tmp_path / "sweep_x_q.png").stat().st_size > 0


def test_multibasis_simulate_and_fit(tmp_path):
    cfg = FieldConfig.random(3, np.random.default_rng(1))
    (tmp_path / "f.json").write_text(cfg.to_json())
    assert run("multibasis", "--graph", "open_chain:3", "--fields", tmp_path / "f.json", "--reps", "1",
               "--restarts", "3", "--out", tmp_path, "--seed", "4") == 0
    lines = (tmp_path / "distances.csv").read_text().splitlines()
    assert lines[0] == "rep,vertex,sq_distance,cost,converged" and len(lines) == 4
    assert run("multibasis", "--graph", "open_chain:3", "--measured", tmp_path / "dataset_exact.csv",
               "--out", tmp_path / "fit") == 0
    est = json.loads((tmp_path / "fit" / "estimate.json").read_text())
    fit = FieldConfig.from_dict(est)
    np.testing.assert_allclose(fit.betas, cfg.betas, atol=1e-6)


def test_oracle_check_exit_codes(capsys):
    assert run("oracle-check", "--battery", "exact", "--configs", "2") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and all(r["closed_form_exact"] for r in report["graphs"])
    assert run("oracle-check", "--battery", "all", "--configs", "2") == 1


def test_analyze(capsys):
    assert run("analyze", "--graph", "open_chain:10", "--eps", "0.01") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["axes"]["x"]["resilient_vertices"] == [3, 4, 7, 8]
    assert "perturbation_bound" in d["axes"]["y"]


def test_errors_are_json(tmp_path, capsys):
    assert run("reconstruct", "--graph", "open_chain:5", "--axis", "x", "--syndromes", tmp_path / "none.csv") == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "invalid_input"
    (tmp_path / "s.csv").write_text("vertex,count0,count1,M\n" + "".join(f"{a},5,5,10\n" for a in range(1, 6)))
    assert run("reconstruct", "--graph", "open_chain:5", "--axis", "x", "--syndromes", tmp_path / "s.csv") == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "error" in err
    assert run("gen-graph", "--graph", "wheel:5") == 2


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "stabfield.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
