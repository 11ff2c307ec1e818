import json
import subprocess
import sys

import pytest

from byz_taskrep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_alloc(capsys, tmp_path):
    grid = tmp_path / "g.txt"
    code, out, _ = run(capsys, "alloc", "-n", "9", "-p", "9", "-s", "4", "-u", "2", "--out", str(grid))
    assert code == 0
    assert "k*=2, bound=2" in out and "rho=6" in out
    assert grid.read_text().startswith("9 9\n111111000\n")


def test_alloc_errors(capsys):
    assert run(capsys, "alloc", "-n", "5", "-p", "5", "-s", "4", "-u", "2")[0] == 2
    code, _, err = run(capsys, "alloc", "-n", "9", "-p", "10", "-s", "4", "-u", "2")
    assert code == 2 and "[7, 7, 7, 7, 7, 7, 6, 6, 6]" in err


def test_simulate_symmetrization(capsys, tmp_path):
    out_path = tmp_path / "t.json"
    code, out, _ = run(capsys, "simulate", "-n", "9", "-p", "9", "-s", "4", "-u", "2",
                       "--protocol", "full", "--attack", "symmetrization", "--out", str(out_path))
    assert code == 0 and "c=2" in out.splitlines()
    assert json.loads(out_path.read_text())["c"] == 2


def test_simulate_commit_none(capsys):
    code, out, _ = run(capsys, "simulate", "-n", "9", "-p", "9", "-s", "4", "-u", "2",
                       "--protocol", "commit", "--attack", "none")
    assert code == 0 and "kappa_values=9" in out and "c=0" in out


def test_simulate_from_grid_and_attack_file(capsys, tmp_path):
    grid = tmp_path / "g.txt"
    run(capsys, "alloc", "-n", "5", "-p", "5", "-s", "2", "-u", "1", "--out", str(grid))
    attack = tmp_path / "a.json"
    attack.write_text(json.dumps({"malicious": [1], "reports": [{"worker": 1, "subtask": 1, "value": 9}]}))
    code, out, _ = run(capsys, "simulate", "--grid", str(grid), "-s", "2", "-u", "1",
                       "--protocol", "trivial", "--attack-file", str(attack))
    assert code == 0 and "eliminated=[1]" in out
    attack.write_text(json.dumps({"malicious": [2], "reports": [{"worker": 1, "subtask": 1, "value": 9}]}))
    assert run(capsys, "simulate", "--grid", str(grid), "-s", "2", "-u", "1",
               "--attack-file", str(attack))[0] == 2


def test_simulate_random_deterministic(capsys):
    args = ("simulate", "-n", "6", "-p", "6", "-s", "4", "-u", "1", "--attack", "random", "--seed", "3")
    first = run(capsys, *args)
    assert first == run(capsys, *args) and first[0] == 0


def test_verify_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "-n", "5", "-p", "5", "-s", "2", "-u", "1", "--no-game")
    assert code == 0 and "plans=640" in out
    report = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "-n", "5", "-p", "5", "-s", "2", "-u", "1", "--out", str(report))
    assert code == 4 and "value-symbol bound" in err
    assert json.loads(report.read_text())["ok"] is False
    assert run(capsys, "verify", "-n", "9", "-p", "9", "-s", "4", "-u", "2", "--budget", "10")[0] == 2


def write_cfg(tmp_path, **over):
    cfg = {"version": 1, "n": 9, "s": 4, "u_list": [2, 3], "p_min": 9, "p_max": 45}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_sweep_and_plot(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("BYZ_TASKREP_THREADS", "2")
    csv_path, svg = tmp_path / "r.csv", tmp_path / "r.svg"
    code, _, _ = run(capsys, "sweep", str(write_cfg(tmp_path)), "--out", str(csv_path),
                     "--svg", str(tmp_path / "side.svg"))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "p,u,lambda,k_star,exact,c_bound,trivial_bound,ratio"
    assert lines[1] == "9,2,1,2,1,2,2,1"
    assert len(lines) == 1 + 37 * 2
    assert run(capsys, "plot", str(csv_path), str(svg))[0] == 0
    text = svg.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text and "u=2" in text and "u=3" in text
    assert (tmp_path / "side.svg").exists()


def test_sweep_config_validation(capsys, tmp_path):
    assert run(capsys, "sweep", str(write_cfg(tmp_path, extra=1)))[0] == 2
    assert run(capsys, "sweep", str(write_cfg(tmp_path, version=2)))[0] == 2
    assert run(capsys, "sweep", str(tmp_path / "missing.json"))[0] == 2


def test_plot_empty_and_single(capsys, tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("p,u,lambda,k_star,exact,c_bound,trivial_bound,ratio\n")
    assert run(capsys, "plot", str(empty), str(tmp_path / "e.svg"))[0] == 2
    one = tmp_path / "o.csv"
    one.write_text("p,u,lambda,k_star,exact,c_bound,trivial_bound,ratio\n9,2,1,2,1,2,2,1\n")
    assert run(capsys, "plot", str(one), str(tmp_path / "o.svg"))[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "byz_taskrep", "alloc", "-n", "4", "-p", "4",
                          "-s", "2", "-u", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and "rho=3" in res.stdout
