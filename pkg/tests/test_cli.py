import json

import pytest

from shortexp import io as sio
from shortexp import worked_example as ex
from shortexp.analysis import ExperimentLog
from shortexp.cli import main


@pytest.fixture
def files(tmp_path):
    sio.write_log(tmp_path / "ref.csv", ex.log())
    sio.write_log(tmp_path / "mod.csv", ex.modified_log())
    sio.write_log(tmp_path / "short.csv", ex.log().truncate(8))
    sio.write_system(tmp_path / "truth.json", ex.system())
    return tmp_path


def write_config(path, **cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def test_run_reference_replay(files, capsys):
    cfg = write_config(
        files / "run.json",
        plant={"system_path": "truth.json", "x0": ex.X0},
        L=4,
        N=4,
        policy={"kind": "replay", "log": "ref.csv"},
        seed=3,
    )
    out = files / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    assert sio.read_log(out / "log.csv") == ex.log()
    report = json.loads((out / "report.json").read_text())
    assert report["T"] == 14 and report["informative"] and report["seed"] == 3
    lines = (out / "trace.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["meta"]["seed"] == 3
    assert len(lines) == 15
    assert "seed=3" in (out / "log.csv").read_text().splitlines()[0]


def test_run_replay_log_plant(files):
    cfg = write_config(files / "run.json", plant={"replay_log": "ref.csv"}, L=4, N=4)
    assert main(["run", "--config", cfg, "--out-dir", str(files / "o")]) == 0


def test_run_prior_bounds_violated(files, capsys):
    cfg = write_config(
        files / "run.json",
        plant={"system_path": "truth.json", "x0": ex.X0},
        L=4,
        N=2,
        policy={"kind": "replay", "log": "ref.csv"},
    )
    assert main(["run", "--config", cfg, "--out-dir", str(files / "o")]) == 3
    assert "prior bounds violated" in capsys.readouterr().err


def test_run_static_plant(files):
    system = {"n": 0, "m": 2, "p": 1, "A": [], "B": [], "C": [[]], "D": [[1, 2]]}
    cfg = write_config(files / "run.json", plant={"system": system, "x0": []}, L=2, N=1)
    out = files / "o"
    assert main(["run", "--config", cfg, "--out-dir", str(out)]) == 0
    La = min(2, 1)
    assert json.loads((out / "report.json").read_text())["T"] == La + (La + 1) * 2


def test_run_random_trials(files):
    cfg = write_config(
        files / "run.json", plant={"random": {"n": 2, "m": 1, "p": 2}}, L=2, N=3, policy="seeded-random"
    )
    out = files / "o"
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--trials", "3", "--seed", "10"]) == 0
    seeds = [json.loads((out / f"trial_{i}" / "report.json").read_text())["seed"] for i in range(3)]
    assert seeds == [10, 11, 12]
    assert json.loads((out / "trial_1" / "system.json").read_text())["seed"] == 11


def test_run_config_errors(files):
    assert main(["run"]) == 2
    assert main(["run", "--config", str(files / "missing.json")]) == 2
    two = write_config(files / "bad.json", plant={"replay_log": "ref.csv", "system_path": "truth.json"}, L=1, N=1)
    assert main(["run", "--config", two]) == 2
    nob = write_config(files / "nob.json", plant={"replay_log": "ref.csv"})
    assert main(["run", "--config", nob]) == 2


def test_check(files, capsys):
    assert main(["check", "--log", str(files / "ref.csv"), "-L", "4", "--upper-n", "4"]) == 0
    capsys.readouterr()
    assert main(["check", "--log", str(files / "mod.csv"), "-L", "4", "--upper-n", "4"]) == 1
    assert json.loads(capsys.readouterr().out)["rank_H"] == 10
    assert main(["check", "--log", str(files / "short.csv"), "-L", "4", "--upper-n", "4"]) == 1
    assert json.loads(capsys.readouterr().out)["length_ok"] is False


def test_check_malformed(files):
    (files / "bad.csv").write_text("t,u_1\n0,1\n")
    assert main(["check", "--log", str(files / "bad.csv"), "-L", "1", "--upper-n", "1"]) == 2
    assert main(["check", "--log", str(files / "nope.csv"), "-L", "1", "--upper-n", "1"]) == 2
    assert main(["check", "--log", str(files / "ref.csv")]) == 2


def test_identify_and_compare(files, capsys):
    model = files / "model.json"
    args = ["identify", "--log", str(files / "ref.csv"), "-L", "4", "--upper-n", "4", "--out", str(model)]
    assert main(args) == 0
    d = json.loads(model.read_text())
    assert d["n"] == 3 and d["residual"] == 0
    assert d["source_log"].endswith("ref.csv")
    assert main(["compare", str(model), str(files / "truth.json")]) == 0
    assert "isomorphic=True" in capsys.readouterr().out


def test_identify_static_gain(files, capsys):
    log = ExperimentLog.from_data([[1, 0, 1], [0, 1, 1]], [[2, 3, 5]])
    sio.write_log(files / "static.csv", log)
    out = files / "m.json"
    assert main(["identify", "--log", str(files / "static.csv"), "-L", "0", "--upper-n", "0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["n"] == 0


def test_identify_not_informative(files, capsys):
    assert main(["identify", "--log", str(files / "mod.csv"), "-L", "4", "--upper-n", "4"]) == 1
    assert "rank condition failed" in capsys.readouterr().out


def test_compare_not_isomorphic(files, capsys):
    other = ex.system()
    sio.write_system(files / "other.json", type(other)(other.A, other.B, other.C, other.D * 0))
    assert main(["compare", str(files / "other.json"), str(files / "truth.json")]) == 1


def test_compare_counts(capsys):
    assert main(["compare", "--counts", "80", "100", "150", "20", "100"]) == 0
    out = capsys.readouterr().out
    assert "5850" in out and "20330" in out and "8280" in out


def test_reproduce_paper(capsys):
    assert main(["reproduce-paper"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_reproduce_paper_float(capsys):
    assert main(["reproduce-paper", "--mode", "float"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_reproduce_paper_mutation(tmp_path, capsys):
    log = ex.log()
    y = log.y.copy()
    y[1, 9] = 0  # flip one output sample
    sio.write_log(tmp_path / "bad.csv", ExperimentLog(log.u, y))
    assert main(["reproduce-paper", "--log", str(tmp_path / "bad.csv")]) == 1
    out = capsys.readouterr().out
    assert "first failing check: rank H_k,t" in out


def test_usage_errors():
    assert main([]) == 2
    assert main(["bogus"]) == 2
