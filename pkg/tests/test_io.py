import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shortexp import io as sio
from shortexp import worked_example as ex
from shortexp.analysis import ExperimentLog, check_informativity
from shortexp.design import ReplayPlant, Replay, online_experiment
from shortexp.linalg import Mode
from shortexp.lti import random_minimal_system

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 6), st.data())
def test_csv_round_trip_is_bit_exact(m, p, t, data):
    u = np.array(data.draw(st.lists(st.lists(fractions, min_size=t, max_size=t), min_size=m, max_size=m)), dtype=object).reshape(m, t)
    y = np.array(data.draw(st.lists(st.lists(fractions, min_size=t, max_size=t), min_size=p, max_size=p)), dtype=object).reshape(p, t)
    log = ExperimentLog(u, y)
    text = sio.log_to_csv(log)
    back = sio.log_from_csv(text)
    assert back == log
    assert sio.log_to_csv(back) == text


def test_csv_layout(ref_log):
    lines = sio.log_to_csv(ref_log).splitlines()
    assert lines[0] == "t,u_1,u_2,y_1,y_2"
    assert lines[1] == "0,1,0,2,1"
    assert len(lines) == 15


def test_csv_comment_lines_are_skipped(tmp_path, ref_log):
    path = tmp_path / "log.csv"
    sio.write_log(path, ref_log, comment="seed=3")
    assert path.read_text().startswith("# seed=3\n")
    assert sio.read_log(path) == ref_log


def test_csv_float_mode(ref_log):
    back = sio.log_from_csv(sio.log_to_csv(ref_log), Mode.FLOAT)
    assert back.mode == Mode.FLOAT
    assert np.array_equal(np.asarray(back.y, float), np.asarray(ref_log.y, float))


@pytest.mark.parametrize(
    "text",
    [
        "",
        "u_1,y_1\n1,2\n",
        "t,y_1,u_1\n0,1,2\n",
        "t,u_1,y_1\n0,1\n",
        "t,u_1,y_1\n1,1,2\n",
        "t,u_1,y_1\n0,x,2\n",
    ],
)
def test_malformed_csv(text):
    with pytest.raises(ValueError):
        sio.log_from_csv(text)


def test_system_round_trip(tmp_path):
    sys = random_minimal_system(3, 2, 2, seed=1)
    path = tmp_path / "sys.json"
    sio.write_system(path, sys, seed=1)
    assert sio.read_system(path) == sys
    assert json.loads(path.read_text())["seed"] == 1


def test_system_from_dict_errors():
    with pytest.raises(ValueError):
        sio.system_from_dict({"n": 1, "m": 1, "p": 1, "A": [[1]]})


def test_report_round_trip(ref_log):
    rep = check_informativity(ref_log, 4, 4)
    d = json.loads(sio.report_to_json(rep, seed=0))
    assert d["seed"] == 0
    assert sio.report_from_dict(d) == rep


def test_trace_jsonl(ref_log):
    _, trace = online_experiment(ReplayPlant(ref_log), 4, 4, Replay(ex.INPUTS))
    lines = sio.trace_to_jsonl(trace, meta={"seed": 0}).splitlines()
    assert json.loads(lines[0]) == {"meta": {"seed": 0}}
    records = [json.loads(x) for x in lines[1:]]
    assert len(records) == 14
    assert records[-1]["rank_H_next"] == 11
