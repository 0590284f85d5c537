"""File formats: system JSON, log CSV, report JSON, trace JSON lines.

Exact scalars are written as canonical rational strings ("3", "-1/2") so that
exact-mode round trips are bit-exact. Float scalars are written as JSON
numbers / ``repr`` text.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from . import linalg as la
from .analysis import ExperimentLog, InformativityReport
from .design import DesignTrace
from .linalg import Mode
from .lti import StateSpaceSystem


def _rows(M: np.ndarray) -> list[list]:
    if la.mode_of(M) == Mode.FLOAT:
        return [[float(v) for v in row] for row in M]
    return [[la.fmt_scalar(v) for v in row] for row in M]


def system_to_dict(sys: StateSpaceSystem) -> dict:
    return {
        "n": sys.n,
        "m": sys.m,
        "p": sys.p,
        "A": _rows(sys.A),
        "B": _rows(sys.B),
        "C": _rows(sys.C),
        "D": _rows(sys.D),
    }


def system_from_dict(d: dict, mode: Mode = Mode.EXACT) -> StateSpaceSystem:
    try:
        n, m, p = int(d["n"]), int(d["m"]), int(d["p"])
        return StateSpaceSystem(
            la.as_matrix(d["A"], mode, shape=(n, n)),
            la.as_matrix(d["B"], mode, shape=(n, m)),
            la.as_matrix(d["C"], mode, shape=(p, n)),
            la.as_matrix(d["D"], mode, shape=(p, m)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed system description: {exc}") from exc


def write_system(path, sys: StateSpaceSystem, **extra) -> None:
    d = system_to_dict(sys)
    d.update(extra)
    Path(path).write_text(json.dumps(d, indent=2) + "\n")


def read_system(path, mode: Mode = Mode.EXACT) -> StateSpaceSystem:
    return system_from_dict(json.loads(Path(path).read_text()), mode)


def log_to_csv(log: ExperimentLog) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"u_{i + 1}" for i in range(log.m)] + [f"y_{i + 1}" for i in range(log.p)])
    for s in range(log.t):
        w.writerow([s] + [la.fmt_scalar(v) for v in log.u[:, s]] + [la.fmt_scalar(v) for v in log.y[:, s]])
    return buf.getvalue()


def log_from_csv(text: str, mode: Mode = Mode.EXACT) -> ExperimentLog:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = [r for r in csv.reader(lines) if r]
    if not rows:
        raise ValueError("empty CSV log")
    header = [h.strip() for h in rows[0]]
    if header[0] != "t":
        raise ValueError("CSV log must start with a 't' column")
    ucols = [h for h in header[1:] if h.startswith("u_")]
    ycols = [h for h in header[1:] if h.startswith("y_")]
    m, p = len(ucols), len(ycols)
    if (
        m < 1
        or p < 1
        or header[1:] != [f"u_{i + 1}" for i in range(m)] + [f"y_{i + 1}" for i in range(p)]
    ):
        raise ValueError(f"bad CSV header {header}; expected t,u_1..u_m,y_1..y_p")
    u = la.zeros(m, len(rows) - 1, mode)
    y = la.zeros(p, len(rows) - 1, mode)
    for s, row in enumerate(rows[1:]):
        if len(row) != 1 + m + p:
            raise ValueError(f"row {s + 1} has {len(row)} fields, expected {1 + m + p}")
        if int(row[0]) != s:
            raise ValueError(f"row {s + 1} has t={row[0]}, expected {s}")
        try:
            for i in range(m):
                u[i, s] = la.to_scalar(row[1 + i], mode)
            for i in range(p):
                y[i, s] = la.to_scalar(row[1 + m + i], mode)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"row {s + 1}: {exc}") from exc
    return ExperimentLog(u, y)


def write_log(path, log: ExperimentLog, comment: str | None = None) -> None:
    """Write ``log``; an optional ``comment`` goes on a leading ``#`` line."""
    head = f"# {comment}\n" if comment else ""
    Path(path).write_text(head + log_to_csv(log))


def read_log(path, mode: Mode = Mode.EXACT) -> ExperimentLog:
    return log_from_csv(Path(path).read_text(), mode)


def report_to_json(report: InformativityReport, **extra) -> str:
    d = report.to_dict()
    d.update(extra)
    return json.dumps(d, indent=2)


def report_from_dict(d: dict) -> InformativityReport:
    fields = InformativityReport.__dataclass_fields__
    return InformativityReport(**{k: v for k, v in d.items() if k in fields})


def trace_to_jsonl(trace: DesignTrace, meta: dict | None = None) -> str:
    """One JSON object per step; ``meta`` (if given) becomes a leading ``{"meta": ...}`` line."""
    head = json.dumps({"meta": meta}) + "\n" if meta else ""
    return head + "".join(json.dumps(r.to_json()) + "\n" for r in trace.records)
