"""Recover a state-space model from informative input/output data.

With ``ell = ell_min`` the last output block row of ``H_{ell,t}`` lies in the
row space of ``G_{ell,t}``, so there is a matrix ``K`` with

    y(s + ell) = K [y(s), ..., y(s+ell-1), u(s), ..., u(s+ell)]

on every window of the data. For informative data the columns of
``H_{ell,t}`` span every length-``ell+1`` trajectory of the true system, so
this predictor is exact on all its trajectories. Running it from a zero past
(which forces a zero state, the system being observable) gives the Markov
parameters, and a rank factorisation of their block Hankel matrix gives
``(A, B, C)`` up to a change of basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .analysis import ExperimentLog, InformativityReport, hankel_g, hankel_io
from .exceptions import IdentificationError, NotInformative
from .linalg import Mode
from .lti import (
    StateSpaceSystem,
    is_minimal,
    observability_matrix,
    simulate,
    toeplitz_markov,
)

FLOAT_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class IdentifiedModel:
    system: StateSpaceSystem
    residual: float
    source_report: InformativityReport
    x0: np.ndarray
    states: np.ndarray  # n x (t+1)


def output_predictor(log: ExperimentLog, ell: int) -> np.ndarray:
    """K (p x (ell p + (ell+1) m)) reproducing the last output block of H_{ell,t} from G_{ell,t}."""
    G = hankel_g(log, ell)
    H = hankel_io(log, ell)
    y_last = H[ell * log.p : (ell + 1) * log.p, :]
    try:
        Kt = la.solve(G.T, y_last.T)
    except np.linalg.LinAlgError as exc:
        raise IdentificationError(f"delta_(ell={ell}) is not zero on these data") from exc
    return Kt.T


def predicted_markov_parameters(K: np.ndarray, ell: int, m: int, p: int, horizon: int) -> list[np.ndarray]:
    """Impulse response of the predictor started from a zero past."""
    mode = la.mode_of(K)
    ys = [la.zeros(p, m, mode) for _ in range(ell)]
    us = [la.zeros(m, m, mode) for _ in range(ell)] + [la.eye(m, mode)]
    us += [la.zeros(m, m, mode) for _ in range(horizon - 1)]
    out = []
    for s in range(horizon):
        window = np.vstack(ys[s : s + ell] + us[s : s + ell + 1])
        y = la.matmul(K, window)
        ys.append(y)
        out.append(y)
    return out


def ho_kalman(h: list[np.ndarray], n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A, B, C) of order n from Markov parameters h[1..2n] (h[0] = D is unused)."""
    p, m = h[0].shape
    mode = la.mode_of(h[0])
    if n == 0:
        return la.zeros(0, 0, mode), la.zeros(0, m, mode), la.zeros(p, 0, mode)
    Hk = la.stack_blocks([[h[i + j + 1] for j in range(n)] for i in range(n)])
    Hs = la.stack_blocks([[h[i + j + 2] for j in range(n)] for i in range(n)])
    if mode == Mode.FLOAT:
        # the order is known, so truncate the SVD rather than guess a rank
        U, s, Vt = np.linalg.svd(Hk)
        if s[n - 1] <= la.float_tolerance(Hk, s):
            raise IdentificationError(f"Markov Hankel matrix has rank below {n}")
        sq = np.sqrt(s[:n])
        O = U[:, :n] * sq
        R = sq[:, None] * Vt[:n]
        A = np.linalg.pinv(O) @ Hs @ np.linalg.pinv(R)
        return A, R[:, :m].copy(), O[:p, :].copy()
    cols = la.pivot_columns(Hk)
    if len(cols) != n:
        raise IdentificationError(f"Markov Hankel matrix has rank {len(cols)}, expected {n}")
    O = Hk[:, cols]
    R = la.solve(O, Hk)
    rows = la.pivot_columns(O.T)
    rcols = la.pivot_columns(R)
    A = la.matmul(
        la.matmul(la.inverse(O[rows, :]), Hs[np.ix_(rows, rcols)]),
        la.inverse(R[:, rcols]),
    )
    return A, R[:, :m].copy(), O[:p, :].copy()


def identify(log: ExperimentLog, report: InformativityReport) -> IdentifiedModel:
    """Model of order ``report.n_min`` explaining ``log``, unique up to isomorphism."""
    if not report.informative:
        raise NotInformative(f"data are not informative: {report.failed_condition}")
    if report.t != log.t or report.m != log.m or report.p != log.p:
        raise ValueError("report does not belong to this log")
    ell, n = report.ell_min, report.n_min
    m, p, t = log.m, log.p, log.t
    mode = log.mode

    K = output_predictor(log, ell)
    h = predicted_markov_parameters(K, ell, m, p, 2 * n + 1)
    A, B, C = ho_kalman(h, n)
    system = StateSpaceSystem(A, B, C, h[0])
    if not is_minimal(system):
        raise IdentificationError("realized system is not minimal")

    # initial state: y = Omega_{t-1} x0 + Theta_{t-1} u
    ystack = log.y.T.reshape(-1, 1)
    ustack = log.u.T.reshape(-1, 1)
    rhs = ystack - la.matmul(toeplitz_markov(system, t - 1), ustack)
    try:
        x0 = la.solve(observability_matrix(system, t - 1), rhs).reshape(-1)
    except np.linalg.LinAlgError as exc:
        raise IdentificationError("no initial state reproduces the data") from exc
    traj = simulate(system, x0, log.u)

    if mode == Mode.FLOAT:
        err = np.abs(np.asarray(traj.y, float) - np.asarray(log.y, float))
        residual = float(err.max()) if err.size else 0.0
        scale = max(1.0, float(np.abs(np.asarray(log.y, float)).max()))
        if residual > FLOAT_RESIDUAL_RTOL * scale:
            raise IdentificationError(f"residual {residual:g} exceeds tolerance")
    else:
        diff = [abs(a - b) for a, b in zip(traj.y.flat, log.y.flat)]
        residual = float(max(diff)) if diff else 0.0
        if residual != 0:
            raise IdentificationError(f"exact residual {residual} is not zero")
    return IdentifiedModel(system, residual, report, traj.x0, traj.x)
