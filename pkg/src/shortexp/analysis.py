"""Data-side rank quantities and the informativity test.

Given an input/output record ``(u_{[0,t-1]}, y_{[0,t-1]})`` this module forms
the data Hankel matrices

    H_{k,t} = [H_k(y_{[0,t-1]}); H_k(u_{[0,t-1]})]
    G_{k,t} = [H_{k-1}(y_{[0,t-2]}); H_k(u_{[0,t-1]})]

and derives from their rank differences the shortest lag and the minimum
number of states of any system explaining the data, the data-refined lag
bound, and the two rank/length conditions that decide whether the data pin
down the system up to a change of state basis.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg as la
from .exceptions import BlanketAssumptionError, PriorBoundsViolated
from .linalg import Mode


@dataclass(frozen=True, eq=False)
class ExperimentLog:
    """Input/output record; columns of ``u`` (m x t) and ``y`` (p x t) are samples."""

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.u.ndim != 2 or self.y.ndim != 2:
            raise ValueError("u and y must be 2-D (channels x samples)")
        if self.u.shape[1] != self.y.shape[1]:
            raise ValueError(
                f"u has {self.u.shape[1]} samples but y has {self.y.shape[1]}"
            )
        if self.u.shape[0] < 1 or self.y.shape[0] < 1:
            raise ValueError("need m >= 1 and p >= 1")

    @classmethod
    def from_data(cls, u, y, mode: Mode = Mode.EXACT) -> "ExperimentLog":
        return cls(la.as_matrix(u, mode), la.as_matrix(y, mode))

    @classmethod
    def empty(cls, m: int, p: int, mode: Mode = Mode.EXACT) -> "ExperimentLog":
        return cls(la.zeros(m, 0, mode), la.zeros(p, 0, mode))

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[0]

    @property
    def t(self) -> int:
        return self.u.shape[1]

    @property
    def mode(self) -> Mode:
        return la.mode_of(self.u)

    def append(self, u_t, y_t) -> "ExperimentLog":
        ucol = la.as_vector(u_t, self.mode).reshape(-1, 1)
        ycol = la.as_vector(y_t, self.mode).reshape(-1, 1)
        return ExperimentLog(np.hstack([self.u, ucol]), np.hstack([self.y, ycol]))

    def truncate(self, t: int) -> "ExperimentLog":
        return ExperimentLog(self.u[:, :t], self.y[:, :t])

    def astype(self, mode: Mode) -> "ExperimentLog":
        return ExperimentLog(la.convert(self.u, mode), la.convert(self.y, mode))

    def __eq__(self, other):
        if not isinstance(other, ExperimentLog):
            return NotImplemented
        return (
            self.u.shape == other.u.shape
            and self.y.shape == other.y.shape
            and bool(np.all(self.u == other.u))
            and bool(np.all(self.y == other.y))
        )

    __hash__ = None


@dataclass(frozen=True)
class InformativityReport:
    t: int
    m: int
    p: int
    L: int
    N: int
    ell_min: int
    n_min: int
    L_actual: int
    rank_H: int
    required_rank: int
    required_length: int
    length_ok: bool
    rank_ok: bool
    informative: bool
    delta_profile: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def failed_condition(self) -> str | None:
        if self.informative:
            return None
        if not self.length_ok:
            return "length condition failed"
        return "rank condition failed"


def require_nonzero_input(log: ExperimentLog) -> None:
    if la.is_zero(log.u):
        raise BlanketAssumptionError("input sequence is identically zero")


def _check_depth(log: ExperimentLog, k: int) -> None:
    if k < 0 or k > log.t - 1:
        raise ValueError(f"depth k={k} outside [0, {log.t - 1}] for t={log.t}")


def hankel_io(log: ExperimentLog, k: int) -> np.ndarray:
    """H_{k,t}: output Hankel stacked over input Hankel, (k+1)(p+m) x (t-k)."""
    _check_depth(log, k)
    return np.vstack([la.hankel(log.y, k), la.hankel(log.u, k)])


def hankel_g(log: ExperimentLog, k: int) -> np.ndarray:
    """G_{k,t}: H_{k,t} without its last block row of outputs."""
    _check_depth(log, k)
    if k == 0:
        ypart = la.zeros(0, log.t, log.mode)
    else:
        ypart = la.hankel(log.y[:, : log.t - 1], k - 1)
    return np.vstack([ypart, la.hankel(log.u, k)])


def delta(log: ExperimentLog, k: int) -> int:
    """rank H_{k,t} - rank G_{k,t}, with the value p at k = -1."""
    if k == -1:
        return log.p
    return la.rank(hankel_io(log, k)) - la.rank(hankel_g(log, k))


def delta_profile(log: ExperimentLog) -> list[int]:
    """[delta_{-1,t}, delta_{0,t}, ..., delta_{q_t,t}] where q_t is the first zero."""
    require_nonzero_input(log)
    out = [log.p]
    for k in range(log.t):
        d = delta(log, k)
        out.append(d)
        if d == 0:
            return out
    raise AssertionError("delta_{t-1,t} must vanish for a nonzero input")


def shortest_lag_min_states(log: ExperimentLog) -> tuple[int, int]:
    """(ell_min, n_min) of the data."""
    prof = delta_profile(log)
    ell_min = len(prof) - 2
    return ell_min, sum(prof[1:])


def _lag_bound(ell_min: int, n_min: int, L: int, N: int) -> int:
    if L < 0 or N < 0:
        raise ValueError("bounds L and N must be nonnegative")
    if N < n_min:
        raise PriorBoundsViolated(
            f"prior bounds violated: data need at least {n_min} states but N={N}"
        )
    return min(L, N - n_min + ell_min)


def actual_lag_bound(log: ExperimentLog, L: int, N: int) -> int:
    """min(L, N - n_min + ell_min)."""
    return _lag_bound(*shortest_lag_min_states(log), L, N)


def check_informativity(log: ExperimentLog, L: int, N: int) -> InformativityReport:
    prof = delta_profile(log)
    ell_min, n_min = len(prof) - 2, sum(prof[1:])
    La = _lag_bound(ell_min, n_min, L, N)
    m = log.m
    required_rank = (La + 1) * m + n_min
    required_length = La + required_rank
    # H_{La,t} with no columns is void
    rank_H = la.rank(hankel_io(log, La)) if La <= log.t - 1 else 0
    length_ok = log.t >= required_length
    rank_ok = rank_H == required_rank
    return InformativityReport(
        t=log.t,
        m=m,
        p=log.p,
        L=L,
        N=N,
        ell_min=ell_min,
        n_min=n_min,
        L_actual=La,
        rank_H=rank_H,
        required_rank=required_rank,
        required_length=required_length,
        length_ok=length_ok,
        rank_ok=rank_ok,
        informative=length_ok and rank_ok,
        delta_profile=prof,
    )


def minimal_experiment_length(ell_true: int, n_true: int, m: int, L: int, N: int) -> int:
    """Fewest samples any informative experiment can have."""
    if ell_true > L or n_true > N or min(ell_true, n_true, L, N) < 0 or m < 1:
        raise ValueError(
            f"bounds violated: need 0 <= ell_true={ell_true} <= L={L}, "
            f"0 <= n_true={n_true} <= N={N}, m={m} >= 1"
        )
    La = min(L, N - n_true + ell_true)
    return La + (La + 1) * m + n_true
