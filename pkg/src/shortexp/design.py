"""Online input design that stops at the shortest informative experiment.

The procedure grows the depth ``k`` of the data Hankel matrix one step at a
time. At a fixed depth it keeps choosing inputs off an affine hyperplane
computed from a left-kernel vector of ``G_{k,t}`` (each such input raises
``rank H_{k,t}`` by one) until ``rank G_{k,t} = m + rank H_{k-1,t}``. It stops
as soon as the depth equals the data-refined lag bound.

Offline baselines (persistently exciting inputs, fixed-depth design) are
provided for comparison of sample counts.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Protocol

import numpy as np

from . import linalg as la
from .analysis import (
    ExperimentLog,
    hankel_g,
    hankel_io,
    minimal_experiment_length,
    shortest_lag_min_states,
    _lag_bound,
)
from .exceptions import DepthExhausted, PriorBoundsViolated, ReplayMismatch
from .linalg import Mode
from .lti import StateSpaceSystem

log_ = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# plants


class Plant(Protocol):
    m: int
    p: int
    mode: Mode

    def step(self, u) -> np.ndarray:
        """Apply u(t), return y(t) and advance one sample."""


class SimulatedPlant:
    def __init__(self, system: StateSpaceSystem, x0):
        self.system = system
        self.mode = system.mode
        self.m, self.p = system.m, system.p
        self._x = la.as_vector(x0, self.mode).reshape(-1, 1)
        if self._x.shape[0] != system.n:
            raise ValueError(f"x0 must have {system.n} entries")

    def step(self, u) -> np.ndarray:
        u = la.as_vector(u, self.mode).reshape(-1, 1)
        if u.shape[0] != self.m:
            raise ValueError(f"input must have {self.m} entries")
        s = self.system
        y = la.matmul(s.C, self._x) + la.matmul(s.D, u)
        self._x = la.matmul(s.A, self._x) + la.matmul(s.B, u)
        return y.reshape(-1)


class ReplayPlant:
    """Serves a prerecorded log; the queried inputs must match the recording."""

    def __init__(self, log: ExperimentLog, atol: float = 1e-9):
        self.log = log
        self.mode = log.mode
        self.m, self.p = log.m, log.p
        self.atol = atol
        self.t = 0

    def step(self, u) -> np.ndarray:
        if self.t >= self.log.t:
            raise ReplayMismatch(f"recording exhausted after {self.log.t} samples")
        u = la.as_vector(u, self.mode)
        rec = self.log.u[:, self.t]
        same = (
            np.allclose(np.asarray(u, float), np.asarray(rec, float), atol=self.atol)
            if self.mode == Mode.FLOAT
            else bool(np.all(u == rec))
        )
        if not same:
            raise ReplayMismatch(
                f"input at t={self.t} deviates from the recording: "
                f"{[la.fmt_scalar(v) for v in u]} != {[la.fmt_scalar(v) for v in rec]}"
            )
        y = self.log.y[:, self.t].copy()
        self.t += 1
        return y


# --------------------------------------------------------------------------
# avoidance hyperplane


@dataclass(frozen=True, eq=False)
class AvoidanceHyperplane:
    """The affine set {v : eta . v = beta}; inputs on it may fail to raise the rank.

    ``eta is None`` marks the degenerate case where every input raises the
    rank (the last column of H_{k-1,t} is already new), so nothing is avoided.
    """

    eta: np.ndarray | None
    beta: object = None

    @property
    def unconstrained(self) -> bool:
        return self.eta is None

    def value(self, v) -> object:
        v = la.as_vector(v, la.mode_of(self.eta))
        return sum((a * b for a, b in zip(self.eta, v)), Fraction(0) if la.mode_of(self.eta) == Mode.EXACT else 0.0)

    def contains(self, v, atol: float = 1e-9) -> bool:
        if self.eta is None:
            return False
        d = self.value(v) - self.beta
        if la.mode_of(self.eta) == Mode.FLOAT:
            scale = max(1.0, float(np.abs(self.eta).max()), abs(float(self.beta)))
            return abs(float(d)) <= atol * scale
        return d == 0


def _past_column(log: ExperimentLog, k: int) -> np.ndarray:
    """Known part of the next column of G_{k,t+1}: y(t-k..t-1) then u(t-k..t-1)."""
    t = log.t
    ys = [log.y[:, i] for i in range(t - k, t)]
    us = [log.u[:, i] for i in range(t - k, t)]
    parts = ys + us
    return np.concatenate(parts) if parts else la.zeros(0, 1, log.mode).reshape(-1)


def _hyperplane_from(w: np.ndarray, past: np.ndarray, m: int) -> AvoidanceHyperplane:
    eta = w[-m:].copy()
    head = w[:-m]
    beta = -sum((a * b for a, b in zip(head, past)), Fraction(0) if la.mode_of(w) == Mode.EXACT else 0.0)
    return AvoidanceHyperplane(eta, beta)


def _eta_weight(w: np.ndarray, m: int) -> float:
    return float(max(abs(v) for v in w[-m:]))


def avoidance_hyperplane(log: ExperimentLog, k: int, candidate=None) -> AvoidanceHyperplane:
    """Hyperplane whose complement raises rank H_{k,t+1} by exactly one.

    Raises ``DepthExhausted`` when ``rank G_{k,t} = m + rank H_{k-1,t}``.

    Among the left-kernel basis vectors of ``G_{k,t}`` the one with the
    largest entry (in magnitude) in its last ``m`` coordinates is used. If a
    ``candidate`` input is given and lies on that hyperplane, another kernel
    vector that excludes the candidate is used instead when one exists.
    """
    if k < 1:
        raise ValueError("hyperplane step needs depth k >= 1")
    m = log.m
    G = hankel_g(log, k)
    rank_g = la.rank(G)
    rank_h = la.rank(hankel_io(log, k - 1))
    if rank_g >= m + rank_h:
        raise DepthExhausted(
            f"depth exhausted at t={log.t}, k={k}: rank G = {rank_g} = m + rank H_(k-1)"
        )
    basis = left_kernel_basis_with_eta(G, m)
    if not basis:
        # rank G = m + rank H_{k-1,t-1} < m + rank H_{k-1,t}: any input works
        return AvoidanceHyperplane(None)
    past = _past_column(log, k)
    best = max(enumerate(basis), key=lambda iw: (_eta_weight(iw[1], m), -iw[0]))[1]
    h = _hyperplane_from(best, past, m)
    if candidate is None or not h.contains(candidate):
        return h
    # look for a kernel vector that separates the candidate from the bad set
    full = la.left_kernel_basis(G)
    mode = log.mode
    g_new = np.concatenate([past, la.as_vector(candidate, mode)])
    for w in full:
        val = sum(a * b for a, b in zip(w, g_new))
        if (abs(float(val)) > 1e-9) if mode == Mode.FLOAT else (val != 0):
            if _eta_weight(w, m) == 0:
                w = best + w
            return _hyperplane_from(w, past, m)
    return h


def left_kernel_basis_with_eta(G: np.ndarray, m: int) -> list[np.ndarray]:
    """Left-kernel basis vectors of ``G`` whose last ``m`` entries are not all zero."""
    tol = 1e-9
    return [w for w in la.left_kernel_basis(G) if _eta_weight(w, m) > (tol if la.mode_of(G) == Mode.FLOAT else 0)]


# --------------------------------------------------------------------------
# input policies


class InputPolicy:
    """How inputs are chosen at the three decision points of the procedure."""

    kind = "base"

    def initial_block(self, m: int, mode: Mode) -> np.ndarray:
        """Nonsingular m x m block u_{[0,m-1]}."""
        return la.eye(m, mode)

    def arbitrary(self, t: int, m: int, mode: Mode) -> np.ndarray:
        """Input when the data are too short for the depth (t = k)."""
        e = la.zeros(m, 1, mode).reshape(-1)
        e[0] = 1
        return la.as_vector(e, mode)

    def predetermined(self, t: int):
        """The input this policy is committed to at time t, if any."""
        return None

    def choose(self, h: AvoidanceHyperplane, t: int, m: int, mode: Mode) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


class CanonicalScan(InputPolicy):
    """First of 0, e_1..e_m, -e_1..-e_m, e_1+e_j that is off the hyperplane."""

    kind = "canonical-scan"

    def candidates(self, m: int, mode: Mode):
        E = la.eye(m, mode)
        yield la.zeros(m, 1, mode).reshape(-1)
        for i in range(m):
            yield E[i]
        for i in range(m):
            yield -E[i]
        for j in range(1, m):
            yield E[0] + E[j]

    def choose(self, h, t, m, mode):
        for v in self.candidates(m, mode):
            if not h.contains(v):
                return v
        raise AssertionError("an (m-1)-dimensional affine set cannot hold e_1..e_m and 0")


class ClosedForm(InputPolicy):
    """v = (beta + 1) eta / (eta . eta), so that eta . v = beta + 1."""

    kind = "closed-form"

    def choose(self, h, t, m, mode):
        if h.unconstrained:
            return self.arbitrary(t, m, mode)
        eta = h.eta
        nrm = sum(a * a for a in eta)
        return np.array([(h.beta + 1) * a / nrm for a in eta], dtype=eta.dtype)


class SeededRandom(InputPolicy):
    """Integer inputs drawn uniformly from [low, high], redrawn while on the hyperplane."""

    kind = "seeded-random"

    def __init__(self, seed=0, low: int = -3, high: int = 3, max_draws: int = 1000):
        self.seed = seed
        self.low, self.high = low, high
        self.max_draws = max_draws
        self.rng = np.random.default_rng(seed)

    def _draw(self, m, mode):
        return la.as_vector(self.rng.integers(self.low, self.high + 1, size=m), mode)

    def initial_block(self, m, mode):
        for _ in range(self.max_draws):
            U = la.as_matrix(self.rng.integers(self.low, self.high + 1, size=(m, m)), mode)
            if la.rank(U) == m:
                return U
        raise RuntimeError("could not draw a nonsingular initial block")

    def arbitrary(self, t, m, mode):
        return self._draw(m, mode)

    def choose(self, h, t, m, mode):
        for _ in range(self.max_draws):
            v = self._draw(m, mode)
            if not h.contains(v):
                return v
        raise RuntimeError("random draws kept landing on the hyperplane")

    def describe(self):
        return {"kind": self.kind, "seed": self.seed, "low": self.low, "high": self.high}


class Replay(InputPolicy):
    """Replays a fixed input sequence (m x T)."""

    kind = "replay"

    def __init__(self, sequence):
        self.sequence = np.asarray(sequence)

    def _at(self, t, m, mode):
        if t >= self.sequence.shape[1]:
            raise ReplayMismatch(f"replay sequence exhausted at t={t}")
        return la.as_vector(self.sequence[:, t], mode)

    def initial_block(self, m, mode):
        U = la.as_matrix(self.sequence[:, :m], mode, shape=(m, m))
        if la.rank(U) != m:
            raise ReplayMismatch("recorded initial block u_[0,m-1] is singular")
        return U

    def arbitrary(self, t, m, mode):
        return self._at(t, m, mode)

    def predetermined(self, t):
        return self.sequence[:, t] if t < self.sequence.shape[1] else None

    def choose(self, h, t, m, mode):
        # a recorded input may sit on the hyperplane and still raise the rank
        # through the measured output; the engine checks the rank afterwards
        return self._at(t, m, mode)

    def describe(self):
        return {
            "kind": self.kind,
            "sequence": [[la.fmt_scalar(v) for v in row] for row in self.sequence],
        }


def make_policy(config) -> InputPolicy:
    """Build a policy from a tag or a ``{"kind": ..., ...}`` mapping."""
    if isinstance(config, InputPolicy):
        return config
    if config is None:
        return CanonicalScan()
    if isinstance(config, str):
        config = {"kind": config}
    kind = config.get("kind", "canonical-scan")
    if kind == "canonical-scan":
        return CanonicalScan()
    if kind == "closed-form":
        return ClosedForm()
    if kind == "seeded-random":
        return SeededRandom(config.get("seed", 0), config.get("low", -3), config.get("high", 3))
    if kind == "replay":
        return Replay(la.as_matrix(config["sequence"]))
    raise ValueError(f"unknown input policy {kind!r}")


def choose_input(h: AvoidanceHyperplane, policy: InputPolicy, t: int, m: int, mode: Mode = Mode.EXACT):
    return policy.choose(h, t, m, mode)


# --------------------------------------------------------------------------
# the procedure


@dataclass
class StepRecord:
    t: int
    k: int
    kind: str  # "initial" | "arbitrary" | "hyperplane"
    rank_H: int | None
    rank_G: int | None
    rank_H_next: int | None
    eta: list | None
    beta: object
    u: list
    on_hyperplane: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        d["eta"] = None if self.eta is None else [la.fmt_scalar(v) for v in self.eta]
        d["beta"] = None if self.beta is None else la.fmt_scalar(self.beta)
        d["u"] = [la.fmt_scalar(v) for v in self.u]
        return d


@dataclass
class Checkpoint:
    t: int
    k: int
    ell_min: int
    n_min: int
    L_actual: int


@dataclass
class DesignTrace:
    records: list[StepRecord] = field(default_factory=list)
    checkpoints: list[Checkpoint] = field(default_factory=list)
    final_k: int | None = None
    final_t: int | None = None

    def rank_transitions(self) -> dict[int, tuple[int, int, int]]:
        """depth -> (rank H_{k,t} at loop entry, after first step, at loop exit)."""
        out: dict[int, tuple[int, int, int]] = {}
        for r in self.records:
            if r.kind != "hyperplane":
                continue
            if r.k not in out:
                out[r.k] = (r.rank_H, r.rank_H_next, r.rank_H_next)
            else:
                a, b, _ = out[r.k]
                out[r.k] = (a, b, r.rank_H_next)
        return out


def online_experiment(
    plant: Plant,
    L: int,
    N: int,
    policy: InputPolicy | str | dict | None = None,
) -> tuple[ExperimentLog, DesignTrace]:
    """Drive ``plant`` until the data are informative; return the log and trace."""
    policy = make_policy(policy)
    if L < 0 or N < 0:
        raise ValueError("bounds L and N must be nonnegative")
    m, p, mode = plant.m, plant.p, plant.mode
    log = ExperimentLog.empty(m, p, mode)
    trace = DesignTrace()

    def apply(u, k, kind, rank_h=None, rank_g=None, h=None):
        nonlocal log
        t = log.t
        y = plant.step(u)
        log = log.append(u, y)
        rank_next = la.rank(hankel_io(log, k)) if kind == "hyperplane" else None
        on_plane = h is not None and h.contains(u)
        if kind == "hyperplane" and rank_next != rank_h + 1:
            if on_plane:
                raise ReplayMismatch(
                    f"input at t={t} lies on the avoidance hyperplane and "
                    f"rank H_{k},{t + 1} did not increase"
                )
            raise AssertionError(f"rank H_{k},{t + 1} did not increase off the hyperplane")
        trace.records.append(
            StepRecord(
                t=t,
                k=k,
                kind=kind,
                rank_H=rank_h,
                rank_G=rank_g,
                rank_H_next=rank_next,
                eta=None if h is None or h.unconstrained else list(h.eta),
                beta=None if h is None else h.beta,
                u=list(la.as_vector(u, mode)),
                on_hyperplane=on_plane,
            )
        )

    U0 = policy.initial_block(m, mode)
    for j in range(m):
        apply(U0[:, j], 0, "initial")
    k = 0

    while True:
        ell_min, n_min = shortest_lag_min_states(log)
        La = _lag_bound(ell_min, n_min, L, N)
        trace.checkpoints.append(Checkpoint(log.t, k, ell_min, n_min, La))
        log_.debug("t=%d k=%d ell_min=%d n_min=%d L_a=%d", log.t, k, ell_min, n_min, La)
        if k == La:
            break
        if k > La or k + 1 > N + 1:
            raise PriorBoundsViolated(
                f"prior bounds violated: depth {k} cannot reach L_a={La} (L={L}, N={N})"
            )
        k += 1
        if log.t == k:
            apply(policy.arbitrary(log.t, m, mode), k, "arbitrary")
        while True:
            rank_g = la.rank(hankel_g(log, k))
            rank_h_prev = la.rank(hankel_io(log, k - 1))
            if rank_g >= m + rank_h_prev:
                break
            rank_h = la.rank(hankel_io(log, k))
            h = avoidance_hyperplane(log, k, candidate=policy.predetermined(log.t))
            u = policy.choose(h, log.t, m, mode)
            apply(u, k, "hyperplane", rank_h, rank_g, h)

    trace.final_k, trace.final_t = k, log.t
    return log, trace


# --------------------------------------------------------------------------
# offline baselines


def design_pe_input(m: int, order: int, seed=None, mode: Mode = Mode.EXACT,
                    low: int = -3, high: int = 3, max_draws: int = 1000) -> np.ndarray:
    """Shortest input (m x (order-1 + m*order)) with square nonsingular H_{order-1}."""
    if order < 1 or m < 1:
        raise ValueError("need m >= 1 and order >= 1")
    rng = np.random.default_rng(seed)
    length = order - 1 + m * order
    for _ in range(max_draws):
        u = la.as_matrix(rng.integers(low, high + 1, size=(m, length)), mode)
        if la.rank(la.hankel(u, order - 1)) == m * order:
            return u
    raise RuntimeError(f"no persistently exciting input found in {max_draws} draws")


def baseline_sample_counts(m: int, L: int, N: int, ell_true: int, n_true: int) -> tuple[int, int, int]:
    """(online, persistency-of-excitation, fixed-depth) sample counts."""
    t_online = minimal_experiment_length(ell_true, n_true, m, L, N)
    t_pe = N + L + m * (N + L + 1)
    t_fixed = L + (L + 1) * m + n_true
    return t_online, t_pe, t_fixed
