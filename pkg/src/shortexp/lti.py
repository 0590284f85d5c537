"""Discrete-time LTI input-state-output systems.

    x(t+1) = A x(t) + B u(t)
    y(t)   = C x(t) + D u(t)

with ``n >= 0`` states, ``m >= 1`` inputs and ``p >= 1`` outputs. Sequences are
stored as matrices whose columns are the samples (``u`` is ``m x t``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .linalg import Mode


@dataclass(frozen=True, eq=False)
class StateSpaceSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (np.asarray(M) for M in (self.A, self.B, self.C, self.D))
        if D.ndim != 2:
            raise ValueError("D must be a p x m matrix")
        p, m = D.shape
        n = A.shape[0] if A.ndim == 2 else -1
        if m < 1 or p < 1:
            raise ValueError(f"need m, p >= 1, got m={m}, p={p}")
        if A.shape != (n, n) or B.shape != (n, m) or C.shape != (p, n):
            raise ValueError(
                f"incompatible shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )

    @classmethod
    def from_data(cls, A, B, C, D, mode: Mode = Mode.EXACT) -> "StateSpaceSystem":
        """Build a system from nested lists; ``A``, ``B``, ``C`` may be empty for n = 0."""
        Dm = la.as_matrix(D, mode)
        p, m = Dm.shape
        n = len(A)
        return cls(
            la.as_matrix(A, mode, shape=(n, n)),
            la.as_matrix(B, mode, shape=(n, m)),
            la.as_matrix(C, mode, shape=(p, n)),
            Dm,
        )

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @property
    def mode(self) -> Mode:
        return la.mode_of(self.D)

    def astype(self, mode: Mode) -> "StateSpaceSystem":
        return StateSpaceSystem(*(la.convert(M, mode) for M in (self.A, self.B, self.C, self.D)))

    def transform(self, S: np.ndarray) -> "StateSpaceSystem":
        """Return the similar system (S^-1 A S, S^-1 B, C S, D)."""
        Si = la.inverse(S)
        return StateSpaceSystem(
            la.matmul(la.matmul(Si, self.A), S),
            la.matmul(Si, self.B),
            la.matmul(self.C, S),
            self.D,
        )

    def __eq__(self, other):
        if not isinstance(other, StateSpaceSystem):
            return NotImplemented
        return all(
            X.shape == Y.shape and bool(np.all(X == Y))
            for X, Y in zip(
                (self.A, self.B, self.C, self.D), (other.A, other.B, other.C, other.D)
            )
        )

    __hash__ = None


@dataclass(frozen=True)
class Trajectory:
    x0: np.ndarray
    u: np.ndarray
    y: np.ndarray
    x: np.ndarray  # n x (t+1) state sequence, x[:, 0] == x0


def observability_matrix(sys: StateSpaceSystem, k: int) -> np.ndarray:
    """Stack C, CA, ..., CA^k; the void 0 x n matrix for k = -1."""
    if k < -1:
        raise ValueError("k must be >= -1")
    blocks = [la.zeros(0, sys.n, sys.mode)]
    row = sys.C
    for _ in range(k + 1):
        blocks.append(row)
        row = la.matmul(row, sys.A)
    return np.vstack(blocks)


def controllability_matrix(sys: StateSpaceSystem, k: int) -> np.ndarray:
    """[A^k B, ..., AB, B]; the void n x 0 matrix for k = -1."""
    if k < -1:
        raise ValueError("k must be >= -1")
    blocks = [la.zeros(sys.n, 0, sys.mode)]
    col = sys.B
    for _ in range(k + 1):
        blocks.insert(0, col)
        col = la.matmul(sys.A, col)
    return np.hstack(blocks)


def toeplitz_markov(sys: StateSpaceSystem, k: int) -> np.ndarray:
    """Lower block-triangular Toeplitz matrix of Markov parameters, (k+1)p x (k+1)m."""
    if k < -1:
        raise ValueError("k must be >= -1")
    p, m = sys.p, sys.m
    h = markov_parameters(sys, k + 1) if k >= 0 else []
    T = la.zeros((k + 1) * p, (k + 1) * m, sys.mode)
    for i in range(k + 1):
        for j in range(i + 1):
            T[i * p : (i + 1) * p, j * m : (j + 1) * m] = h[i - j]
    return T


def lag(sys: StateSpaceSystem) -> int:
    """Smallest k >= 0 with rank Omega_k = rank Omega_{k-1}."""
    prev = 0
    O = la.zeros(0, sys.n, sys.mode)
    row = sys.C
    for k in range(sys.n + 1):
        O = np.vstack([O, row])
        r = la.rank(O)
        if r == prev:
            return k
        prev = r
        row = la.matmul(row, sys.A)
    raise AssertionError("observability rank failed to stabilise by k = n")


def is_minimal(sys: StateSpaceSystem) -> bool:
    n = sys.n
    if n == 0:
        return True
    return (
        la.rank(controllability_matrix(sys, n - 1)) == n
        and la.rank(observability_matrix(sys, n - 1)) == n
    )


def simulate(sys: StateSpaceSystem, x0, u) -> Trajectory:
    """Run the recursion from ``x0`` under the input sequence ``u`` (m x t)."""
    mode = sys.mode
    x0 = la.as_vector(x0, mode)
    u = np.asarray(u, dtype=object)
    if u.ndim == 1 and sys.m == 1:
        u = u.reshape(1, -1)
    if u.ndim != 2 or u.shape[0] != sys.m:
        raise ValueError(f"u must be an {sys.m} x t matrix, got shape {u.shape}")
    u = la.as_matrix(u, mode, shape=u.shape)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 must have {sys.n} entries, got {x0.shape}")
    t = u.shape[1]
    x = la.zeros(sys.n, t + 1, mode)
    y = la.zeros(sys.p, t, mode)
    x[:, 0] = x0
    for s in range(t):
        xs = x[:, s : s + 1]
        us = u[:, s : s + 1]
        x[:, s + 1 : s + 2] = la.matmul(sys.A, xs) + la.matmul(sys.B, us)
        y[:, s : s + 1] = la.matmul(sys.C, xs) + la.matmul(sys.D, us)
    return Trajectory(x0=x0, u=u, y=y, x=x)


def markov_parameters(sys: StateSpaceSystem, horizon: int) -> list[np.ndarray]:
    """[D, CB, CAB, ..., CA^{horizon-2} B]."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    out = [sys.D]
    col = sys.B
    for _ in range(horizon - 1):
        out.append(la.matmul(sys.C, col))
        col = la.matmul(sys.A, col)
    return out


def are_isomorphic(sys1: StateSpaceSystem, sys2: StateSpaceSystem, atol: float = 1e-8) -> bool:
    """Isomorphism test for minimal systems via Markov parameters up to 2n + 1.

    ``atol`` (relative to the largest Markov parameter) only applies when
    either system is in float mode.
    """
    for s in (sys1, sys2):
        if not is_minimal(s):
            raise ValueError("isomorphism via Markov parameters requires minimal systems")
    if (sys1.n, sys1.m, sys1.p) != (sys2.n, sys2.m, sys2.p):
        return False
    h1 = markov_parameters(sys1, 2 * sys1.n + 1)
    h2 = markov_parameters(sys2, 2 * sys2.n + 1)
    if Mode.FLOAT in (sys1.mode, sys2.mode):
        a = np.hstack([np.asarray(h, float) for h in h1])
        b = np.hstack([np.asarray(h, float) for h in h2])
        scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
        return bool(np.all(np.abs(a - b) <= atol * scale))
    return all(bool(np.all(X == Y)) for X, Y in zip(h1, h2))


def random_minimal_system(
    n: int, m: int, p: int, seed=None, low: int = -3, high: int = 3, max_draws: int = 1000
) -> StateSpaceSystem:
    """Draw integer-valued systems with entries in [low, high] until one is minimal."""
    if n < 1 or m < 1 or p < 1:
        raise ValueError("need n, m, p >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        A, B, C, D = (
            rng.integers(low, high + 1, size=s) for s in ((n, n), (n, m), (p, n), (p, m))
        )
        sys = StateSpaceSystem.from_data(A, B, C, D)
        if is_minimal(sys):
            return sys
    raise RuntimeError(f"no minimal system found in {max_draws} draws")
