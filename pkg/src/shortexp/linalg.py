"""Dense linear algebra over the rationals or over float64.

Matrices are plain numpy arrays. The scalar mode is carried by the dtype:
object arrays holding ``Fraction``/``int`` entries are *exact*, float arrays
are *float*. Void matrices (zero rows and/or columns) are legal everywhere and
have rank zero.

Exact rank uses fraction-free (Bareiss) elimination on row-scaled integer
copies, pivoting on the entry of largest magnitude. Float rank counts singular
values above ``max(rows, cols) * eps * sigma_max``.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


def mode_of(M: np.ndarray) -> Mode:
    return Mode.FLOAT if np.asarray(M).dtype.kind in "fc" else Mode.EXACT


def to_scalar(value, mode: Mode = Mode.EXACT):
    """Convert ``value`` (int, float, Fraction or "num/den" string) to ``mode``."""
    if mode == Mode.FLOAT:
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    # floats are converted exactly; callers wanting 0.1 -> 1/10 should pass strings
    return Fraction(value)


def as_matrix(data, mode: Mode = Mode.EXACT, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Build a 2-D matrix in the requested scalar mode.

    ``shape`` must be given for void matrices that cannot be inferred from
    ``data`` (e.g. an empty list meant as 3x0).
    """
    arr = np.asarray(data, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    elif arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if mode == Mode.FLOAT:
        out = np.empty(arr.shape, dtype=float)
    else:
        out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_scalar(v, mode)
    return out


def as_vector(data, mode: Mode = Mode.EXACT) -> np.ndarray:
    arr = np.asarray(data, dtype=object).reshape(-1)
    if mode == Mode.FLOAT:
        return np.array([to_scalar(v, mode) for v in arr], dtype=float)
    out = np.empty(arr.shape, dtype=object)
    for i, v in enumerate(arr):
        out[i] = to_scalar(v, mode)
    return out


def convert(M: np.ndarray, mode: Mode) -> np.ndarray:
    """Return ``M`` in ``mode`` (float->exact converts binary floats exactly)."""
    M = np.asarray(M)
    if mode_of(M) == mode and (mode == Mode.FLOAT or M.dtype == object):
        return M
    if M.ndim == 1:
        return as_vector(M, mode)
    return as_matrix(M, mode, shape=M.shape)


def zeros(rows: int, cols: int, mode: Mode = Mode.EXACT) -> np.ndarray:
    if mode == Mode.FLOAT:
        return np.zeros((rows, cols))
    out = np.empty((rows, cols), dtype=object)
    out[...] = Fraction(0)
    return out


def eye(n: int, mode: Mode = Mode.EXACT) -> np.ndarray:
    out = zeros(n, n, mode)
    for i in range(n):
        out[i, i] = Fraction(1) if mode == Mode.EXACT else 1.0
    return out


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product honouring void conventions and keeping the scalar mode."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    mode = Mode.FLOAT if Mode.FLOAT in (mode_of(A), mode_of(B)) else Mode.EXACT
    if A.shape[1] == 0:
        return zeros(A.shape[0], B.shape[1], mode)
    if mode == Mode.FLOAT:
        return np.asarray(A, dtype=float) @ np.asarray(B, dtype=float)
    return A @ B


def matrix_power(A: np.ndarray, k: int) -> np.ndarray:
    out = eye(A.shape[0], mode_of(A))
    for _ in range(k):
        out = matmul(out, A)
    return out


# --------------------------------------------------------------------------
# exact kernels


def _integer_rows(M: np.ndarray) -> list[list[int]]:
    rows = []
    for row in M:
        fr = [Fraction(v) for v in row]
        scale = math.lcm(*(f.denominator for f in fr)) if fr else 1
        rows.append([f.numerator * (scale // f.denominator) for f in fr])
    return rows


def _bareiss_rank(rows: list[list[int]]) -> int:
    a = [r[:] for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = max(range(r, nrows), key=lambda i: abs(a[i][c]))
        if a[piv][c] == 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        pv = pr[c]
        for i in range(r + 1, nrows):
            ai = a[i]
            f = ai[c]
            if f == 0:
                if pv != prev:
                    for j in range(c + 1, ncols):
                        ai[j] = ai[j] * pv // prev
                continue
            for j in range(c + 1, ncols):
                ai[j] = (pv * ai[j] - f * pr[j]) // prev
            ai[c] = 0
        prev = pv
        r += 1
    return r


def _rref(M: np.ndarray) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals, plus pivot columns.

    Elimination runs on row-scaled integers with gcd reduction after every row
    update; rationals appear only when pivot rows are normalised at the end.
    """
    a = _integer_rows(M)
    nrows = len(a)
    ncols = M.shape[1]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = max(range(r, nrows), key=lambda i: abs(a[i][c]))
        if a[piv][c] == 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        pv = pr[c]
        for i in range(nrows):
            if i == r or a[i][c] == 0:
                continue
            f = a[i][c]
            row = [pv * x - f * y for x, y in zip(a[i], pr)]
            g = math.gcd(*row)
            a[i] = [x // g for x in row] if g > 1 else row
        pivots.append(c)
        r += 1
    out = []
    for i, row in enumerate(a):
        if i < len(pivots):
            pv = row[pivots[i]]
            out.append([Fraction(x, pv) for x in row])
        else:
            out.append([Fraction(0)] * ncols)
    return out, pivots


# --------------------------------------------------------------------------
# float kernels


def float_tolerance(M: np.ndarray, s: np.ndarray | None = None) -> float:
    if s is None:
        s = np.linalg.svd(M, compute_uv=False)
    smax = s.max() if s.size else 0.0
    return max(M.shape) * np.finfo(float).eps * smax


# --------------------------------------------------------------------------
# public operations


def rank(M: np.ndarray) -> int:
    """Rank of ``M``; zero for void matrices."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    if mode_of(M) == Mode.FLOAT:
        s = np.linalg.svd(M, compute_uv=False)
        return int((s > float_tolerance(M, s)).sum())
    rows = _integer_rows(M.T if M.shape[0] > M.shape[1] else M)
    return _bareiss_rank(rows)


def left_kernel_basis(M: np.ndarray) -> list[np.ndarray]:
    """Basis of ``{x : x^T M = 0}`` as a list of 1-D arrays."""
    M = np.asarray(M)
    nrows, ncols = M.shape
    mode = mode_of(M)
    if nrows == 0:
        return []
    if ncols == 0:
        return list(eye(nrows, mode))
    if mode == Mode.FLOAT:
        u, s, _ = np.linalg.svd(M, full_matrices=True)
        r = int((s > float_tolerance(M, s)).sum())
        return [u[:, j].copy() for j in range(r, nrows)]
    R, pivots = _rref(M.T)
    free = [c for c in range(nrows) if c not in set(pivots)]
    basis = []
    for f in free:
        x = np.empty(nrows, dtype=object)
        x[...] = Fraction(0)
        x[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            x[pc] = -R[row][f]
        basis.append(x)
    return basis


def pivot_columns(M: np.ndarray) -> list[int]:
    """Indices of a maximal set of linearly independent columns (leftmost first)."""
    M = np.asarray(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return []
    if mode_of(M) == Mode.EXACT:
        return _rref(M)[1]
    chosen: list[int] = []
    current = 0
    for j in range(M.shape[1]):
        r = rank(M[:, chosen + [j]])
        if r > current:
            chosen.append(j)
            current = r
    return chosen


def solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Return one solution ``X`` of ``M X = rhs``.

    In exact mode an inconsistent system raises ``np.linalg.LinAlgError``; in
    float mode the least-squares solution is returned.
    """
    M = np.asarray(M)
    rhs = np.asarray(rhs)
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs.reshape(-1, 1)
    if M.shape[0] != rhs.shape[0]:
        raise ValueError(f"shape mismatch {M.shape} vs {rhs.shape}")
    mode = Mode.FLOAT if Mode.FLOAT in (mode_of(M), mode_of(rhs)) else Mode.EXACT
    n, k = M.shape[1], rhs.shape[1]
    if mode == Mode.FLOAT:
        if M.size == 0:
            X = np.zeros((n, k))
        else:
            X = np.linalg.lstsq(np.asarray(M, float), np.asarray(rhs, float), rcond=None)[0]
        return X.reshape(-1) if vec else X
    X = zeros(n, k)
    if M.shape[0] > 0:
        R, pivots = _rref(np.hstack([M, rhs]))
        if any(p >= n for p in pivots):
            raise np.linalg.LinAlgError("inconsistent linear system")
        for row, pc in enumerate(pivots):
            for j in range(k):
                X[pc, j] = R[row][n + j]
    elif np.any(rhs != 0):
        raise np.linalg.LinAlgError("inconsistent linear system")
    return X.reshape(-1) if vec else X


def inverse(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n) or rank(M) != n:
        raise np.linalg.LinAlgError("matrix is singular")
    if mode_of(M) == Mode.FLOAT:
        return np.linalg.inv(M)
    return solve(M, eye(n))


def hankel(f: np.ndarray, k: int) -> np.ndarray:
    """Block Hankel matrix with ``k + 1`` block rows of the sequence ``f``.

    ``f`` is a ``d x N`` matrix whose columns are the samples. The result has
    shape ``((k + 1) d, N - k)`` and block ``(r, c)`` equal to ``f[:, r + c]``.
    """
    f = np.asarray(f)
    if f.ndim != 2:
        raise ValueError("sequence must be a d x N matrix")
    d, N = f.shape
    if k < 0 or k > N - 1:
        raise ValueError(f"Hankel depth k={k} outside [0, {N - 1}]")
    cols = N - k
    return np.vstack([f[:, r : r + cols] for r in range(k + 1)])


def is_persistently_exciting(f: np.ndarray, order: int) -> bool:
    """True iff ``H_{order-1}(f)`` has full row rank."""
    f = np.asarray(f)
    if order < 1:
        raise ValueError("order must be at least 1")
    if f.shape[1] < order:
        raise ValueError(
            f"sequence of length {f.shape[1]} is too short for order {order}"
        )
    H = hankel(f, order - 1)
    return rank(H) == H.shape[0]


def is_zero(M: np.ndarray, atol: float = 0.0) -> bool:
    M = np.asarray(M)
    if M.size == 0:
        return True
    if mode_of(M) == Mode.FLOAT:
        return bool(np.all(np.abs(M) <= atol))
    return all(v == 0 for v in M.flat)


def fmt_scalar(v) -> str:
    """Canonical text for a scalar: ``"3"``, ``"-1/2"`` or a float repr."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(Fraction(v))


def stack_blocks(blocks: Sequence[Iterable[np.ndarray]]) -> np.ndarray:
    return np.vstack([np.hstack(list(row)) for row in blocks])
