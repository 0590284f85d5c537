"""Reference data: a 3-state, 2-input, 2-output system with a known 14-sample experiment.

``INPUTS``/``OUTPUTS`` are the recorded shortest experiment from
``X0 = [1, 1, 0]`` with bounds ``L = N = 4``. ``MODIFIED_INPUTS`` changes
u(12) from e_2 to e_1; those data are persistently exciting of order 4 but
not informative.
"""

from __future__ import annotations

from .analysis import ExperimentLog
from .linalg import Mode
from .lti import StateSpaceSystem

A = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
B = [[1, 0], [0, 1], [0, 1]]
C = [[1, 0, 0], [0, 1, 0]]
D = [[1, 0], [0, 0]]
X0 = [1, 1, 0]
L, N = 4, 4
ELL_TRUE, N_TRUE = 2, 3
T = 14

INPUTS = [
    [1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1],
]
OUTPUTS = [
    [2, 2, 1, 3, 3, 2, 2, 2, 2, 3, 3, 2, 1, 0],
    [1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1],
]

MODIFIED_INPUTS = [
    [1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0],
    [0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1],
]
MODIFIED_OUTPUTS = [
    [2, 2, 1, 3, 3, 2, 2, 2, 2, 3, 3, 2, 2, 1],
    [1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0],
]

# (t, ell_min, n_min, L_actual) whenever the stopping criterion is evaluated
CHECKPOINTS = [(2, 0, 0, 4), (8, 2, 3, 3), (11, 2, 3, 3), (14, 2, 3, 3)]
# depth -> rank of H_{k,t} after the first and after the last inner-loop input
RANK_TRANSITIONS = {1: (2, 7), 2: (7, 9), 3: (9, 11)}
# sample counts (online, persistency of excitation, fixed depth) for
# m=80, L=100, N=150, ell_true=20, n_true=100
LARGE_CASE = dict(m=80, L=100, N=150, ell_true=20, n_true=100)
LARGE_CASE_COUNTS = (5850, 20330, 8280)


def system(mode: Mode = Mode.EXACT) -> StateSpaceSystem:
    return StateSpaceSystem.from_data(A, B, C, D, mode)


def log(mode: Mode = Mode.EXACT) -> ExperimentLog:
    return ExperimentLog.from_data(INPUTS, OUTPUTS, mode)


def modified_log(mode: Mode = Mode.EXACT) -> ExperimentLog:
    return ExperimentLog.from_data(MODIFIED_INPUTS, MODIFIED_OUTPUTS, mode)
