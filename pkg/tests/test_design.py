import numpy as np
import pytest
import sympy

from shortexp import linalg as la
from shortexp import worked_example as ex
from shortexp.analysis import (
    ExperimentLog,
    check_informativity,
    hankel_g,
    hankel_io,
    minimal_experiment_length,
)
from shortexp.design import (
    AvoidanceHyperplane,
    CanonicalScan,
    ClosedForm,
    Replay,
    ReplayPlant,
    SeededRandom,
    SimulatedPlant,
    avoidance_hyperplane,
    baseline_sample_counts,
    choose_input,
    design_pe_input,
    make_policy,
    online_experiment,
)
from shortexp.exceptions import DepthExhausted, PriorBoundsViolated, ReplayMismatch
from shortexp.linalg import Mode
from shortexp.lti import StateSpaceSystem, lag, random_minimal_system


def sympy_rank(M):
    return 0 if M.size == 0 else sympy.Matrix(M.tolist()).rank()


# ---- avoidance hyperplane


def test_hyperplane_at_start_of_reference(ref_log):
    log2 = ref_log.truncate(2)
    G = hankel_g(log2, 1)
    # G_{1,2} = [y(0); u(0); u(1)] is a single nonzero column
    assert la.rank(G) == sympy_rank(G) == 1
    assert la.rank(hankel_io(log2, 0)) == 2
    h = avoidance_hyperplane(log2, 1)
    assert not h.unconstrained and any(v != 0 for v in h.eta)
    # the recorded u(2) lies off this plane and raises the rank
    u2 = ref_log.u[:, 2]
    assert not h.contains(u2)
    assert la.rank(hankel_io(ref_log.truncate(3), 1)) == la.rank(hankel_io(log2, 1)) + 1


def test_hyperplane_single_input_is_a_point():
    sys = random_minimal_system(2, 1, 1, seed=2)
    plant = SimulatedPlant(sys, [1, 0])
    log = ExperimentLog.empty(1, 1)
    for u in ([1], [0]):
        log = log.append(u, plant.step(u))
    h = avoidance_hyperplane(log, 1)
    assert h.eta.shape == (1,)
    point = h.beta / h.eta[0]
    assert h.contains([point])
    assert not h.contains([point + 1])


def test_depth_exhausted_after_first_inner_loop(ref_log):
    log8 = ref_log.truncate(8)
    assert la.rank(hankel_g(log8, 1)) == ref_log.m + la.rank(hankel_io(log8, 0))
    with pytest.raises(DepthExhausted, match="depth exhausted"):
        avoidance_hyperplane(log8, 1)


def test_hyperplane_complement_raises_rank():
    # property: every input off the plane raises rank H_{k,t+1}, whatever the output
    sys = ex.system()
    rng = np.random.default_rng(0)
    log = ex.log().truncate(9)
    h = avoidance_hyperplane(log, 2)
    base = la.rank(hankel_io(log, 2))
    for _ in range(30):
        v = rng.integers(-3, 4, 2)
        y = rng.integers(-3, 4, 2)
        if not h.contains(v):
            assert la.rank(hankel_io(log.append(v, y), 2)) == base + 1
    assert sys.m == 2


def test_degenerate_hyperplane_is_unconstrained():
    # rank G_{2,5} < m + rank H_{1,5}, yet no left-kernel vector of G touches the new input
    log = ExperimentLog.from_data([[0, 0, 1, 1, 0]], [[0, 0, 1, -1, 1]])
    h = avoidance_hyperplane(log, 2)
    assert h.unconstrained
    base = la.rank(hankel_io(log, 2))
    for v in range(-2, 3):
        for y in range(-2, 3):
            assert not h.contains([v])
            assert la.rank(hankel_io(log.append([v], [y]), 2)) == base + 1


def test_hyperplane_value_float():
    h = AvoidanceHyperplane(np.array([1.0, 2.0]), 3.0)
    assert h.contains([1.0, 1.0])
    assert not h.contains([1.0, 1.1])


# ---- policies


def test_canonical_scan_first_candidate_off_plane():
    h = AvoidanceHyperplane(la.as_vector([1, 0]), la.to_scalar(1))
    assert choose_input(h, CanonicalScan(), 0, 2).tolist() == [0, 0]
    # 0 is on this plane; e_1 is the next candidate
    h0 = AvoidanceHyperplane(la.as_vector([1, 1]), la.to_scalar(0))
    assert choose_input(h0, CanonicalScan(), 0, 2).tolist() == [1, 0]
    # 0 and e_1 on the plane; e_2 follows
    h1 = AvoidanceHyperplane(la.as_vector([0, 1]), la.to_scalar(0))
    assert choose_input(h1, CanonicalScan(), 0, 2).tolist() == [0, 1]


def test_canonical_scan_always_finds_a_candidate():
    rng = np.random.default_rng(1)
    for _ in range(200):
        m = int(rng.integers(1, 4))
        eta = rng.integers(-2, 3, m)
        if not eta.any():
            continue
        h = AvoidanceHyperplane(la.as_vector(eta), la.to_scalar(int(rng.integers(-2, 3))))
        assert not h.contains(CanonicalScan().choose(h, 0, m, Mode.EXACT))


def test_closed_form_lands_at_beta_plus_one(mode):
    eta = la.as_vector([2, -1, 3], mode)
    h = AvoidanceHyperplane(eta, la.to_scalar(5, mode))
    v = ClosedForm().choose(h, 0, 3, mode)
    assert float(h.value(v)) == pytest.approx(6)
    assert not h.contains(v)


def test_seeded_random_is_deterministic():
    h = AvoidanceHyperplane(la.as_vector([1, 1]), la.to_scalar(0))
    a = [SeededRandom(7).choose(h, 0, 2, Mode.EXACT).tolist() for _ in range(3)]
    b = [SeededRandom(7).choose(h, 0, 2, Mode.EXACT).tolist() for _ in range(3)]
    assert a == b
    assert la.rank(SeededRandom(3).initial_block(3, Mode.EXACT)) == 3


def test_replay_rejects_singular_initial_block():
    with pytest.raises(ReplayMismatch):
        Replay(la.as_matrix([[1, 1], [1, 1]])).initial_block(2, Mode.EXACT)


def test_make_policy():
    assert isinstance(make_policy(None), CanonicalScan)
    assert isinstance(make_policy("closed-form"), ClosedForm)
    assert make_policy({"kind": "seeded-random", "seed": 4}).seed == 4
    assert isinstance(make_policy({"kind": "replay", "sequence": [[1, 0]]}), Replay)
    with pytest.raises(ValueError):
        make_policy("nope")


# ---- plants


def test_replay_plant_checks_inputs(ref_log):
    plant = ReplayPlant(ref_log)
    assert plant.step([1, 0]).tolist() == [2, 1]
    with pytest.raises(ReplayMismatch, match="deviates"):
        plant.step([1, 1])


def test_replay_plant_exhaustion():
    plant = ReplayPlant(ExperimentLog.from_data([[1]], [[2]]))
    plant.step([1])
    with pytest.raises(ReplayMismatch, match="exhausted"):
        plant.step([1])


# ---- the online procedure


def test_reference_replay(mode):
    plant = SimulatedPlant(ex.system(mode), ex.X0)
    log, trace = online_experiment(plant, ex.L, ex.N, Replay(ex.INPUTS))
    assert log == ex.log(mode)
    assert (trace.final_t, trace.final_k) == (14, 3)
    assert [(c.t, c.ell_min, c.n_min, c.L_actual) for c in trace.checkpoints] == ex.CHECKPOINTS
    assert {k: v[1:] for k, v in trace.rank_transitions().items()} == ex.RANK_TRANSITIONS
    assert check_informativity(log, ex.L, ex.N).informative


def test_reference_replay_other_bounds():
    plant = SimulatedPlant(ex.system(), ex.X0)
    log, trace = online_experiment(plant, 3, 6, Replay(ex.INPUTS))
    assert log == ex.log()
    assert trace.checkpoints[0].L_actual == 3
    assert trace.final_t == 14


def test_reference_replay_from_recording():
    log, _ = online_experiment(ReplayPlant(ex.log()), ex.L, ex.N, Replay(ex.INPUTS))
    assert log.t == 14


@pytest.mark.parametrize("policy", ["canonical-scan", "closed-form", SeededRandom(11)], ids=str)
def test_reference_system_other_policies(policy):
    log, trace = online_experiment(SimulatedPlant(ex.system(), ex.X0), 4, 4, policy)
    assert log.t == 14
    assert check_informativity(log, 4, 4).informative
    assert all(r.rank_H_next == r.rank_H + 1 for r in trace.records if r.kind == "hyperplane")


def test_small_random_system():
    for seed in range(10):
        sys = random_minimal_system(2, 1, 1, seed=seed)
        log, _ = online_experiment(SimulatedPlant(sys, [1, -1]), 2, 2, "canonical-scan")
        La = min(2, 2 - 2 + lag(sys))
        assert log.t == La + (La + 1) + 2
        assert check_informativity(log, 2, 2).informative


def test_static_plant():
    sys = StateSpaceSystem(la.zeros(0, 0), la.zeros(0, 2), la.zeros(1, 0), la.as_matrix([[1, 2]]))
    log, _ = online_experiment(SimulatedPlant(sys, []), 2, 1)
    La = min(2, 1 - 0 + 0)
    assert log.t == La + (La + 1) * 2
    assert check_informativity(log, 2, 1).informative


def test_prior_bounds_guard():
    with pytest.raises(PriorBoundsViolated, match="prior bounds violated"):
        online_experiment(SimulatedPlant(ex.system(), ex.X0), 4, 2, Replay(ex.INPUTS))


def test_negative_bounds_rejected():
    with pytest.raises(ValueError):
        online_experiment(SimulatedPlant(ex.system(), ex.X0), -1, 4)


def test_trace_records_are_json_ready(ref_log):
    _, trace = online_experiment(ReplayPlant(ref_log), 4, 4, Replay(ex.INPUTS))
    rec = [r.to_json() for r in trace.records]
    assert [r["t"] for r in rec] == list(range(14))
    assert {r["kind"] for r in rec} == {"initial", "hyperplane"}


def test_arbitrary_step_when_data_too_short():
    # with one input, t = k = 1 right after the initial block
    sys = random_minimal_system(2, 1, 1, seed=5)
    _, trace = online_experiment(SimulatedPlant(sys, [0, 0]), 2, 2)
    assert trace.records[1].kind == "arbitrary" and trace.records[1].t == 1


# ---- offline baselines


def test_design_pe_input_order_one():
    u = design_pe_input(1, 1, seed=0)
    assert u.shape == (1, 1) and u[0, 0] != 0


def test_design_pe_input_square_hankel(mode):
    u = design_pe_input(2, 7, seed=0, mode=mode)
    assert u.shape == (2, 20)
    H = la.hankel(u, 6)
    assert H.shape == (14, 14)
    assert sympy_rank(np.asarray(H, float).round().astype(int)) == 14
    assert la.is_persistently_exciting(u, 7)


@pytest.mark.parametrize(
    "args, expected",
    [
        ((80, 100, 150, 20, 100), (5850, 20330, 8280)),
        ((2, 4, 4, 2, 3), (14, 26, 17)),
        ((2, 3, 6, 2, 3), (14, 29, 14)),
    ],
)
def test_baseline_sample_counts(args, expected):
    assert baseline_sample_counts(*args) == expected


def test_online_count_is_never_larger():
    for m in range(1, 4):
        for L in range(0, 4):
            for N in range(0, 5):
                for ell in range(0, L + 1):
                    for n in range(ell, N + 1):
                        t, pe, fixed = baseline_sample_counts(m, L, N, ell, n)
                        assert t == minimal_experiment_length(ell, n, m, L, N)
                        assert t <= fixed <= pe
