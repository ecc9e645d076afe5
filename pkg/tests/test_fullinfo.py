import math

import numpy as np
import pytest

from kernelbandits.errors import InputError, ToleranceNotMetError
from kernelbandits.fullinfo import (
    CGConfig,
    ConvexCombination,
    UnitBall,
    cg_round,
    cg_start,
    cg_theorem_config,
    ftrl_oracle,
    full_info_eta,
    full_info_round,
    linear_min_oracle,
    run_cg,
    run_full_info_ew,
)
from kernelbandits.harness import ball_directions, build_trace, unit_vector_adversary
from kernelbandits.kernels import (
    KernelSpec,
    feature_map,
    feature_matrix,
    loss_vector,
    make_explicit,
)
from kernelbandits.rng import component_rng
from kernelbandits.weights import WeightState

LINEAR = KernelSpec.linear(G=1.0)
QUAD = KernelSpec.quadratic(G=2.0)


def test_zero_eta_never_changes_distribution():
    actions = ball_directions(8)
    state = WeightState.uniform(8)
    rng = component_rng(0, "fi")
    w = make_explicit(LINEAR, np.array([0.3, 0.4]))
    for _ in range(20):
        state, _ = full_info_round(state, 0.0, LINEAR, actions, w, rng)
    assert np.allclose(state.probabilities(), 1.0 / 8)


def test_closed_form_weight_ratio():
    # losses 0 and 1 each round at eta = 0.5: ratio e^{0.5 t}
    actions = np.array([[0.0, 0.0], [1.0, 0.0]])
    w = make_explicit(LINEAR, np.array([1.0, 0.0]))
    state = WeightState.uniform(2)
    rng = component_rng(1, "fi")
    for t in range(1, 11):
        state, _ = full_info_round(state, 0.5, LINEAR, actions, w, rng)
        probs = state.probabilities()
        assert probs[0] / probs[1] == pytest.approx(math.exp(0.5 * t), rel=1e-9)


def test_theorem_step_size():
    eta = full_info_eta(50, G=1.0, n=10**4)
    assert eta == pytest.approx(math.sqrt(math.log(50) / (math.e - 2)) / 100.0)
    eta = full_info_eta(10, G=2.0, n=25)
    assert eta == pytest.approx(math.sqrt(math.log(10) / (math.e - 2)) / (4 * 5))


def test_distribution_equals_softmax_of_cumulative_losses():
    rng = component_rng(2, "fi")
    actions = ball_directions(12)
    schedule = unit_vector_adversary(2).materialize(60, component_rng(3, "adv"))
    state = WeightState.uniform(12)
    cum = np.zeros(12)
    eta = 0.2
    for w in schedule:
        state, _ = full_info_round(state, eta, LINEAR, actions, w, rng)
        cum += loss_vector(LINEAR, actions, w)
        expected = np.exp(-eta * cum - (-eta * cum).max())
        expected /= expected.sum()
        assert np.abs(state.probabilities() - expected).max() <= 1e-12


def test_cg_theorem_schedule():
    cfg = cg_theorem_config(4096)
    assert cfg.eta == pytest.approx(1.0 / (2 * 4096**0.75))
    assert cfg.gamma(1) == 1.0
    assert cfg.gamma(16) == pytest.approx(0.5)
    assert cfg.gamma(2) == pytest.approx(min(1.0, 2.0 / math.sqrt(2)))


def test_cg_first_round_replaces_iterate():
    # gamma_1 = 1: X_2 = Phi(v_1), a single atom
    actions = ball_directions(8)
    cfg = cg_theorem_config(16)
    state = cg_start(LINEAR, actions[0])
    w = make_explicit(LINEAR, np.array([1.0, 0.0]))
    state, rec = cg_round(state, cfg, LINEAR, actions, w, component_rng(4, "cg"))
    assert state.combo.weights.size == 1
    assert state.combo.weights[0] == pytest.approx(1.0)
    assert rec.num_atoms == 1


def test_cg_zero_gamma_keeps_iterate():
    actions = ball_directions(8)
    cfg = CGConfig(eta=0.01, gamma=lambda t: 0.0, n=4)
    state = cg_start(LINEAR, actions[0])
    w = make_explicit(LINEAR, np.array([0.0, 1.0]))
    new_state, _ = cg_round(state, cfg, LINEAR, actions, w, component_rng(5, "cg"))
    assert np.array_equal(new_state.mean, state.mean)
    assert np.array_equal(new_state.combo.atoms, state.combo.atoms)


def test_cg_mean_identity_every_round():
    actions = ball_directions(16)
    cfg = cg_theorem_config(128)
    schedule = unit_vector_adversary(2).materialize(128, component_rng(6, "adv"))
    state = cg_start(LINEAR, actions[0])
    rng = component_rng(6, "cg")
    for w in schedule:
        state, _ = cg_round(state, cfg, LINEAR, actions, w, rng)
        derived = state.combo.mean_feature(LINEAR)
        assert np.abs(derived - state.mean).max() <= 1e-10


def test_cg_converges_to_opposing_atom():
    # constant adversary aligned with the start: mass flows to the antipode
    actions = ball_directions(64)
    n = 4096
    w = make_explicit(LINEAR, actions[0])
    records, state = run_cg(LINEAR, actions, [w] * n, cg_theorem_config(n),
                            component_rng(7, "cg"))
    top_atom = state.combo.atoms[int(np.argmax(state.combo.weights))]
    assert np.linalg.norm(top_atom - (-actions[0])) <= 1e-12
    assert state.combo.weights.max() >= 0.99
    losses = np.array([r.loss for r in records])
    idxs = np.array([r.action_index for r in records])
    trace = build_trace(LINEAR, actions, [w] * n, losses, idxs)
    assert trace.final_regret <= 8 * n**0.75


def test_linear_min_oracle_finite_set():
    actions = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    g = np.array([1.0, -0.2])
    v = linear_min_oracle(LINEAR, g, actions)
    assert np.array_equal(v, [-1.0, 0.0])


def test_linear_min_oracle_unit_ball_linear():
    v = linear_min_oracle(LINEAR, np.array([3.0, 4.0]), UnitBall(2))
    assert np.allclose(v, [-0.6, -0.8])
    v = linear_min_oracle(LINEAR, np.zeros(2), UnitBall(2))
    assert np.array_equal(v, [0.0, 0.0])


def test_linear_min_oracle_unit_ball_quadratic():
    # gradient encoding (B, b) = (diag(1, 2), 0): PSD, minimum at the origin
    g = np.concatenate([np.diag([1.0, 2.0]).ravel(), np.zeros(2)])
    v = linear_min_oracle(QUAD, g, UnitBall(2))
    assert np.linalg.norm(v) <= 1e-8
    assert feature_map(QUAD, v) @ g == pytest.approx(0.0, abs=1e-12)


def test_linear_min_oracle_unsupported_kernel_on_ball():
    with pytest.raises(InputError):
        linear_min_oracle(KernelSpec.gaussian(1.0), np.zeros(2), UnitBall(2))


def test_ftrl_symmetric_hull_gives_zero():
    atoms = np.array([[1.0, 0.0], [-1.0, 0.0]])
    combo = ftrl_oracle([], 0.5, LINEAR, atoms, tol=1e-10)
    assert np.linalg.norm(combo.mean_feature(LINEAR)) <= 1e-5


def test_ftrl_single_atom():
    combo = ftrl_oracle([np.array([2.0, -1.0])], 0.7, LINEAR,
                        np.array([[0.3, 0.4]]), tol=1e-10)
    assert np.array_equal(combo.weights, [1.0])


def test_ftrl_optimal_against_probes():
    rng = component_rng(8, "ftrl")
    atoms = rng.standard_normal((5, 2)) * 0.5
    history = [rng.standard_normal(2) for _ in range(4)]
    eta = 0.3
    combo = ftrl_oracle(history, eta, LINEAR, atoms, tol=1e-10)
    g = np.sum(history, axis=0)

    def objective(lam):
        X = atoms.T @ lam
        return eta * g @ X + X @ X

    val = objective(combo.weights)
    vertices = min(objective(np.eye(5)[i]) for i in range(5))
    probes = min(objective(lam) for lam in rng.dirichlet(np.ones(5), size=10**4))
    assert val <= min(vertices, probes) + 1e-8


def test_ftrl_tolerance_not_met():
    rng = component_rng(9, "ftrl")
    atoms = rng.standard_normal((20, 3))
    history = [rng.standard_normal(3)]
    with pytest.raises(ToleranceNotMetError) as err:
        ftrl_oracle(history, 0.5, LINEAR, atoms, tol=1e-16, max_iter=3)
    assert err.value.achieved_gap > 1e-16


def test_ftrl_per_step_stability():
    # <w_t, X_t - X_{t+1}> <= 2 eta ||w_t||^2 along the oracle trajectory
    rng = component_rng(10, "stab")
    atoms = ball_directions(16)
    eta = 0.05
    history = []
    prev = ftrl_oracle(history, eta, LINEAR, atoms, tol=1e-12).mean_feature(LINEAR)
    for _ in range(30):
        w = rng.standard_normal(2)
        w /= np.linalg.norm(w)
        history.append(w)
        cur = ftrl_oracle(history, eta, LINEAR, atoms, tol=1e-12).mean_feature(LINEAR)
        assert w @ (prev - cur) <= 2 * eta * (w @ w) + 1e-8
        prev = cur


def test_cg_gap_bound_against_ftrl_oracle():
    # The exact recursion gives h_{t+1} <= (1-g) h_t + g^2 ||Phi(v)-X||^2
    # with ||Phi(v)-X|| <= 2G, whose closed induction constant is 8 G^2
    # gamma_t; early rounds can cross 4 G^2 gamma_t under adversarial
    # alignment, so the module-level property asserts the derivable constant.
    full = cg_theorem_config(4096)
    cfg = CGConfig(eta=full.eta, gamma=full.gamma, n=128)
    actions = ball_directions(32)
    for seed in (7, 11, 23):
        schedule = unit_vector_adversary(2).materialize(
            128, component_rng(seed, "adv"))
        records, _ = run_cg(LINEAR, actions, schedule, cfg,
                            component_rng(seed, "cg"), gap_oracle_tol=1e-8)
        for rec in records:
            gamma_t = min(1.0, 2.0 / math.sqrt(rec.round))
            assert rec.cg_gap <= 8.0 * gamma_t + 1e-6


def test_cg_atom_count_stays_bounded():
    actions = ball_directions(64)
    n = 2048
    schedule = unit_vector_adversary(2).materialize(n, component_rng(12, "adv"))
    records, state = run_cg(LINEAR, actions, schedule, cg_theorem_config(n),
                            component_rng(12, "cg"))
    assert max(r.num_atoms for r in records) <= 64
    assert abs(state.combo.weights.sum() - 1.0) <= 1e-12


def test_convex_combination_validation():
    with pytest.raises(InputError):
        ConvexCombination(np.eye(2), np.array([0.5, 0.2]))
    with pytest.raises(InputError):
        ConvexCombination(np.eye(2), np.array([0.5]))


def test_run_cg_requires_start_for_ball():
    with pytest.raises(InputError):
        run_cg(LINEAR, UnitBall(2), [], cg_theorem_config(4),
               component_rng(13, "cg"))


def test_run_cg_on_unit_ball_with_quadratic_kernel():
    rng = component_rng(14, "ball")
    n = 64
    cfg = cg_theorem_config(n)
    schedule = []
    for _ in range(n):
        M = rng.standard_normal((2, 2))
        A = 0.25 * (M + M.T)
        b = 0.25 * rng.standard_normal(2)
        from kernelbandits.kernels import quadratic_adversary

        schedule.append(quadratic_adversary(QUAD, A, b))
    records, state = run_cg(QUAD, UnitBall(2), schedule, cfg,
                            component_rng(14, "cg"), a1=np.array([1.0, 0.0]))
    assert len(records) == n
    assert np.all(np.linalg.norm(state.combo.atoms, axis=1) <= 1.0 + 1e-9)
