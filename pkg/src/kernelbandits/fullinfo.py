"""Full-information algorithms: exponential weights and conditional gradient.

The conditional-gradient iterate lives in the explicit feature space but is
stored as a convex combination of embedded action points, which doubles as
the sampling distribution for the rank-one play.  A follow-the-regularized-
leader solver over the same hull is provided as a test oracle for the
iterate-gap analysis; it is not a production algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError, ToleranceNotMetError
from .kernels import (
    AdversaryAction,
    KernelSpec,
    adversary_feature,
    feature_map,
    feature_matrix,
    loss_eval,
    loss_vector,
)
from .quadratic import QuadraticObjective, trs_minimize
from .rng import sample_index
from .weights import WeightState

__all__ = [
    "UnitBall",
    "ConvexCombination",
    "CGConfig",
    "CGState",
    "FullInfoRecord",
    "CGRecord",
    "full_info_eta",
    "full_info_round",
    "run_full_info_ew",
    "cg_theorem_config",
    "cg_start",
    "cg_round",
    "run_cg",
    "linear_min_oracle",
    "ftrl_oracle",
]

_ATOM_PRUNE = 1e-14


@dataclass(frozen=True)
class UnitBall:
    """Continuous action set {a : ||a|| <= 1} in R^dim."""

    dim: int


@dataclass(frozen=True)
class ConvexCombination:
    """Atoms with convex weights; also the play distribution over atoms."""

    atoms: np.ndarray    # (k, d)
    weights: np.ndarray  # (k,)

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if atoms.shape[0] != w.size:
            raise InputError("atom and weight counts differ")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-8:
            raise InputError("weights must be a probability vector")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", np.maximum(w, 0.0) / np.maximum(w, 0.0).sum())

    def mean_feature(self, kernel: KernelSpec) -> np.ndarray:
        return feature_matrix(kernel, self.atoms).T @ self.weights


@dataclass(frozen=True)
class CGConfig:
    """Step size and mixing schedule for the conditional-gradient method."""

    eta: float
    gamma: Callable[[int], float]
    n: int


@dataclass(frozen=True)
class CGState:
    """Round state: the combination, its feature-space mean maintained
    incrementally, the running sum of past adversary features, and t."""

    combo: ConvexCombination
    mean: np.ndarray
    cum_adversary: np.ndarray
    x1: np.ndarray
    t: int


@dataclass(frozen=True)
class FullInfoRecord:
    round: int
    action_index: int
    loss: float


@dataclass(frozen=True)
class CGRecord:
    round: int
    action_index: int
    loss: float
    num_atoms: int
    cg_gap: float | None = None


def full_info_eta(num_actions: int, G: float, n: int) -> float:
    """Theorem step size sqrt(log|A| / (e-2)) / (G^2 sqrt(n)).

    The cardinality stands in for the volume of the action set; continuous
    sets must be discretized by the caller.
    """
    return math.sqrt(math.log(num_actions) / (math.e - 2.0)) / (G * G * math.sqrt(n))


def full_info_round(state: WeightState, eta: float, kernel: KernelSpec,
                    actions: np.ndarray, w_t: AdversaryAction,
                    rng: np.random.Generator) -> tuple[WeightState, FullInfoRecord]:
    """One exponential-weights round: play from the pre-update distribution,
    then shift every log weight by -eta times its observed loss."""
    probs = state.probabilities()
    idx = sample_index(probs, rng)
    losses = loss_vector(kernel, actions, w_t)
    new_state = state.stepped(-eta * losses)
    return new_state, FullInfoRecord(state.round + 1, idx, float(losses[idx]))


def run_full_info_ew(kernel: KernelSpec, actions: np.ndarray,
                     schedule: list[AdversaryAction], eta: float,
                     rng: np.random.Generator) -> tuple[list[FullInfoRecord], WeightState]:
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    state = WeightState.uniform(actions.shape[0])
    records = []
    for w_t in schedule:
        state, rec = full_info_round(state, eta, kernel, actions, w_t, rng)
        records.append(rec)
    return records, state


def cg_theorem_config(n: int) -> CGConfig:
    """Schedule from the regret theorem: eta = 1/(2 n^{3/4}),
    gamma_t = min(1, 2/sqrt(t))."""
    if n < 1:
        raise InputError("n must be >= 1")
    return CGConfig(eta=0.5 * n ** -0.75,
                    gamma=lambda t: min(1.0, 2.0 / math.sqrt(t)), n=n)


def cg_start(kernel: KernelSpec, a1: np.ndarray, cum_dim: int | None = None) -> CGState:
    a1 = np.asarray(a1, dtype=float)
    x1 = feature_map(kernel, a1)
    combo = ConvexCombination(a1[None, :], np.array([1.0]))
    return CGState(combo, x1.copy(), np.zeros(x1.size), x1, 1)


def _merge_atom(atoms: np.ndarray, weights: np.ndarray, point: np.ndarray,
                weight: float) -> tuple[np.ndarray, np.ndarray]:
    match = np.nonzero((atoms == point).all(axis=1))[0]
    if match.size:
        weights = weights.copy()
        weights[match[0]] += weight
        return atoms, weights
    return np.vstack([atoms, point[None, :]]), np.append(weights, weight)


def cg_round(state: CGState, config: CGConfig, kernel: KernelSpec,
             action_set, w_t: AdversaryAction,
             rng: np.random.Generator) -> tuple[CGState, CGRecord]:
    """One conditional-gradient round.

    Plays from the current combination, observes the loss, then moves the
    mean toward the linear-minimization-oracle output with this round's
    mixing rate.  The potential at round t aggregates adversary actions
    strictly before t, so the freshly observed action enters at t + 1.
    """
    t = state.t
    idx = sample_index(state.combo.weights, rng)
    a_t = state.combo.atoms[idx]
    loss = loss_eval(kernel, a_t, w_t)

    gradient = config.eta * state.cum_adversary + 2.0 * (state.mean - state.x1)
    v_t = linear_min_oracle(kernel, gradient, action_set)
    gamma_t = config.gamma(t)

    weights = (1.0 - gamma_t) * state.combo.weights
    atoms, weights = _merge_atom(state.combo.atoms, weights, v_t, gamma_t)
    keep = weights >= _ATOM_PRUNE
    atoms, weights = atoms[keep], weights[keep]
    combo = ConvexCombination(atoms, weights / weights.sum())

    mean = (1.0 - gamma_t) * state.mean + gamma_t * feature_map(kernel, v_t)
    cum = state.cum_adversary + adversary_feature(kernel, w_t)
    new_state = CGState(combo, mean, cum, state.x1, t + 1)
    record = CGRecord(t, idx, float(loss), num_atoms=combo.weights.size)
    return new_state, record


def run_cg(kernel: KernelSpec, action_set, schedule: list[AdversaryAction],
           config: CGConfig, rng: np.random.Generator,
           a1: np.ndarray | None = None,
           gap_oracle_tol: float | None = None) -> tuple[list[CGRecord], CGState]:
    """Run the conditional-gradient method over a full adversary schedule.

    With ``gap_oracle_tol`` set (finite action sets only), each record also
    carries the optimality gap of the iterate against the FTRL minimizer of
    the same potential, solved to that tolerance.
    """
    if a1 is None:
        if isinstance(action_set, UnitBall):
            raise InputError("unit-ball action set needs an explicit start point")
        a1 = np.atleast_2d(np.asarray(action_set, dtype=float))[0]
    state = cg_start(kernel, a1)
    records = []
    warm = None
    for w_t in schedule:
        gap = None
        if gap_oracle_tol is not None:
            gap, warm = _iterate_gap(state, config, kernel, action_set,
                                     gap_oracle_tol, warm)
        state, rec = cg_round(state, config, kernel, action_set, w_t, rng)
        if gap is not None:
            rec = CGRecord(rec.round, rec.action_index, rec.loss,
                           rec.num_atoms, cg_gap=gap)
        records.append(rec)
    return records, state


def _potential(state: CGState, config: CGConfig, X: np.ndarray) -> float:
    diff = X - state.x1
    return float(config.eta * state.cum_adversary @ X + diff @ diff)


def _iterate_gap(state: CGState, config: CGConfig, kernel: KernelSpec,
                 action_set, tol: float, warm):
    # F_t differs from the FTRL objective by the linear term -2 <x1, X>,
    # folded in here as a pseudo adversary action.
    history = [state.cum_adversary - 0.0, -2.0 * state.x1 / config.eta]
    star = ftrl_oracle(history, config.eta, kernel, action_set, tol,
                       init_weights=warm)
    x_star = star.mean_feature(kernel)
    gap = _potential(state, config, state.mean) - _potential(state, config, x_star)
    return gap, star.weights


def linear_min_oracle(kernel: KernelSpec, gradient: np.ndarray, action_set) -> np.ndarray:
    """Global minimizer of <gradient, Phi(a)> over the action set.

    Finite sets by enumeration (ties to the lowest index).  On the unit ball
    the problem is closed-form for the linear kernel and a trust-region
    subproblem for the quadratic kernel; other kernels are unsupported there.
    """
    gradient = np.asarray(gradient, dtype=float)
    if isinstance(action_set, UnitBall):
        d = action_set.dim
        if kernel.variant == "linear":
            norm = np.linalg.norm(gradient)
            return -gradient / norm if norm > 0 else np.zeros(d)
        if kernel.variant == "quadratic":
            M = gradient[: d * d].reshape(d, d)
            B = 0.5 * (M + M.T)
            b = gradient[d * d:]
            point, _ = trs_minimize(QuadraticObjective(B, b))
            return point
        raise InputError(
            f"unit-ball linear minimization is unsupported for the "
            f"{kernel.variant} kernel"
        )
    actions = np.atleast_2d(np.asarray(action_set, dtype=float))
    values = feature_matrix(kernel, actions) @ gradient
    return actions[int(np.argmin(values))]


def ftrl_oracle(history, eta: float, kernel: KernelSpec, actions,
                tol: float = 1e-8, max_iter: int = 100_000,
                init_weights: np.ndarray | None = None) -> ConvexCombination:
    """Minimize eta <sum w_s, X> + <X, X> over the hull of the embedded
    actions, by Frank-Wolfe with away steps over the simplex.

    ``history`` entries may be feature-space vectors or adversary actions.
    Raises when the duality gap has not reached ``tol`` within the cap.
    """
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    A = feature_matrix(kernel, actions)        # (N, D) atom features
    g = np.zeros(A.shape[1])
    for w in history:
        g = g + (adversary_feature(kernel, w) if not isinstance(w, np.ndarray)
                 else np.asarray(w, dtype=float))
    n = actions.shape[0]
    lam = (np.full(n, 1.0 / n) if init_weights is None
           else np.asarray(init_weights, dtype=float).copy())
    X = A.T @ lam
    gap = np.inf
    for _ in range(max_iter):
        grad = A @ (eta * g + 2.0 * X)
        s = int(np.argmin(grad))
        gap = float(grad @ lam - grad[s])
        if gap <= tol:
            return ConvexCombination(actions, lam)
        support = lam > 0
        v = int(np.argmax(np.where(support, grad, -np.inf)))
        fw_slope = grad[s] - float(grad @ lam)
        away_slope = float(grad @ lam) - grad[v]
        if fw_slope <= away_slope:
            direction = -lam.copy()
            direction[s] += 1.0
            step_max = 1.0
        else:
            direction = lam.copy()
            direction[v] -= 1.0
            step_max = lam[v] / (1.0 - lam[v]) if lam[v] < 1.0 else 0.0
        dX = A.T @ direction
        curv = float(dX @ dX)
        slope = float(grad @ direction)
        if curv <= 0 or step_max <= 0:
            step = step_max if slope < 0 else 0.0
        else:
            step = min(max(-slope / (2.0 * curv), 0.0), step_max)
        if step <= 0:
            break
        lam = lam + step * direction
        np.maximum(lam, 0.0, out=lam)
        lam /= lam.sum()
        X = A.T @ lam
    grad = A @ (eta * g + 2.0 * X)
    gap = float(grad @ lam - grad.min())
    if gap <= tol:
        return ConvexCombination(actions, lam)
    raise ToleranceNotMetError(gap, tol, max_iter)
