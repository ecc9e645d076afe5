"""Adversary generators, regret accounting and experiment orchestration.

An adversary materializes its full action schedule before round one
(obliviousness); regret compares the player's cumulative loss with the best
single action over the whole horizon, with the partial sums of that one
action defining the regret curve.  Expected regret is estimated by averaging
final regrets over seeds, with a standard error attached.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bandit as _bandit
from . import fullinfo as _fullinfo
from .design import DiscreteDistribution
from .errors import InputError
from .kernels import (
    AdversaryAction,
    KernelSpec,
    RankOne,
    check_norm_bound,
    loss_vector,
    validate_points,
)
from .proxy import build_proxy, approximation_sup_error
from .rng import component_rng

__all__ = [
    "FixedAdversary",
    "IIDAdversary",
    "PeriodicAdversary",
    "ScheduleAdversary",
    "unit_vector_adversary",
    "schedule_hash",
    "RegretTrace",
    "best_in_hindsight",
    "build_trace",
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    "emit_trace",
    "parse_trace",
    "ball_directions",
]


@dataclass(frozen=True)
class FixedAdversary:
    """Same action every round."""

    action: AdversaryAction

    def materialize(self, n: int, rng: np.random.Generator) -> list[AdversaryAction]:
        return [self.action] * n


@dataclass(frozen=True)
class IIDAdversary:
    """Independent draws from a sampler callback; seeded, fixed before play."""

    sampler: Callable[[np.random.Generator], AdversaryAction]

    def materialize(self, n: int, rng: np.random.Generator) -> list[AdversaryAction]:
        return [self.sampler(rng) for _ in range(n)]


@dataclass(frozen=True)
class PeriodicAdversary:
    """Cycles through a fixed list of actions."""

    actions: tuple

    def materialize(self, n: int, rng: np.random.Generator) -> list[AdversaryAction]:
        k = len(self.actions)
        return [self.actions[t % k] for t in range(n)]


@dataclass(frozen=True)
class ScheduleAdversary:
    """Explicit precomputed schedule."""

    schedule: tuple

    def materialize(self, n: int, rng: np.random.Generator) -> list[AdversaryAction]:
        if len(self.schedule) < n:
            raise InputError(f"schedule has {len(self.schedule)} < n = {n} actions")
        return list(self.schedule[:n])


def unit_vector_adversary(d: int) -> IIDAdversary:
    """I.i.d. uniformly random unit vectors, played as rank-one actions."""

    def draw(rng: np.random.Generator) -> AdversaryAction:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        while norm == 0.0:
            v = rng.standard_normal(d)
            norm = np.linalg.norm(v)
        return RankOne(v / norm)

    return IIDAdversary(draw)


def schedule_hash(schedule: list[AdversaryAction]) -> str:
    """Content hash of a materialized schedule (obliviousness witness)."""
    h = hashlib.sha256()
    for w in schedule:
        if isinstance(w, RankOne):
            h.update(b"r")
            payload = w.y
        else:
            h.update(b"e")
            payload = w.w
        h.update(",".join(f"{v:.17g}" for v in np.ravel(payload)).encode())
    return h.hexdigest()


@dataclass(frozen=True)
class RegretTrace:
    """Per-round losses and the regret bookkeeping against hindsight."""

    losses: np.ndarray
    action_indices: np.ndarray
    best_action_index: int
    best_fixed_cum_loss: float
    regret_curve: np.ndarray

    @property
    def cum_loss(self) -> float:
        return float(self.losses.sum())

    @property
    def final_regret(self) -> float:
        return float(self.regret_curve[-1])


def best_in_hindsight(kernel: KernelSpec, actions: np.ndarray,
                      schedule: list[AdversaryAction]) -> tuple[int, float]:
    """Exact enumeration of the best fixed action; ties to the lowest index."""
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    totals = np.zeros(actions.shape[0])
    for w in schedule:
        totals += loss_vector(kernel, actions, w)
    idx = int(np.argmin(totals))
    return idx, float(totals[idx])


def build_trace(kernel: KernelSpec, actions: np.ndarray,
                schedule: list[AdversaryAction], losses: np.ndarray,
                action_indices: np.ndarray) -> RegretTrace:
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    best_idx, best_total = best_in_hindsight(kernel, actions, schedule)
    best_per_round = np.array(
        [loss_vector(kernel, actions[best_idx][None, :], w)[0] for w in schedule]
    )
    losses = np.asarray(losses, dtype=float)
    curve = np.cumsum(losses) - np.cumsum(best_per_round)
    return RegretTrace(
        losses=losses,
        action_indices=np.asarray(action_indices, dtype=int),
        best_action_index=best_idx,
        best_fixed_cum_loss=best_total,
        regret_curve=curve,
    )


@dataclass
class ExperimentConfig:
    """Everything a run needs; randomness derives from the seed list only.

    ``params`` is either the string "paper" (theorem schedules) or a dict of
    explicit algorithm parameters.  ``adversary_seed`` pins the adversary
    stream independently of the player seed; left unset, each run seed gets
    its own adversary stream.
    """

    algo: str  # "bandit_ew" | "fullinfo_ew" | "cg"
    kernel: KernelSpec
    actions: np.ndarray
    adversary: object
    n: int
    seeds: tuple = (0,)
    params: object = "paper"
    adversary_seed: int | None = None
    proxy_p: int | None = None
    proxy_m: int | None = None
    covering_radius: float | None = None
    unit_ball_actions: bool = True

    def __post_init__(self):
        if self.algo not in ("bandit_ew", "fullinfo_ew", "cg"):
            raise InputError(f"unknown algorithm {self.algo!r}")
        if self.n < 1:
            raise InputError("horizon n must be >= 1")
        if len(self.seeds) < 1:
            raise InputError("need at least one seed")
        self.actions = validate_points(self.actions, unit_ball=self.unit_ball_actions)
        check_norm_bound(self.kernel, self.actions)


@dataclass
class ExperimentResult:
    traces: list[RegretTrace]
    mean_final_regret: float
    stderr_final_regret: float
    schedule_hashes: list[str] = field(default_factory=list)
    discretization_error: float | None = None
    details: dict = field(default_factory=dict)


def _bandit_setup(config: ExperimentConfig):
    kernel = config.kernel
    actions = config.actions
    num_actions = actions.shape[0]
    p = config.proxy_p or 2 * num_actions
    m_target = config.proxy_m or min(num_actions, p)
    basis = build_proxy(kernel, actions, m=m_target, p=p,
                        rng=component_rng(config.adversary_seed or 0, "proxy"))
    features, nu, center_offset = _bandit.prepare_bandit_features(basis, actions)
    m = features.shape[1]
    if config.params == "paper":
        eps_hat = approximation_sup_error(kernel, basis, actions)
        bcfg = _bandit.general_theorem_config(num_actions, config.n,
                                              kernel.norm_bound_G, m, eps=eps_hat)
    else:
        params = dict(config.params)
        bcfg = _bandit.BanditConfig(
            eta=params["eta"], gamma=params["gamma"], m=m,
            eps=params.get("eps", 0.0), n=config.n,
        )
    return basis, features, nu, bcfg, center_offset


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """One trace per seed; mean final regret with its standard error."""
    kernel, actions = config.kernel, config.actions
    traces: list[RegretTrace] = []
    hashes: list[str] = []
    details: dict = {}

    bandit_ctx = _bandit_setup(config) if config.algo == "bandit_ew" else None
    if bandit_ctx is not None:
        details["bandit_config"] = bandit_ctx[3]
        details["design_center_offset"] = bandit_ctx[4]

    for seed in config.seeds:
        adv_seed = config.adversary_seed if config.adversary_seed is not None else seed
        adv_rng = component_rng(adv_seed, "adversary")
        schedule = config.adversary.materialize(config.n, adv_rng)
        hashes.append(schedule_hash(schedule))
        player_rng = component_rng(seed, "player")

        if config.algo == "fullinfo_ew":
            eta = (_fullinfo.full_info_eta(actions.shape[0], kernel.norm_bound_G,
                                           config.n)
                   if config.params == "paper" else config.params["eta"])
            records, _ = _fullinfo.run_full_info_ew(kernel, actions, schedule,
                                                    eta, player_rng)
        elif config.algo == "cg":
            cg_config = (_fullinfo.cg_theorem_config(config.n)
                         if config.params == "paper"
                         else _fullinfo.CGConfig(**config.params))
            records, _ = _fullinfo.run_cg(kernel, actions, schedule, cg_config,
                                          player_rng)
        else:
            basis, features, nu, bcfg, _ = bandit_ctx
            records, _ = _bandit.run_bandit(kernel, actions, features, nu, bcfg,
                                            schedule, player_rng)

        losses = np.array([r.loss for r in records])
        idxs = np.array([r.action_index for r in records])
        traces.append(build_trace(kernel, actions, schedule, losses, idxs))

    finals = np.array([t.final_regret for t in traces])
    stderr = float(finals.std(ddof=1) / math.sqrt(len(finals))) if len(finals) > 1 else 0.0
    disc = (kernel.norm_bound_G**2 * config.covering_radius
            if config.covering_radius is not None else None)
    return ExperimentResult(
        traces=traces,
        mean_final_regret=float(finals.mean()),
        stderr_final_regret=stderr,
        schedule_hashes=hashes,
        discretization_error=disc,
        details=details,
    )


def emit_trace(trace: RegretTrace, path, config_echo: dict | None = None) -> None:
    """Deterministic CSV: round,action_index,loss,cum_loss,cum_regret."""
    lines = []
    if config_echo:
        import json

        lines.append("# " + json.dumps(config_echo, sort_keys=True))
    lines.append("round,action_index,loss,cum_loss,cum_regret")
    cum = 0.0
    for t in range(trace.losses.size):
        cum += trace.losses[t]
        lines.append(
            f"{t + 1},{trace.action_indices[t]},{trace.losses[t]:.17g},"
            f"{cum:.17g},{trace.regret_curve[t]:.17g}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_trace(path) -> dict:
    """Parse an emitted trace back into column arrays (value-exact)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    rows = [ln for ln in lines if not ln.startswith("#")]
    header = rows[0]
    if header != "round,action_index,loss,cum_loss,cum_regret":
        raise InputError(f"unexpected trace header {header!r}")
    data = [ln.split(",") for ln in rows[1:]]
    return {
        "round": np.array([int(r[0]) for r in data]),
        "action_index": np.array([int(r[1]) for r in data]),
        "loss": np.array([float(r[2]) for r in data]),
        "cum_loss": np.array([float(r[3]) for r in data]),
        "cum_regret": np.array([float(r[4]) for r in data]),
    }


def ball_directions(k: int) -> np.ndarray:
    """k equally spaced unit vectors on the circle (planar ball cover).

    The covering radius of this set within the unit disk boundary is
    2 sin(pi / (2k)).
    """
    if k < 2:
        raise InputError("need at least 2 directions")
    angles = 2.0 * np.pi * np.arange(k) / k
    return np.column_stack([np.cos(angles), np.sin(angles)])
