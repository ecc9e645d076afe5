"""Exploration designs and covariance machinery.

The exploration distribution is the D-optimal design over the proxy features
(the dual of the minimum-volume enclosing ellipsoid for origin-symmetric
sets), computed by Frank-Wolfe with away steps on the log-det objective.
After whitening by the design covariance, the feature second-moment matrix
of the design is the identity over m, which is what gives the mixed
distribution its gamma/m eigenvalue floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedCovarianceError, InputError, RankDeficiencyError
from .rng import component_rng

__all__ = [
    "DiscreteDistribution",
    "Covariance",
    "d_optimal_design",
    "mix_distributions",
    "action_covariance",
    "sample_covariance",
    "invert_covariance",
    "whiten_features",
    "reduce_to_span",
    "design_weights_csv",
]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability weights over the finite action set, in index order."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12):
            raise InputError("distribution weights must be nonnegative")
        total = w.sum()
        if not np.isfinite(total) or abs(total - 1.0) > 1e-8:
            raise InputError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", np.maximum(w, 0.0) / np.maximum(w, 0.0).sum())

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, n: int) -> "DiscreteDistribution":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class Covariance:
    """Symmetric second-moment matrix with its smallest eigenvalue attached."""

    matrix: np.ndarray
    min_eig: float


def _as_feature_array(features) -> np.ndarray:
    F = np.atleast_2d(np.asarray(features, dtype=float))
    if F.shape[0] == 0:
        raise InputError("empty feature set")
    return F


def d_optimal_design(features, max_iter: int = 10_000,
                     tol: float = 1e-6) -> DiscreteDistribution:
    """D-optimal design weights over the feature rows.

    Maximizes log det(sum_i w_i f_i f_i^T) by Frank-Wolfe with away steps;
    the returned design satisfies the Kiefer-Wolfowitz certificate
    max_i f_i^T Sigma^-1 f_i <= m (1 + tol).
    """
    F = _as_feature_array(features)
    n, m = F.shape
    rank = np.linalg.matrix_rank(F)
    if rank < m:
        raise RankDeficiencyError(rank, m)
    w = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        sigma = F.T @ (F * w[:, None])
        g = np.einsum("ij,jk,ik->i", F, np.linalg.inv(sigma), F)  # f^T S^-1 f
        j_add = int(np.argmax(g))
        support = w > 0
        g_support = np.where(support, g, np.inf)
        j_away = int(np.argmin(g_support))
        add_violation = g[j_add] / m - 1.0
        away_violation = 1.0 - g[j_away] / m
        if add_violation <= tol and away_violation <= tol:
            break
        if add_violation >= away_violation:
            j, gj = j_add, g[j_add]
            lam = (gj - m) / (m * (gj - 1.0))  # gj > m >= 1 here
        else:
            j, gj = j_away, g[j_away]
            lam_min = -w[j] / (1.0 - w[j]) if w[j] < 1.0 else 0.0
            if gj > 1.0:
                # negative step removes mass from j, clipped to keep w >= 0
                lam = max((gj - m) / (m * (gj - 1.0)), lam_min)
            else:
                lam = lam_min  # log det increases all the way to dropping j
        w = (1.0 - lam) * w
        w[j] += lam
        np.maximum(w, 0.0, out=w)
        w /= w.sum()
    return DiscreteDistribution(w)


def mix_distributions(q: DiscreteDistribution, nu: DiscreteDistribution,
                      gamma: float) -> DiscreteDistribution:
    """Exploration mixture (1 - gamma) q + gamma nu."""
    if not 0.0 <= gamma <= 1.0:
        raise InputError(f"gamma must be in [0, 1], got {gamma}")
    if len(q) != len(nu):
        raise InputError("distributions must have equal length")
    return DiscreteDistribution((1.0 - gamma) * q.weights + gamma * nu.weights)


def action_covariance(p: DiscreteDistribution, features) -> Covariance:
    """Exact feature second moment sum_i p_i f_i f_i^T under p."""
    F = _as_feature_array(features)
    if F.shape[0] != len(p):
        raise InputError("distribution and feature counts differ")
    sigma = F.T @ (F * p.weights[:, None])
    sigma = 0.5 * (sigma + sigma.T)
    min_eig = float(np.linalg.eigvalsh(sigma)[0])
    return Covariance(sigma, min_eig)


def sample_covariance(p: DiscreteDistribution, features, r: int,
                      seed: int = 0) -> Covariance:
    """Monte-Carlo second moment from r i.i.d. draws from p."""
    if r < 1:
        raise InputError("r must be >= 1")
    F = _as_feature_array(features)
    rng = component_rng(seed, "sample_covariance")
    idx = rng.choice(F.shape[0], size=r, p=p.weights)
    chosen = F[idx]
    sigma = chosen.T @ chosen / r
    sigma = 0.5 * (sigma + sigma.T)
    min_eig = float(np.linalg.eigvalsh(sigma)[0])
    return Covariance(sigma, min_eig)


def invert_covariance(c: Covariance, floor: float) -> np.ndarray:
    """Symmetric inverse; refuses when the spectrum sits below the floor."""
    if floor <= 0:
        raise InputError("floor must be positive")
    if c.min_eig < floor:
        raise IllConditionedCovarianceError(c.min_eig, floor)
    vals, vecs = np.linalg.eigh(c.matrix)
    inv = (vecs / vals) @ vecs.T
    return 0.5 * (inv + inv.T)


def whiten_features(features, design: DiscreteDistribution) -> np.ndarray:
    """Linear change of feature coordinates making the design covariance I/m.

    The exponential-weights updates are invariant under any invertible linear
    map of the features, so whitening only pins down the numerical frame in
    which the gamma/m covariance floor holds.
    """
    F = _as_feature_array(features)
    m = F.shape[1]
    sigma = action_covariance(design, F).matrix
    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] <= 0:
        raise RankDeficiencyError(int((vals > 0).sum()), m)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    return F @ inv_sqrt.T / np.sqrt(m)


def reduce_to_span(features, rel_tol: float = 1e-10):
    """Project features onto their span when they are rank deficient.

    Returns (reduced features, orthonormal basis of the span).  The basis has
    shape (rank, m) so original-space vectors map down via basis @ v.
    """
    F = _as_feature_array(features)
    u, s, vt = np.linalg.svd(F, full_matrices=False)
    rank = int((s > rel_tol * s[0]).sum()) if s.size and s[0] > 0 else 0
    if rank == 0:
        raise InputError("feature set is identically zero")
    basis = vt[:rank]
    return F @ basis.T, basis


def design_weights_csv(design: DiscreteDistribution) -> str:
    """Design weights as CSV text: action_index, weight."""
    lines = ["action_index,weight"]
    lines += [f"{i},{w:.17g}" for i, w in enumerate(design.weights)]
    return "\n".join(lines) + "\n"
