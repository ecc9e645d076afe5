"""Kernels, kernel losses and explicit feature maps.

A loss is the Hilbert inner product between the feature embedding of the
player's point and the adversary's element of the same space.  Linear,
quadratic and low-degree polynomial kernels carry explicit finite feature
maps; the Gaussian kernel is infinite dimensional, so adversaries against it
must be rank-one (an embedded point).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb, factorial

import numpy as np

from .errors import InputError, InvalidCombinationError, UnsupportedFeatureMapError

__all__ = [
    "KernelSpec",
    "ExplicitVector",
    "RankOne",
    "kernel_eval",
    "cross_gram",
    "gram_matrix",
    "feature_map",
    "feature_matrix",
    "feature_dim",
    "has_feature_map",
    "loss_eval",
    "loss_vector",
    "adversary_norm",
    "adversary_feature",
    "make_explicit",
    "make_rank_one",
    "quadratic_adversary",
    "validate_points",
    "check_norm_bound",
]

_EXPLICIT_MAX_POLY_DEGREE = 3


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel governs the losses, plus the norm bound on both players.

    ``norm_bound_G`` bounds sqrt(K(a, a)) over the action set and the Hilbert
    norm of every adversary action.  It is declared, not derived; use
    :func:`check_norm_bound` to verify it against a finite action set.
    """

    variant: str  # "linear" | "quadratic" | "gaussian" | "polynomial"
    norm_bound_G: float = 1.0
    sigma: float | None = None
    degree: int | None = None
    offset: float | None = None

    def __post_init__(self):
        if self.variant not in ("linear", "quadratic", "gaussian", "polynomial"):
            raise InputError(f"unknown kernel variant {self.variant!r}")
        if self.norm_bound_G <= 0:
            raise InputError("norm_bound_G must be positive")
        if self.variant == "gaussian":
            if self.sigma is None or self.sigma <= 0:
                raise InputError("gaussian kernel needs sigma > 0")
        if self.variant == "polynomial":
            if self.degree is None or self.degree < 1:
                raise InputError("polynomial kernel needs degree >= 1")
            if self.offset is None or self.offset < 0:
                raise InputError("polynomial kernel needs offset >= 0")

    @classmethod
    def linear(cls, G: float = 1.0) -> "KernelSpec":
        return cls("linear", norm_bound_G=G)

    @classmethod
    def quadratic(cls, G: float = 2.0) -> "KernelSpec":
        return cls("quadratic", norm_bound_G=G)

    @classmethod
    def gaussian(cls, sigma: float, G: float = 1.0) -> "KernelSpec":
        return cls("gaussian", norm_bound_G=G, sigma=sigma)

    @classmethod
    def polynomial(cls, degree: int, offset: float, G: float) -> "KernelSpec":
        return cls("polynomial", norm_bound_G=G, degree=degree, offset=offset)


@dataclass(frozen=True)
class ExplicitVector:
    """Adversary action given directly in the explicit feature space."""

    w: np.ndarray


@dataclass(frozen=True)
class RankOne:
    """Adversary action of the form Phi(y) for a point y."""

    y: np.ndarray


AdversaryAction = ExplicitVector | RankOne


def validate_points(points: np.ndarray, unit_ball: bool = False,
                    tol: float = 1e-12) -> np.ndarray:
    """Check a (n, d) array of points: finite, and in the ball if required."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(pts)):
        raise InputError("points contain non-finite coordinates")
    if unit_ball:
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms > 1.0 + tol):
            raise InputError(f"point norm {norms.max():.12g} exceeds 1")
    return pts


def has_feature_map(spec: KernelSpec) -> bool:
    if spec.variant == "gaussian":
        return False
    if spec.variant == "polynomial":
        return spec.degree <= _EXPLICIT_MAX_POLY_DEGREE
    return True


def feature_dim(spec: KernelSpec, d: int) -> int:
    """Dimension of the explicit feature space for points in R^d."""
    if spec.variant == "linear":
        return d
    if spec.variant == "quadratic":
        return d * d + d
    if spec.variant == "polynomial" and has_feature_map(spec):
        return comb(d + spec.degree, spec.degree)
    raise UnsupportedFeatureMapError(
        f"{spec.variant} kernel has no explicit finite feature map"
    )


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """K(x, y).  Symmetric in its arguments by construction."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if spec.variant == "linear":
        return float(x @ y)
    if spec.variant == "quadratic":
        s = float(x @ y)
        return s * s + s
    if spec.variant == "gaussian":
        diff = x - y
        return float(np.exp(-(diff @ diff) / (2.0 * spec.sigma**2)))
    s = float(x @ y)
    return (spec.offset + s) ** spec.degree


def cross_gram(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix of K(X_i, Y_j), vectorized over both point sets."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    S = X @ Y.T
    if spec.variant == "linear":
        return S
    if spec.variant == "quadratic":
        return S * S + S
    if spec.variant == "gaussian":
        sq = (np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :]
              - 2.0 * S)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * spec.sigma**2))
    return (spec.offset + S) ** spec.degree


def gram_matrix(spec: KernelSpec, points: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Scaled Gram matrix K(x_i, x_j) * scale over one point set."""
    if scale <= 0:
        raise InputError("scale must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise InputError("points must be nonempty")
    G = cross_gram(spec, pts, pts)
    G = 0.5 * (G + G.T)  # exact symmetry regardless of BLAS ordering
    return G * scale


def _poly_exponents(d: int, degree: int):
    # multi-indices (k_0, ..., k_d) with sum = degree; k_0 is the offset slot
    for combo in combinations_with_replacement(range(d + 1), degree):
        counts = [0] * (d + 1)
        for c in combo:
            counts[c] += 1
        yield counts


def _poly_feature_coeffs(spec: KernelSpec, d: int):
    degree = spec.degree
    exps = list(_poly_exponents(d, degree))
    coeffs = np.empty(len(exps))
    powers = np.empty((len(exps), d), dtype=int)
    for i, k in enumerate(exps):
        multinom = factorial(degree)
        for kj in k:
            multinom //= factorial(kj)
        coeffs[i] = np.sqrt(multinom * spec.offset ** k[0])
        powers[i] = k[1:]
    return coeffs, powers


def feature_map(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    """Explicit feature embedding Phi(x).

    Linear: identity.  Quadratic: row-major flattening of x x^T followed by
    x, so the Hilbert inner product is the plain dot product of the flattened
    vectors.  Polynomial (degree <= 3): scaled monomial expansion of
    (offset + x.y)^degree.
    """
    x = np.asarray(x, dtype=float)
    if not has_feature_map(spec):
        raise UnsupportedFeatureMapError(
            f"{spec.variant} kernel has no explicit finite feature map"
        )
    if spec.variant == "linear":
        return x.copy()
    if spec.variant == "quadratic":
        return np.concatenate([np.outer(x, x).ravel(), x])
    coeffs, powers = _poly_feature_coeffs(spec, x.size)
    return coeffs * np.prod(x[None, :] ** powers, axis=1)


def feature_matrix(spec: KernelSpec, points: np.ndarray) -> np.ndarray:
    """Stacked feature maps, one row per point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.stack([feature_map(spec, p) for p in pts])


def adversary_norm(spec: KernelSpec, w: AdversaryAction) -> float:
    """Hilbert norm of an adversary action."""
    if isinstance(w, RankOne):
        return float(np.sqrt(max(kernel_eval(spec, w.y, w.y), 0.0)))
    return float(np.linalg.norm(w.w))


def make_explicit(spec: KernelSpec, w: np.ndarray, tol: float = 1e-9) -> ExplicitVector:
    """Explicit-space adversary action, validated against the kernel bound."""
    if not has_feature_map(spec):
        raise InvalidCombinationError(
            f"explicit adversary vectors require a finite feature map "
            f"({spec.variant} kernel has none)"
        )
    w = np.asarray(w, dtype=float)
    action = ExplicitVector(w)
    norm = adversary_norm(spec, action)
    if norm > spec.norm_bound_G + tol:
        raise InputError(
            f"adversary norm {norm:.12g} exceeds bound {spec.norm_bound_G}"
        )
    return action


def make_rank_one(spec: KernelSpec, y: np.ndarray, tol: float = 1e-9) -> RankOne:
    """Rank-one adversary Phi(y), the mandatory form for the Gaussian kernel."""
    y = np.asarray(y, dtype=float)
    action = RankOne(y)
    norm = adversary_norm(spec, action)
    if norm > spec.norm_bound_G + tol:
        raise InputError(
            f"adversary norm {norm:.12g} exceeds bound {spec.norm_bound_G}"
        )
    return action


def quadratic_adversary(spec: KernelSpec, A: np.ndarray, b: np.ndarray) -> ExplicitVector:
    """Adversary (A, b) for the quadratic kernel: loss a^T A a + b^T a."""
    if spec.variant != "quadratic":
        raise InvalidCombinationError("(A, b) adversaries require the quadratic kernel")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape != (b.size, b.size):
        raise InputError("A must be square with side len(b)")
    if not np.allclose(A, A.T, atol=1e-12):
        raise InputError("A must be symmetric")
    return make_explicit(spec, np.concatenate([A.ravel(), b]))


def loss_eval(spec: KernelSpec, a: np.ndarray, w: AdversaryAction) -> float:
    """Loss of playing a against adversary action w: <Phi(a), w>."""
    a = np.asarray(a, dtype=float)
    if isinstance(w, RankOne):
        return kernel_eval(spec, a, w.y)
    if not has_feature_map(spec):
        raise InvalidCombinationError(
            f"explicit adversary vector is invalid for the {spec.variant} kernel"
        )
    return float(feature_map(spec, a) @ w.w)


def loss_vector(spec: KernelSpec, actions: np.ndarray, w: AdversaryAction) -> np.ndarray:
    """Losses of every action against one adversary action."""
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    if isinstance(w, RankOne):
        return cross_gram(spec, actions, w.y[None, :])[:, 0]
    if not has_feature_map(spec):
        raise InvalidCombinationError(
            f"explicit adversary vector is invalid for the {spec.variant} kernel"
        )
    return feature_matrix(spec, actions) @ w.w


def adversary_feature(spec: KernelSpec, w: AdversaryAction) -> np.ndarray:
    """Adversary action as a vector in the explicit feature space."""
    if isinstance(w, ExplicitVector):
        return np.asarray(w.w, dtype=float)
    return feature_map(spec, w.y)


def check_norm_bound(spec: KernelSpec, actions: np.ndarray, tol: float = 1e-9) -> float:
    """Empirically verify norm_bound_G >= sup sqrt(K(a,a)) over the set.

    Returns the observed supremum.
    """
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    diag = np.array([kernel_eval(spec, a, a) for a in actions])
    sup = float(np.sqrt(max(diag.max(), 0.0)))
    if sup > spec.norm_bound_G + tol:
        raise InputError(
            f"declared bound {spec.norm_bound_G} below observed sup "
            f"sqrt(K(a,a)) = {sup:.12g}"
        )
    return sup
