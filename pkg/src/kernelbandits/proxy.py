"""Finite-dimensional proxy kernels from sampled Gram matrices.

The proxy feature map projects the (possibly infinite dimensional) kernel
embedding onto the span of the top eigenvectors of a sampled covariance,
computed through the Gram matrix: draw p points, eigendecompose the
(1/p)-scaled Gram, and normalize each eigenvector's image in feature space.
The resulting m-dimensional kernel approximates the original uniformly when
the spectrum decays fast enough; `effective_dimension` turns a decay profile
into the truncation level needed for a target approximation error.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumWarning, InputError
from .kernels import KernelSpec, cross_gram, gram_matrix

__all__ = [
    "SampleBasis",
    "EigendecayProfile",
    "basis_from_samples",
    "build_proxy",
    "proxy_feature",
    "proxy_features",
    "effective_dimension",
    "approximation_sup_error",
    "fit_eigendecay",
    "basis_to_json",
    "basis_from_json",
]


@dataclass(frozen=True)
class SampleBasis:
    """Data defining the proxy feature map.

    ``eig_coeffs`` rows are the unit-norm Gram eigenvectors; ``normalizers``
    are the feature-space norms of the corresponding eigenvector images,
    which satisfy normalizers_j**2 = p * eigenvalues_j.
    """

    sample_points: np.ndarray  # (p, d)
    eig_coeffs: np.ndarray     # (m, p)
    eigenvalues: np.ndarray    # (m,), descending, > 0
    normalizers: np.ndarray    # (m,)
    kernel: KernelSpec

    @property
    def m(self) -> int:
        return self.eigenvalues.size

    @property
    def p(self) -> int:
        return self.sample_points.shape[0]


@dataclass(frozen=True)
class EigendecayProfile:
    """Spectral decay assumption: mu_j <= C j^-beta or mu_j <= C exp(-beta j).

    ``eigfn_bound_B`` bounds the sup norm of every scaled eigenfunction.
    """

    variant: str  # "polynomial" | "exponential"
    C: float
    beta: float
    eigfn_bound_B: float = 1.0

    def __post_init__(self):
        if self.variant not in ("polynomial", "exponential"):
            raise InputError(f"unknown decay variant {self.variant!r}")
        if self.C <= 0 or self.eigfn_bound_B <= 0:
            raise InputError("C and eigfn_bound_B must be positive")
        if self.variant == "polynomial":
            if self.beta <= 1:
                raise InputError("polynomial decay needs beta > 1")
            if self.beta <= 2:
                warnings.warn(
                    "polynomial decay with beta <= 2 is outside the regime "
                    "with a sublinear regret guarantee",
                    stacklevel=2,
                )
        elif self.beta <= 0:
            raise InputError("exponential decay needs beta > 0")


def _draw_samples(sampler, p: int, rng: np.random.Generator) -> np.ndarray:
    """Resolve the sampling measure: point array (uniform), (points, weights)
    discrete measure, or a seeded callback returning one point per call."""
    if callable(sampler):
        pts = np.atleast_2d(np.asarray([sampler(rng) for _ in range(p)], dtype=float))
        return pts
    if isinstance(sampler, tuple):
        points, weights = sampler
        points = np.atleast_2d(np.asarray(points, dtype=float))
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        idx = rng.choice(points.shape[0], size=p, p=weights)
        return points[idx]
    points = np.atleast_2d(np.asarray(sampler, dtype=float))
    idx = rng.integers(0, points.shape[0], size=p)
    return points[idx]


def basis_from_samples(kernel: KernelSpec, samples: np.ndarray,
                       m: int | None = None,
                       eig_floor: float | None = None) -> SampleBasis:
    """Proxy basis from an explicit sample set (deterministic).

    Eigenvalues below ``eig_floor`` (default 1e-10 times the largest) are
    dropped, reducing m, rather than dividing by near-zero normalizers.
    ``m=None`` keeps the whole observed spectrum above the floor.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    p = pts.shape[0]
    K_scaled = gram_matrix(kernel, pts, scale=1.0 / p)
    vals, vecs = np.linalg.eigh(K_scaled)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    floor = (1e-10 * max(vals[0], 0.0)) if eig_floor is None else eig_floor
    observed = int((vals > max(floor, 0.0)).sum())
    if m is None:
        m_eff = observed
    else:
        m_eff = min(m, observed)
        if m_eff < m:
            warnings.warn(
                DegenerateSpectrumWarning(
                    f"only {m_eff} eigenvalues above floor {floor:.3e}; "
                    f"reduced m from {m}"
                ),
                stacklevel=3,
            )
    if m_eff == 0:
        raise InputError("Gram spectrum entirely below the eigenvalue floor")
    eigenvalues = vals[:m_eff]
    eig_coeffs = vecs[:, :m_eff].T
    normalizers = np.sqrt(p * eigenvalues)
    return SampleBasis(pts, eig_coeffs, eigenvalues, normalizers, kernel)


def build_proxy(kernel: KernelSpec, sampler, m: int | None, p: int,
                eig_floor: float | None = None,
                rng: np.random.Generator | None = None) -> SampleBasis:
    """Construct the m-dimensional proxy basis from p sampled points.

    ``sampler`` is a point array (uniform over rows), a (points, weights)
    discrete measure, or a seeded callback returning one point per call.
    """
    if m is not None and m < 1:
        raise InputError("m must be >= 1")
    if m is not None and p < m:
        raise InputError(f"need p >= m, got p={p}, m={m}")
    if rng is None:
        rng = np.random.default_rng()
    pts = _draw_samples(sampler, p, rng)
    return basis_from_samples(kernel, pts, m=m, eig_floor=eig_floor)


def proxy_features(basis: SampleBasis, points: np.ndarray) -> np.ndarray:
    """Proxy feature vectors, one row per point.

    Row j of the map is sum_k omega_jk K(x_k, .) divided by the normalizer.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != basis.sample_points.shape[1]:
        raise InputError(
            f"dimension mismatch: {pts.shape[1]} vs {basis.sample_points.shape[1]}"
        )
    kx = cross_gram(basis.kernel, pts, basis.sample_points)  # (n, p)
    return (kx @ basis.eig_coeffs.T) / basis.normalizers


def proxy_feature(basis: SampleBasis, x: np.ndarray) -> np.ndarray:
    """Proxy feature vector of a single point (length m)."""
    return proxy_features(basis, np.asarray(x, dtype=float)[None, :])[0]


def effective_dimension(profile: EigendecayProfile, eps: float) -> int:
    """Truncation level sufficient for an eps-approximate proxy.

    Polynomial decay: ceil((4 C B^2 / ((beta - 1) eps))^(1/(beta-1))).
    Exponential decay: ceil((1/beta) log(4 C B^2 / (beta eps))).
    Clamped below at 1.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    C, beta, B = profile.C, profile.beta, profile.eigfn_bound_B
    if profile.variant == "polynomial":
        value = (4.0 * C * B * B / ((beta - 1.0) * eps)) ** (1.0 / (beta - 1.0))
    else:
        value = math.log(4.0 * C * B * B / (beta * eps)) / beta
    return max(1, math.ceil(value))


def approximation_sup_error(kernel: KernelSpec, basis: SampleBasis,
                            probe_points: np.ndarray) -> float:
    """Max over probe pairs of |K(x, y) - proxy kernel(x, y)|."""
    pts = np.atleast_2d(np.asarray(probe_points, dtype=float))
    if pts.shape[0] < 2:
        raise InputError("need at least 2 probe points")
    K_true = cross_gram(kernel, pts, pts)
    F = proxy_features(basis, pts)
    return float(np.abs(K_true - F @ F.T).max())


def fit_eigendecay(basis: SampleBasis, variant: str,
                   probe_points: np.ndarray) -> EigendecayProfile:
    """Fit a decay profile to the observed Gram spectrum.

    Least squares of log(mu) against log(j) (polynomial) or j (exponential)
    over the top half of the observed spectrum; the eigenfunction bound is
    estimated as the largest rescaled proxy coordinate over the probes.
    """
    mu = basis.eigenvalues
    n_fit = max(2, mu.size // 2)
    j = np.arange(1, n_fit + 1, dtype=float)
    y = np.log(mu[:n_fit])
    x = np.log(j) if variant == "polynomial" else j
    slope, intercept = np.polyfit(x, y, 1)
    beta = -slope
    C = math.exp(intercept)
    if variant == "polynomial":
        beta = max(beta, 1.0 + 1e-6)
    else:
        beta = max(beta, 1e-6)
    F = proxy_features(basis, probe_points)
    B = float(np.abs(F / np.sqrt(basis.eigenvalues)).max())
    return EigendecayProfile(variant, C=C, beta=beta, eigfn_bound_B=B)


def _g17(x: float) -> float:
    # round-trip through 17 significant digits; exact for IEEE doubles
    return float(f"{x:.17g}")


def basis_to_json(basis: SampleBasis) -> str:
    """Serialize a basis; numbers pass through 17-significant-digit decimals."""
    spec = basis.kernel
    doc = {
        "kernel": {
            "variant": spec.variant,
            "norm_bound_G": _g17(spec.norm_bound_G),
            "sigma": None if spec.sigma is None else _g17(spec.sigma),
            "degree": spec.degree,
            "offset": None if spec.offset is None else _g17(spec.offset),
        },
        "shape": {"p": basis.p, "m": basis.m, "d": basis.sample_points.shape[1]},
        "points": [_g17(v) for v in basis.sample_points.ravel()],
        "eig_coeffs": [_g17(v) for v in basis.eig_coeffs.ravel()],
        "eigenvalues": [_g17(v) for v in basis.eigenvalues],
        "normalizers": [_g17(v) for v in basis.normalizers],
    }
    return json.dumps(doc)


def basis_from_json(text: str) -> SampleBasis:
    doc = json.loads(text)
    k = doc["kernel"]
    spec = KernelSpec(k["variant"], norm_bound_G=k["norm_bound_G"],
                      sigma=k["sigma"], degree=k["degree"], offset=k["offset"])
    p, m, d = doc["shape"]["p"], doc["shape"]["m"], doc["shape"]["d"]
    return SampleBasis(
        sample_points=np.array(doc["points"], dtype=float).reshape(p, d),
        eig_coeffs=np.array(doc["eig_coeffs"], dtype=float).reshape(m, p),
        eigenvalues=np.array(doc["eigenvalues"], dtype=float),
        normalizers=np.array(doc["normalizers"], dtype=float),
        kernel=spec,
    )
