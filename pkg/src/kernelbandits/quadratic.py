"""Quadratic-loss solvers: the unit-ball trust-region oracle and the
exponential-weights sampler for densities exp(a^T B a + a^T b) on the ball.

The trust-region subproblem is solved exactly from the eigendecomposition of
B plus a one-dimensional secular-equation root find on the Lagrange
multiplier, with boundary completion in the hard case (linear term orthogonal
to the bottom eigenspace).  The sampler runs hit-and-run in the eigenbasis of
B with exact chord-wise inverse-CDF sampling; the constraint set stays the
unit ball, which is convex regardless of the signs of the eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStartError, InputError

__all__ = [
    "QuadraticObjective",
    "trs_minimize",
    "hit_and_run",
    "quad_ew_sample",
    "surrogate_membership",
    "chain_autocorrelation",
]


@dataclass(frozen=True)
class QuadraticObjective:
    """Objective a^T B a + b^T a with symmetric (possibly indefinite) B."""

    B: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] != b.size:
            raise InputError("B must be square with side len(b)")
        if np.abs(B - B.T).max() > 1e-12 * max(1.0, np.abs(B).max()):
            raise InputError("B must be symmetric")
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(b))):
            raise InputError("objective coefficients must be finite")
        object.__setattr__(self, "B", 0.5 * (B + B.T))
        object.__setattr__(self, "b", b)

    def value(self, a: np.ndarray) -> float:
        a = np.asarray(a, dtype=float)
        return float(a @ self.B @ a + self.b @ a)


def trs_minimize(obj: QuadraticObjective, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Global minimizer of a^T B a + b^T a over the unit ball.

    Returns (point, value).  The multiplier solves
    sum_i c_i^2 / (lam_i + nu)^2 = 1 on (max(0, -lam_min), inf); when the
    secular function never reaches 1 there (hard case) the boundary solution
    is completed inside the bottom eigenspace.
    """
    B, b = obj.B, obj.b
    d = b.size
    lam, V = np.linalg.eigh(B)
    c = V.T @ (-0.5 * b)
    scale = max(np.abs(lam).max(initial=0.0), np.linalg.norm(b), 1.0)
    gap_tol = 1e-12 * scale

    # interior candidate: stationary point of the convex part, zero elsewhere
    if lam[0] >= -gap_tol:
        alpha = np.zeros(d)
        pos = lam > gap_tol
        alpha[pos] = c[pos] / lam[pos]
        if np.all(np.abs(c[~pos]) <= gap_tol) and alpha @ alpha <= 1.0 + tol:
            a = V @ alpha
            return a, obj.value(a)

    nu_lo = max(0.0, -lam[0])
    bottom = lam <= lam[0] + gap_tol

    def phi(nu: float, mask=None) -> float:
        denom = lam + nu
        use = np.ones(d, dtype=bool) if mask is None else ~mask
        return float(np.sum((c[use] / denom[use]) ** 2))

    hard = False
    if np.all(np.abs(c[bottom]) <= gap_tol) and lam[0] < -gap_tol:
        if phi(nu_lo, mask=bottom) <= 1.0:
            hard = True

    if hard:
        nu = nu_lo
        alpha = np.zeros(d)
        rest = ~bottom
        alpha[rest] = c[rest] / (lam[rest] + nu)
        residual = 1.0 - float(alpha @ alpha)
        tau = np.sqrt(max(residual, 0.0))
        alpha[np.argmax(bottom)] = tau  # any unit direction in the eigenspace
    else:
        # regular case: phi decreasing with a root right of nu_lo
        lo = nu_lo
        hi = nu_lo + scale
        while phi(hi) > 1.0:
            hi = nu_lo + 2.0 * (hi - nu_lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if phi(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        nu = hi
        alpha = c / (lam + nu)
        norm = np.linalg.norm(alpha)
        if norm > 0:
            alpha /= norm

    a = V @ alpha
    return a, obj.value(a)


def hit_and_run(log_density, membership, chord_bounds, start, steps: int,
                rng: np.random.Generator) -> np.ndarray:
    """Hit-and-run chain with exact chord sampling.

    ``log_density`` maps a batch of points (n, d) to log densities (n,);
    ``chord_bounds(x, u)`` returns the feasible parameter interval of
    x + t u.  Each step samples the 1-D conditional by inverse CDF on a
    256-point grid with linear interpolation.  Every emitted point is
    feasible.
    """
    x = np.asarray(start, dtype=float).copy()
    if not membership(x):
        raise DegenerateStartError("start point is infeasible")
    d = x.size
    out = np.empty((steps, d))
    grid = np.linspace(0.0, 1.0, 256)
    for step in range(steps):
        u = rng.standard_normal(d)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            u = np.zeros(d)
            u[0] = 1.0
        else:
            u /= norm
        t_lo, t_hi = chord_bounds(x, u)
        if not np.isfinite(t_lo) or not np.isfinite(t_hi) or t_hi - t_lo <= 1e-14:
            raise DegenerateStartError(
                f"degenerate chord of length {t_hi - t_lo!r} at step {step}"
            )
        ts = t_lo + (t_hi - t_lo) * grid
        logd = np.asarray(log_density(x[None, :] + ts[:, None] * u[None, :]))
        p = np.exp(logd - logd.max())
        seg = 0.5 * (p[1:] + p[:-1])  # trapezoid mass per grid cell
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        target = rng.random() * cum[-1]
        k = min(int(np.searchsorted(cum, target, side="right")) - 1, len(seg) - 1)
        k = max(k, 0)
        frac = (target - cum[k]) / seg[k] if seg[k] > 0 else 0.5
        t = ts[k] + frac * (ts[k + 1] - ts[k])
        x = x + np.clip(t, t_lo, t_hi) * u
        out[step] = x
    return out


def _ball_chord(x: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    # solve ||x + t u||^2 = 1 for unit u
    xu = float(x @ u)
    disc = xu * xu - (float(x @ x) - 1.0)
    root = np.sqrt(max(disc, 0.0))
    return -xu - root, -xu + root


def quad_ew_sample(obj: QuadraticObjective, count: int, burn_in: int | None = None,
                   rng: np.random.Generator | None = None,
                   thin: int = 1) -> np.ndarray:
    """Samples approximately distributed as exp(a^T B a + a^T b) on the ball.

    Works in the eigenbasis of B, where the density separates per coordinate,
    and runs hit-and-run over the unit ball with exact chord sampling.  The
    chain's stationary law is the target for any sign pattern of the
    eigenvalues; mixing quality is reported via
    :func:`chain_autocorrelation`, not guaranteed.
    """
    if count < 1:
        raise InputError("count must be >= 1")
    d = obj.b.size
    if burn_in is None:
        burn_in = 1000 * d
    if burn_in < 0:
        raise InputError("burn_in must be >= 0")
    if rng is None:
        rng = np.random.default_rng()
    lam, V = np.linalg.eigh(obj.B)
    gam = V.T @ obj.b

    def log_density(points: np.ndarray) -> np.ndarray:
        return points * points @ lam + points @ gam

    def membership(point: np.ndarray) -> bool:
        return float(point @ point) <= 1.0 + 1e-12

    chain = hit_and_run(log_density, membership, _ball_chord,
                        np.zeros(d), burn_in + count * thin, rng)
    kept = chain[burn_in::thin][:count]
    return kept @ V.T


def surrogate_membership(obj: QuadraticObjective, zero_tol: float = 1e-10):
    """Membership test for the convex reparametrized constraint set.

    Coordinates with a nonzero eigenvalue are squared shifted coordinates
    beta_i = (alpha_i + gamma_i / (2 lam_i))^2 (required nonnegative); zero
    eigenvalue coordinates stay as alpha_i.  Feasibility is
    sum_zero alpha_i^2 + sum_nonzero (sqrt(beta_i) - gamma_i/(2 lam_i))^2 <= 1.
    Returns (membership callback, nonzero-eigenvalue mask).
    """
    lam, V = np.linalg.eigh(obj.B)
    gam = V.T @ obj.b
    nonzero = np.abs(lam) >= zero_tol
    shift = np.zeros_like(lam)
    shift[nonzero] = gam[nonzero] / (2.0 * lam[nonzero])

    def member(v: np.ndarray) -> bool:
        v = np.asarray(v, dtype=float)
        if np.any(v[nonzero] < 0.0):
            return False
        radial = np.where(nonzero, np.sqrt(np.maximum(v, 0.0)) - shift, v)
        return float(radial @ radial) <= 1.0 + 1e-12

    return member, nonzero


def chain_autocorrelation(samples: np.ndarray, lag: int = 1) -> float:
    """Mean lag-k autocorrelation across coordinates (mixing diagnostic)."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    if s.shape[0] <= lag:
        return float("nan")
    centered = s - s.mean(axis=0)
    num = np.sum(centered[:-lag] * centered[lag:], axis=0)
    den = np.sum(centered * centered, axis=0)
    den = np.where(den == 0.0, 1.0, den)
    return float(np.mean(num / den))
