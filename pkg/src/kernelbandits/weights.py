"""Log-domain multiplicative weights over a finite action set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = ["WeightState", "softmax"]


def softmax(log_weights: np.ndarray) -> np.ndarray:
    """Normalized probabilities with max subtraction; never overflows."""
    shifted = log_weights - log_weights.max()
    w = np.exp(shifted)
    return w / w.sum()


@dataclass(frozen=True)
class WeightState:
    """Exponential-weights state: unnormalized log weights plus round count.

    Probabilities are materialized at read time only, so the stored state
    stays finite for any horizon.
    """

    log_weights: np.ndarray
    round: int = 0

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        if not np.all(np.isfinite(lw)):
            raise InputError("log weights must be finite")
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def uniform(cls, n: int) -> "WeightState":
        return cls(np.zeros(n), 0)

    def probabilities(self) -> np.ndarray:
        return softmax(self.log_weights)

    def stepped(self, delta: np.ndarray) -> "WeightState":
        """New state with log weights shifted by ``delta`` and round + 1."""
        lw = self.log_weights + delta
        lw = lw - lw.max()  # re-center so exponents never drift
        return WeightState(lw, self.round + 1)
