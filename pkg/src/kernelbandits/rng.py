"""Seedable counter-based random streams.

Every run derives its randomness from a 64-bit master seed plus a component
name.  The generator is Philox4x64 keyed with the pair

    key = (master_seed, low 64 bits of SHA-256(component_name))

so any implementation of Philox and SHA-256 reproduces the same stream.  The
generator algorithm is part of the package's external contract: traces are
comparable across runs only because the draws are pinned down this way.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["component_stream_id", "component_rng", "sample_index"]


def component_stream_id(component: str) -> int:
    """Stream id for a component: low 64 bits of SHA-256 of its name."""
    digest = hashlib.sha256(component.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def component_rng(seed: int, component: str) -> np.random.Generator:
    """Independent Philox stream for ``component`` under a master seed."""
    key = np.array([np.uint64(seed & (2**64 - 1)),
                    np.uint64(component_stream_id(component))], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over index order from a single 64-bit uniform.

    Ties and rounding resolve toward lower indices, which makes traces
    reproducible byte-for-byte given the same generator.
    """
    u = int(rng.integers(0, 2**64, dtype=np.uint64)) / 2.0**64
    cum = np.cumsum(weights)
    total = cum[-1]
    idx = int(np.searchsorted(cum, u * total, side="right"))
    return min(idx, len(weights) - 1)
