"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from a user seed plus a stream label and whose counter is positioned
by a replicate index. Replicate ``i`` therefore sees the same numbers no
matter how the replicates are distributed over workers or in which order they
run.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import ndtri

_TWO_M53 = 2.0 ** -53


@lru_cache(maxsize=256)
def _key(seed: int, label: str) -> tuple[int, int]:
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    words += list(label.encode("utf-8"))
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def substream(seed: int, label: str = "", index: int = 0) -> np.random.Generator:
    """Return the generator for replicate ``index`` of stream ``label``.

    Streams with different ``(seed, label)`` pairs use different Philox keys.
    Replicates within a stream occupy disjoint counter ranges (the index sits
    in the top 64-bit counter word), so they never overlap.
    """
    if index < 0:
        raise ValueError("replicate index must be nonnegative")
    bitgen = np.random.Philox(key=list(_key(seed, label)), counter=[0, 0, 0, int(index)])
    return np.random.Generator(bitgen)


def uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1) built from 53-bit integers."""
    k = gen.integers(0, 2**53, size=size, dtype=np.uint64)
    return (k.astype(np.float64) + 0.5) * _TWO_M53


def normal(gen: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    """Normal variates by inversion of the standard normal CDF."""
    z = ndtri(uniform(gen, size))
    return z * scale if scale != 1.0 else z


def rademacher(gen: np.random.Generator, size) -> np.ndarray:
    """Independent +1/-1 signs with equal probability."""
    return np.where(uniform(gen, size) < 0.5, -1.0, 1.0)
