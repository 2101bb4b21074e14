"""Deterministic, splittable random streams.

Every stream is a Philox4x64-10 counter-based generator keyed by a
:class:`numpy.random.SeedSequence` built from ``(seed, path)``.  Monte-Carlo
trial ``i`` draws from ``rng.substream(i)``, so results do not depend on the
order in which trials run.  Gaussians come from Box-Muller applied to the
generator's 53-bit uniforms.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["DEFAULT_SEED", "SeededRng"]

DEFAULT_SEED = 0xC0FFEE
_UINT64 = (1 << 64) - 1


class SeededRng:
    """A reproducible random stream identified by a seed and a substream path."""

    algorithm_id = "philox4x64-10+box-muller"

    def __init__(self, seed: int = DEFAULT_SEED, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed <= _UINT64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed:#x}, path={self.path})"

    def substream(self, *index: int) -> SeededRng:
        """Independent stream for ``index`` below this one (state-independent)."""
        return SeededRng(self.seed, self.path + tuple(index))

    def uniform(self, size=None) -> np.ndarray:
        """Uniforms on ``[0, 1)`` with 53 random bits each."""
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        """Standard real Gaussians (both Box-Muller outputs are used)."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = math.prod(shape)
        pairs = (count + 1) // 2
        u = self._gen.random((2, pairs))
        radius = np.sqrt(-2.0 * np.log1p(-u[0]))
        angle = 2.0 * np.pi * u[1]
        z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return z[:count].reshape(shape)

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex Gaussians: real and imaginary parts of variance 1/2."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = math.prod(shape)
        u = self._gen.random((2, count))
        radius = np.sqrt(-np.log1p(-u[0]))
        z = radius * np.exp(2j * np.pi * u[1])
        return z.reshape(shape)
