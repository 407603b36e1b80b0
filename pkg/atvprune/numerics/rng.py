"""
Seeded, platform-independent pseudo-random numbers.

The generator is SplitMix64: the i-th output (i = 1, 2, ...) is
``mix(seed + i * 0x9E3779B97F4A7C15 mod 2**64)`` with

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic modulo 2**64. Because the state advances by a constant, the
stream is generated in vectorised blocks with ``numpy`` uint64 arithmetic.
"""

import hashlib
import numpy as np
from numpy.typing import NDArray
from typing import Tuple, Union

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
MASK_64 = (1 << 64) - 1


def _mix(z: NDArray[np.uint64]) -> NDArray[np.uint64]:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """SplitMix64 stream; same seed gives the same values on every platform."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK_64
        self._counter = 0

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, drawn={self._counter})"

    def next_u64(self, n: int) -> NDArray[np.uint64]:
        """Draw the next ``n`` raw 64-bit outputs."""
        steps = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + steps * np.uint64(GOLDEN_GAMMA)
            return _mix(state)

    def random(self, n: int) -> NDArray[np.float64]:
        """Uniform floats in [0, 1) with 53 random bits each."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def normal(self, shape: Union[int, Tuple[int, ...]], scale: float = 1.0) -> NDArray[np.float64]:
        """Standard normal samples via the Box-Muller transform."""
        size = int(np.prod(shape))
        pairs = (size + 1) // 2
        u1 = 1.0 - self.random(pairs)
        u2 = self.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        values = np.empty(2 * pairs, dtype=np.float64)
        values[0::2] = radius * np.cos(angle)
        values[1::2] = radius * np.sin(angle)
        return (values[:size] * scale).reshape(shape)

    def sample_without_replacement(self, n: int, k: int) -> NDArray[np.int64]:
        """
        Uniform k-subset of ``range(n)``, returned in ascending order.

        Each index gets a random 64-bit key; the k smallest keys win (ties by
        smaller index).
        """
        k = max(0, min(k, n))
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        keys = self.next_u64(n)
        order = np.argsort(keys, kind="stable")
        return np.sort(order[:k]).astype(np.int64)

    def spawn(self, *labels: Union[int, str]) -> "Rng":
        """
        Independent child stream keyed by labels, e.g. ``(sample_id, block)``.

        The child seed depends only on this generator's seed and the labels,
        never on how many values were drawn before.
        """
        payload = ":".join([str(self.seed)] + [str(label) for label in labels])
        digest = hashlib.sha256(payload.encode("utf-8")).digest()
        return Rng(int.from_bytes(digest[:8], "little"))
