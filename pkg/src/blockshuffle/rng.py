"""Deterministic shuffling: a SplitMix64 stream driving a Fisher-Yates pass.

The generator is fixed so that a seed reproduces the same permutation on any
platform and any run; its identifier is recorded in run manifests.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

PRNG_ID = "splitmix64/fisher-yates"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


class SplitMix64:
    """SplitMix64: 64-bit counter plus avalanche mixer.

    Reference constants from the public-domain implementation at
    https://prng.di.unimi.it/splitmix64.c
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection sampling."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = (1 << 64) % bound
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % bound

    def split(self) -> "SplitMix64":
        """Independent child stream seeded from this one."""
        return SplitMix64(self.next_u64())


def shuffled(items: Sequence[T], seed: int) -> list[T]:
    """Uniform random permutation of `items` (Fisher-Yates, descending)."""
    out = list(items)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
