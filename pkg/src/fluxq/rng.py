"""Deterministic pseudo-random numbers for reproducible runs.

The generator is SplitMix64: a 64-bit counter advanced by the golden-ratio
increment and finalized with two xor-multiply avalanche rounds. The algorithm
is pinned in this file, so a given seed reproduces the exact same stream on
every platform and library version. Do not change the constants or the
derivation rules below; report reproducibility depends on them.

Parallel or per-sample streams come from :meth:`DeterministicRNG.split`:
child stream ``k`` of master seed ``s`` is seeded with
``mix64(mix64(s) + (k + 1) * GOLDEN)``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class DeterministicRNG:
    """SplitMix64 stream with a 64-bit unsigned seed."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._seed = seed
        self._state = seed

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randrange() requires n >= 1")
        threshold = ((1 << 64) // n) * n
        while True:
            value = self.next_u64()
            if value < threshold:
                return value % n

    def choice(self, seq):
        if not seq:
            raise IndexError("choice() on empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def split(self, k: int) -> "DeterministicRNG":
        """Child stream ``k``, independent of how much of this stream was used.

        Derivation is fixed: ``mix64(mix64(master_seed) + (k + 1) * GOLDEN)``.
        """
        if k < 0:
            raise ValueError("split index must be non-negative")
        child_seed = mix64((mix64(self._seed) + (k + 1) * _GOLDEN) & _MASK64)
        return DeterministicRNG(child_seed)
